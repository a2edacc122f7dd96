#pragma once

#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lhrm/common.hpp"
#include "lhrm/events.hpp"
#include "lhrm/sequences.hpp"

namespace lhrm {

// Token -> dense vector map produced by skip-gram pretraining. Vocabulary
// order is (frequency desc, token asc), which also fixes the file layout.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(int dim, std::vector<std::string> tokens, std::vector<std::uint64_t> freq)
        : dim_(dim), tokens_(std::move(tokens)), freq_(std::move(freq)) {
        data_.assign(tokens_.size() * static_cast<std::size_t>(dim_), 0.0);
        for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = i;
    }

    int dim() const { return dim_; }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    bool contains(const std::string& token) const { return index_.count(token) != 0; }

    std::size_t index_of(const std::string& token) const {
        auto it = index_.find(token);
        if (it == index_.end()) throw LookupError("token not in vocabulary: " + token);
        return it->second;
    }

    std::uint64_t frequency(std::size_t idx) const { return idx < freq_.size() ? freq_[idx] : 0; }

    std::span<const double> vec(std::size_t idx) const {
        return std::span<const double>(data_).subspan(idx * dim_, dim_);
    }
    std::span<double> vec(std::size_t idx) {
        return std::span<double>(data_).subspan(idx * dim_, dim_);
    }
    std::span<const double> vec(const std::string& token) const { return vec(index_of(token)); }

    // Line-oriented text format: header `dim=<d> vocab=<n>`, then one line per
    // token: `<token> <v1> ... <vd>` with round-trip-exact decimal floats.
    void save(const std::string& path) const {
        auto out = detail::open_out(path);
        out << "dim=" << dim_ << " vocab=" << tokens_.size() << '\n';
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            out << tokens_[i];
            for (double v : vec(i)) out << ' ' << format_double(v);
            out << '\n';
        }
    }

    static EmbeddingTable load(const std::string& path) {
        auto in = detail::open_in(path);
        std::string line;
        if (!std::getline(in, line)) throw DataError(path + ": empty embedding file");
        int dim = 0;
        std::size_t vocab = 0;
        if (std::sscanf(line.c_str(), "dim=%d vocab=%zu", &dim, &vocab) != 2)
            throw DataError(path + ": bad embedding header: " + line);
        if (dim <= 0) throw DataError(path + ": nonpositive dim");
        EmbeddingTable t;
        t.dim_ = dim;
        t.tokens_.reserve(vocab);
        t.data_.reserve(vocab * static_cast<std::size_t>(dim));
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto f = split(line, ' ');
            if (f.size() != static_cast<std::size_t>(dim) + 1)
                throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                                std::to_string(dim + 1) + " fields");
            t.index_[f[0]] = t.tokens_.size();
            t.tokens_.push_back(f[0]);
            for (int j = 1; j <= dim; ++j) t.data_.push_back(parse_double(f[j]));
        }
        if (t.tokens_.size() != vocab)
            throw DataError(path + ": vocab mismatch, header says " + std::to_string(vocab) +
                            " but file has " + std::to_string(t.tokens_.size()));
        t.freq_.assign(t.tokens_.size(), 0);  // frequencies are not persisted
        return t;
    }

private:
    int dim_ = 0;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::uint64_t> freq_;
    Vec data_;  // row-major size() x dim
};

struct SgnsConfig {
    int dim = 32;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double learning_rate = 0.025;  // decays linearly to 1e-4 of itself
    int min_count = 1;
    std::uint64_t seed = 1;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Objective for one (center, context, negatives) triple:
//   L = -log s(u_ctx . v_c) - sum_k log s(-u_k . v_c)
// where v is the center's input vector and u are output vectors.
inline double sgns_pair_loss(std::span<const double> center_in, std::span<const double> context_out,
                             const std::vector<std::span<const double>>& negatives_out) {
    const double eps = 1e-12;
    double loss = -std::log(std::max(sigmoid(dot(context_out, center_in)), eps));
    for (const auto& u : negatives_out)
        loss += -std::log(std::max(1.0 - sigmoid(dot(u, center_in)), eps));
    return loss;
}

// Analytic gradients of sgns_pair_loss. grad_center/grad_context/grad_negs
// must be pre-sized; values are overwritten.
inline void sgns_pair_grad(std::span<const double> center_in, std::span<const double> context_out,
                           const std::vector<std::span<const double>>& negatives_out,
                           std::span<double> grad_center, std::span<double> grad_context,
                           std::vector<Vec>& grad_negs) {
    const std::size_t d = center_in.size();
    for (std::size_t j = 0; j < d; ++j) grad_center[j] = 0.0;

    const double g_pos = sigmoid(dot(context_out, center_in)) - 1.0;  // d L / d (u.v)
    for (std::size_t j = 0; j < d; ++j) {
        grad_context[j] = g_pos * center_in[j];
        grad_center[j] += g_pos * context_out[j];
    }
    grad_negs.assign(negatives_out.size(), Vec(d, 0.0));
    for (std::size_t k = 0; k < negatives_out.size(); ++k) {
        const double g_neg = sigmoid(dot(negatives_out[k], center_in));
        for (std::size_t j = 0; j < d; ++j) {
            grad_negs[k][j] = g_neg * center_in[j];
            grad_center[j] += g_neg * negatives_out[k][j];
        }
    }
}

// Skip-gram with negative sampling over the given sequences. Negatives are
// drawn from the unigram distribution raised to the 3/4 power; input vectors
// start uniform in [-0.5/dim, 0.5/dim], output vectors at zero. Deterministic
// for a fixed seed (single worker, seeded permutations). When epoch_loss is
// given it receives the mean pair loss of each epoch, measured before each
// update.
inline EmbeddingTable train_skipgram(const std::vector<TokenSequence>& sequences,
                                     const SgnsConfig& cfg,
                                     std::vector<double>* epoch_loss = nullptr) {
    if (cfg.dim <= 0) throw ConfigError("sgns: dim must be positive");
    if (cfg.window <= 0) throw ConfigError("sgns: window must be positive");
    if (cfg.negatives < 0) throw ConfigError("sgns: negatives must be >= 0");
    if (cfg.epochs <= 0) throw ConfigError("sgns: epochs must be positive");

    // Vocabulary: count, filter by min_count, order by (freq desc, token asc).
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& seq : sequences)
        for (const auto& tok : seq.tokens) ++counts[tok];
    std::vector<std::pair<std::string, std::uint64_t>> vocab(counts.begin(), counts.end());
    std::erase_if(vocab, [&](const auto& p) {
        return p.second < static_cast<std::uint64_t>(cfg.min_count);
    });
    if (vocab.empty()) throw ConfigError("sgns: empty vocabulary after min_count filter");
    std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    std::vector<std::string> tokens(vocab.size());
    std::vector<std::uint64_t> freq(vocab.size());
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        tokens[i] = vocab[i].first;
        freq[i] = vocab[i].second;
        index[tokens[i]] = i;
    }

    // Encode sequences, dropping out-of-vocabulary tokens.
    std::vector<std::vector<std::size_t>> encoded;
    std::size_t total_tokens = 0;
    for (const auto& seq : sequences) {
        std::vector<std::size_t> enc;
        enc.reserve(seq.tokens.size());
        for (const auto& tok : seq.tokens) {
            auto it = index.find(tok);
            if (it != index.end()) enc.push_back(it->second);
        }
        if (enc.size() >= 2) {
            total_tokens += enc.size();
            encoded.push_back(std::move(enc));
        }
    }
    if (encoded.empty())
        throw ConfigError("sgns: no sequence has 2+ in-vocabulary tokens (no context pairs)");

    const std::size_t n = tokens.size();
    const std::size_t d = static_cast<std::size_t>(cfg.dim);

    EmbeddingTable table(cfg.dim, std::move(tokens), std::move(freq));
    Rng rng(cfg.seed);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = table.vec(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = rng.uniform(-0.5, 0.5) / cfg.dim;
    }
    Vec out_vecs(n * d, 0.0);  // context ("output") vectors, zero-initialized

    // Cumulative unigram^(3/4) distribution for negative sampling.
    Vec neg_cum(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += std::pow(static_cast<double>(table.frequency(i)), 0.75);
        neg_cum[i] = acc;
    }
    auto sample_negative = [&]() -> std::size_t {
        const double r = rng.uniform01() * acc;
        return static_cast<std::size_t>(
            std::lower_bound(neg_cum.begin(), neg_cum.end(), r) - neg_cum.begin());
    };

    const double lr0 = cfg.learning_rate;
    const double lr_min = lr0 * 1e-4;
    const std::size_t total_steps = total_tokens * static_cast<std::size_t>(cfg.epochs);
    std::size_t processed = 0;

    std::vector<std::size_t> order(encoded.size());
    std::iota(order.begin(), order.end(), 0);
    Vec center_grad(d);
    std::vector<std::size_t> negs(static_cast<std::size_t>(cfg.negatives));

    if (epoch_loss) epoch_loss->clear();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t pair_count = 0;
        for (std::size_t oi : order) {
            const auto& seq = encoded[oi];
            for (std::size_t pos = 0; pos < seq.size(); ++pos) {
                const double lr =
                    std::max(lr_min, lr0 * (1.0 - static_cast<double>(processed) /
                                                      static_cast<double>(total_steps + 1)));
                ++processed;
                const std::size_t center = seq[pos];
                // Dynamic window, word2vec style.
                const int reduced = static_cast<int>(rng.uniform_index(cfg.window));
                const int span_w = cfg.window - reduced;
                for (int off = -span_w; off <= span_w; ++off) {
                    if (off == 0) continue;
                    const std::ptrdiff_t cpos = static_cast<std::ptrdiff_t>(pos) + off;
                    if (cpos < 0 || cpos >= static_cast<std::ptrdiff_t>(seq.size())) continue;
                    const std::size_t context = seq[static_cast<std::size_t>(cpos)];

                    std::size_t n_negs = 0;
                    for (int k = 0; k < cfg.negatives; ++k) {
                        const std::size_t neg = sample_negative();
                        if (neg == context) continue;  // word2vec convention: skip, don't redraw
                        negs[n_negs++] = neg;
                    }

                    auto v_c = table.vec(center);
                    auto u_o = std::span<double>(out_vecs).subspan(context * d, d);

                    // Pair loss before the update (epoch statistics).
                    const double pos_dot = dot(u_o, v_c);
                    double pair_loss = -std::log(std::max(sigmoid(pos_dot), 1e-12));

                    std::fill(center_grad.begin(), center_grad.end(), 0.0);
                    const double g_pos = (sigmoid(pos_dot) - 1.0) * lr;
                    for (std::size_t j = 0; j < d; ++j) {
                        center_grad[j] += g_pos * u_o[j];
                        u_o[j] -= g_pos * v_c[j];
                    }
                    for (std::size_t k = 0; k < n_negs; ++k) {
                        auto u_n = std::span<double>(out_vecs).subspan(negs[k] * d, d);
                        const double neg_dot = dot(u_n, v_c);
                        pair_loss += -std::log(std::max(1.0 - sigmoid(neg_dot), 1e-12));
                        const double g_neg = sigmoid(neg_dot) * lr;
                        for (std::size_t j = 0; j < d; ++j) {
                            center_grad[j] += g_neg * u_n[j];
                            u_n[j] -= g_neg * v_c[j];
                        }
                    }
                    for (std::size_t j = 0; j < d; ++j) v_c[j] -= center_grad[j];

                    loss_sum += pair_loss;
                    ++pair_count;
                }
            }
        }
        if (epoch_loss) epoch_loss->push_back(pair_count ? loss_sum / pair_count : 0.0);
    }
    return table;
}

// Pooled per-user vector.
struct UserVector {
    std::string user;
    Vec vec;
    std::size_t in_vocab = 0;  // tokens that contributed; 0 marks un-embeddable

    bool embeddable() const { return in_vocab > 0; }
};

// Componentwise mean of the in-vocabulary token vectors of the sequence.
// All-OOV sequences yield the zero vector with in_vocab == 0.
inline UserVector user_vector(const TokenSequence& seq, const EmbeddingTable& table) {
    UserVector uv{seq.owner, Vec(table.dim(), 0.0), 0};
    for (const auto& tok : seq.tokens) {
        if (!table.contains(tok)) continue;
        const auto v = table.vec(tok);
        for (int j = 0; j < table.dim(); ++j) uv.vec[j] += v[j];
        ++uv.in_vocab;
    }
    if (uv.in_vocab > 0)
        for (double& x : uv.vec) x /= static_cast<double>(uv.in_vocab);
    return uv;
}

// User vectors reuse the embedding-table file format with user ids as tokens.
inline void save_user_vectors(const std::string& path, const std::vector<UserVector>& vectors,
                              int dim) {
    auto out = detail::open_out(path);
    out << "dim=" << dim << " vocab=" << vectors.size() << '\n';
    for (const auto& uv : vectors) {
        out << uv.user;
        for (double v : uv.vec) out << ' ' << format_double(v);
        out << '\n';
    }
}

}  // namespace lhrm
