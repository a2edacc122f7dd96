#pragma once

#include <iostream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lhrm/attributes.hpp"
#include "lhrm/common.hpp"
#include "lhrm/embedding.hpp"
#include "lhrm/groups.hpp"
#include "lhrm/kmeans.hpp"
#include "lhrm/ranking.hpp"

namespace lhrm {

struct MlpLayer {
    Mat w;  // out x in
    Vec b;  // out
};

// Full trainable state: bilinear attention matrices for both group kinds plus
// the two MLP towers. Hidden layers use ReLU, the output layer is linear, and
// both towers end at the same latent width so their dot product is defined.
struct ModelParams {
    int embed_dim = 0;
    int latent_dim = 0;
    Mat w_a_user, w_a_item;  // embed_dim x embed_dim
    std::vector<MlpLayer> user_mlp, item_mlp;

    static ModelParams init(int embed_dim, int user_attr_dim, int item_attr_dim,
                            const std::vector<int>& hidden, int latent_dim, std::uint64_t seed) {
        if (embed_dim <= 0 || latent_dim <= 0)
            throw ConfigError("model: embed_dim and latent_dim must be positive");
        ModelParams p;
        p.embed_dim = embed_dim;
        p.latent_dim = latent_dim;
        Rng rng(seed);
        auto fill_mat = [&](Mat& m, std::size_t rows, std::size_t cols, double limit) {
            m = Mat(rows, cols);
            for (double& v : m.data) v = rng.uniform(-limit, limit);
        };
        fill_mat(p.w_a_user, embed_dim, embed_dim, 0.05);
        fill_mat(p.w_a_item, embed_dim, embed_dim, 0.05);

        auto build_tower = [&](int in_dim) {
            std::vector<MlpLayer> tower;
            std::vector<int> widths(hidden);
            widths.push_back(latent_dim);
            int in = in_dim;
            for (int out : widths) {
                if (out <= 0) throw ConfigError("model: layer widths must be positive");
                MlpLayer l;
                const double limit = std::sqrt(6.0 / (in + out));
                fill_mat(l.w, out, in, limit);
                l.b.assign(out, 0.0);
                tower.push_back(std::move(l));
                in = out;
            }
            return tower;
        };
        p.user_mlp = build_tower(embed_dim + user_attr_dim);
        p.item_mlp = build_tower(embed_dim + item_attr_dim);
        return p;
    }

    ModelParams zeros_like() const {
        ModelParams z = *this;
        auto zero = [](std::span<double> s) { std::fill(s.begin(), s.end(), 0.0); };
        z.for_each_block(zero);
        return z;
    }

    template <typename F>
    void for_each_block(F&& f) {
        f(std::span<double>(w_a_user.data));
        f(std::span<double>(w_a_item.data));
        for (auto& l : user_mlp) {
            f(std::span<double>(l.w.data));
            f(std::span<double>(l.b));
        }
        for (auto& l : item_mlp) {
            f(std::span<double>(l.w.data));
            f(std::span<double>(l.b));
        }
    }

    std::size_t parameter_count() const {
        std::size_t n = w_a_user.data.size() + w_a_item.data.size();
        for (const auto& l : user_mlp) n += l.w.data.size() + l.b.size();
        for (const auto& l : item_mlp) n += l.w.data.size() + l.b.size();
        return n;
    }
};

// -------- attention (sequence-to-one, bilinear scores) --------

struct AttentionResult {
    Vec output;   // length embed_dim
    Vec weights;  // per real member; padding slots carry weight exactly 0 by construction
};

// score(e_t, e_i) = e_t^T W_a e_i over all real members (the target scores
// itself too); softmax over those scores; output = sum of weighted members.
inline AttentionResult attention(const EmbeddingGroup& group, const Mat& w_a) {
    if (group.members.empty()) throw ValidationError("attention: empty group");
    const std::size_t d = w_a.rows;
    if (w_a.cols != d) throw ShapeError("attention: W_a must be square");
    const Vec& target = group.members.back().vec;
    if (target.size() != d) throw ShapeError("attention: member dim does not match W_a");

    // r = e_t^T W_a, then score_i = r . e_i
    Vec r(d, 0.0);
    for (std::size_t row = 0; row < d; ++row) {
        const double t = target[row];
        if (t == 0.0) continue;
        const auto w_row = w_a.row(row);
        for (std::size_t col = 0; col < d; ++col) r[col] += t * w_row[col];
    }

    const std::size_t m = group.members.size();
    Vec scores(m);
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        if (group.members[i].vec.size() != d)
            throw ShapeError("attention: member dim mismatch at slot " + std::to_string(i));
        scores[i] = dot(r, group.members[i].vec);
        max_score = std::max(max_score, scores[i]);
    }

    AttentionResult res;
    res.weights.resize(m);
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        res.weights[i] = std::exp(scores[i] - max_score);
        z += res.weights[i];
    }
    for (double& w : res.weights) w /= z;

    res.output.assign(d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double a = res.weights[i];
        const Vec& e = group.members[i].vec;
        for (std::size_t j = 0; j < d; ++j) res.output[j] += a * e[j];
    }
    return res;
}

// Accumulates dL/dW_a given the upstream gradient on the attention output.
// Member vectors are fixed inputs and receive no gradient.
inline void attention_backward(const EmbeddingGroup& group, const AttentionResult& fwd,
                               std::span<const double> d_output, Mat& d_w_a) {
    const std::size_t d = d_w_a.rows;
    const Vec& target = group.members.back().vec;
    const double g_dot_a = dot(d_output, fwd.output);
    for (std::size_t i = 0; i < group.members.size(); ++i) {
        const Vec& e = group.members[i].vec;
        // d score_i = alpha_i * (g.e_i - g.a); d W_a += d score_i * e_t e_i^T
        const double ds = fwd.weights[i] * (dot(d_output, e) - g_dot_a);
        if (ds == 0.0) continue;
        for (std::size_t row = 0; row < d; ++row) {
            const double f = ds * target[row];
            auto w_row = d_w_a.row(row);
            for (std::size_t col = 0; col < d; ++col) w_row[col] += f * e[col];
        }
    }
}

// -------- MLP towers --------

struct MlpCache {
    std::vector<Vec> inputs;  // inputs[l] = input of layer l
    std::vector<Vec> zs;      // zs[l] = pre-activation of layer l
};

inline Vec mlp_forward(const std::vector<MlpLayer>& layers, Vec input, MlpCache* cache) {
    if (cache) {
        cache->inputs.clear();
        cache->zs.clear();
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.w.cols != input.size())
            throw ShapeError("mlp: layer " + std::to_string(l) + " expects " +
                             std::to_string(layer.w.cols) + " inputs, got " +
                             std::to_string(input.size()));
        Vec z(layer.w.rows);
        for (std::size_t r = 0; r < layer.w.rows; ++r)
            z[r] = layer.b[r] + dot(layer.w.row(r), input);
        if (cache) {
            cache->inputs.push_back(std::move(input));
            cache->zs.push_back(z);
        }
        if (l + 1 < layers.size())
            for (double& v : z) v = v > 0.0 ? v : 0.0;  // ReLU on hidden layers
        input = std::move(z);
    }
    return input;
}

inline void mlp_backward(const std::vector<MlpLayer>& layers, const MlpCache& cache,
                         Vec d_output, std::vector<MlpLayer>& grad, Vec& d_input) {
    Vec delta = std::move(d_output);  // gradient w.r.t. z of the current layer
    for (std::size_t li = layers.size(); li-- > 0;) {
        const auto& layer = layers[li];
        const Vec& in = cache.inputs[li];
        for (std::size_t r = 0; r < layer.w.rows; ++r) {
            grad[li].b[r] += delta[r];
            auto g_row = grad[li].w.row(r);
            const double dr = delta[r];
            for (std::size_t c = 0; c < layer.w.cols; ++c) g_row[c] += dr * in[c];
        }
        Vec d_in(layer.w.cols, 0.0);
        for (std::size_t r = 0; r < layer.w.rows; ++r) {
            const double dr = delta[r];
            if (dr == 0.0) continue;
            const auto w_row = layer.w.row(r);
            for (std::size_t c = 0; c < layer.w.cols; ++c) d_in[c] += dr * w_row[c];
        }
        if (li > 0) {
            const Vec& z_prev = cache.zs[li - 1];
            for (std::size_t c = 0; c < d_in.size(); ++c)
                if (z_prev[c] <= 0.0) d_in[c] = 0.0;
        }
        delta = std::move(d_in);
    }
    d_input = std::move(delta);
}

// -------- scorer --------

struct SampleView {
    const EmbeddingGroup* user_group = nullptr;
    const EmbeddingGroup* item_group = nullptr;
    const Vec* user_attrs = nullptr;
    const Vec* item_attrs = nullptr;
    int label = 0;
};

struct ForwardPass {
    AttentionResult att_user, att_item;
    MlpCache mlp_user, mlp_item;
    Vec s_user, s_item;
    double dot_raw = 0.0;
    double y_hat = 0.5;
};

inline constexpr double kLogitClip = 30.0;

inline Vec concat(std::span<const double> a, std::span<const double> b) {
    Vec v;
    v.reserve(a.size() + b.size());
    v.insert(v.end(), a.begin(), a.end());
    v.insert(v.end(), b.begin(), b.end());
    return v;
}

// a_u/a_i via attention, v = [a, attrs], towers, then y = sigmoid(s_u . s_i).
// The dot product is clipped to +/- kLogitClip before exp as a safety rail.
inline ForwardPass forward(const SampleView& s, const ModelParams& p) {
    ForwardPass f;
    f.att_user = attention(*s.user_group, p.w_a_user);
    f.att_item = attention(*s.item_group, p.w_a_item);
    f.s_user = mlp_forward(p.user_mlp, concat(f.att_user.output, *s.user_attrs), &f.mlp_user);
    f.s_item = mlp_forward(p.item_mlp, concat(f.att_item.output, *s.item_attrs), &f.mlp_item);
    if (f.s_user.size() != f.s_item.size())
        throw ShapeError("forward: tower output widths differ");
    f.dot_raw = dot(f.s_user, f.s_item);
    f.y_hat = sigmoid(std::clamp(f.dot_raw, -kLogitClip, kLogitClip));
    return f;
}

// Logistic loss, with the prediction clamped away from {0, 1} before the log.
inline double loss(int y, double y_hat) {
    if (y != 0 && y != 1) throw ValidationError("loss: label must be 0 or 1");
    const double eps = 1e-12;
    const double p = std::clamp(y_hat, eps, 1.0 - eps);
    return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

// Exact analytic gradients of loss(y, y_hat) through the dot product, both
// towers, the concatenation, and both attention layers. Accumulates into
// `grad` (same shapes as the params). Group member vectors are fixed inputs.
inline void backward(const SampleView& s, const ModelParams& p, const ForwardPass& f,
                     ModelParams& grad) {
    const double d_dot = f.y_hat - static_cast<double>(s.label);
    Vec d_su(f.s_item.size()), d_si(f.s_user.size());
    for (std::size_t i = 0; i < d_su.size(); ++i) {
        d_su[i] = d_dot * f.s_item[i];
        d_si[i] = d_dot * f.s_user[i];
    }
    Vec d_vu, d_vi;
    mlp_backward(p.user_mlp, f.mlp_user, std::move(d_su), grad.user_mlp, d_vu);
    mlp_backward(p.item_mlp, f.mlp_item, std::move(d_si), grad.item_mlp, d_vi);
    const std::size_t d = static_cast<std::size_t>(p.embed_dim);
    attention_backward(*s.user_group, f.att_user, std::span<const double>(d_vu).first(d),
                       grad.w_a_user);
    attention_backward(*s.item_group, f.att_item, std::span<const double>(d_vi).first(d),
                       grad.w_a_item);
}

inline double sample_loss(const SampleView& s, const ModelParams& p) {
    return loss(s.label, forward(s, p).y_hat);
}

// -------- training --------

struct TrainConfig {
    int epochs = 5;
    int batch_size = 64;
    double learning_rate = 0.005;  // Adam dies to sign-steps much above this
    std::string optimizer = "adam";  // adam | sgd
    std::uint64_t seed = 1;
};

struct TrainReport {
    std::vector<double> train_loss;  // per-epoch mean (measured as trained)
    std::vector<double> val_loss;    // per-epoch mean over the validation set
    int best_epoch = -1;
    bool single_label_warning = false;
};

namespace detail {

class Optimizer {
public:
    Optimizer(ModelParams& params, const TrainConfig& cfg) : cfg_(cfg) {
        if (cfg.optimizer != "adam" && cfg.optimizer != "sgd")
            throw ConfigError("unknown optimizer '" + cfg.optimizer + "'");
        params.for_each_block([&](std::span<double> s) { p_blocks_.push_back(s); });
        if (cfg.optimizer == "adam") {
            for (const auto& b : p_blocks_) {
                m_.emplace_back(b.size(), 0.0);
                v_.emplace_back(b.size(), 0.0);
            }
        }
    }

    void step(ModelParams& grad) {
        std::vector<std::span<double>> g_blocks;
        grad.for_each_block([&](std::span<double> s) { g_blocks.push_back(s); });
        ++t_;
        const double lr = cfg_.learning_rate;
        if (cfg_.optimizer == "sgd") {
            for (std::size_t b = 0; b < p_blocks_.size(); ++b)
                for (std::size_t i = 0; i < p_blocks_[b].size(); ++i)
                    p_blocks_[b][i] -= lr * g_blocks[b][i];
            return;
        }
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double bc1 = 1.0 - std::pow(b1, t_);
        const double bc2 = 1.0 - std::pow(b2, t_);
        for (std::size_t b = 0; b < p_blocks_.size(); ++b) {
            for (std::size_t i = 0; i < p_blocks_[b].size(); ++i) {
                const double g = g_blocks[b][i];
                m_[b][i] = b1 * m_[b][i] + (1.0 - b1) * g;
                v_[b][i] = b2 * v_[b][i] + (1.0 - b2) * g * g;
                p_blocks_[b][i] -= lr * (m_[b][i] / bc1) / (std::sqrt(v_[b][i] / bc2) + eps);
            }
        }
    }

private:
    TrainConfig cfg_;
    std::vector<std::span<double>> p_blocks_;
    std::vector<Vec> m_, v_;
    int t_ = 0;
};

}  // namespace detail

// Mini-batch training with a seeded permutation per epoch. Returns the
// parameters of the best validation epoch (best training epoch when the
// validation set is empty). Deterministic given the seed.
inline ModelParams train(const std::vector<SampleView>& train_samples,
                         const std::vector<SampleView>& val_samples, ModelParams params,
                         const TrainConfig& cfg, TrainReport* report = nullptr) {
    if (train_samples.empty()) throw ConfigError("train: no samples");
    if (cfg.epochs <= 0) throw ConfigError("train: epochs must be positive");
    if (cfg.batch_size <= 0) throw ConfigError("train: batch_size must be positive");

    TrainReport local;
    TrainReport& rep = report ? *report : local;

    bool has0 = false, has1 = false;
    for (const auto& s : train_samples) (s.label == 1 ? has1 : has0) = true;
    rep.single_label_warning = !(has0 && has1);

    detail::Optimizer opt(params, cfg);
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(train_samples.size());
    std::iota(order.begin(), order.end(), 0);

    ModelParams best = params;
    double best_metric = std::numeric_limits<double>::infinity();

    ModelParams grad = params.zeros_like();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            grad.for_each_block([](std::span<double> s) { std::fill(s.begin(), s.end(), 0.0); });
            for (std::size_t i = start; i < end; ++i) {
                const auto& sample = train_samples[order[i]];
                const ForwardPass f = forward(sample, params);
                loss_sum += loss(sample.label, f.y_hat);
                backward(sample, params, f, grad);
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            grad.for_each_block([&](std::span<double> s) {
                for (double& v : s) v *= inv;
            });
            opt.step(grad);
        }
        rep.train_loss.push_back(loss_sum / static_cast<double>(train_samples.size()));

        double metric = rep.train_loss.back();
        if (!val_samples.empty()) {
            double vsum = 0.0;
            for (const auto& s : val_samples) vsum += sample_loss(s, params);
            rep.val_loss.push_back(vsum / static_cast<double>(val_samples.size()));
            metric = rep.val_loss.back();
        }
        if (metric < best_metric) {
            best_metric = metric;
            best = params;
            rep.best_epoch = epoch;
        }
    }
    return best;
}

// -------- scoring and cold start --------

// Eq-6 style fusion: preference score times item popularity.
inline double fuse_popularity(double y_hat, double popularity) {
    if (popularity < 0.0)
        throw ValidationError("popularity must be non-negative, got " + format_double(popularity));
    return y_hat * popularity;
}

// Item-tower output plus popularity, precomputed once per catalog item.
struct ItemFactor {
    std::string item;
    Vec s;
    double popularity = 0.0;
};

inline std::vector<ItemFactor> compute_item_factors(
    const std::vector<ItemGroup>& item_groups, const std::map<std::string, Vec>& item_attr_vecs,
    const std::map<std::string, double>& popularity, const ModelParams& params) {
    std::vector<ItemFactor> out;
    out.reserve(item_groups.size());
    for (const auto& g : item_groups) {
        auto attrs = item_attr_vecs.find(g.target);
        if (attrs == item_attr_vecs.end())
            throw DataError("no attribute vector for item: " + g.target);
        const AttentionResult att = attention(g, params.w_a_item);
        ItemFactor f;
        f.item = g.target;
        f.s = mlp_forward(params.item_mlp, concat(att.output, attrs->second), nullptr);
        auto pop = popularity.find(g.target);
        f.popularity = pop == popularity.end() ? 0.0 : pop->second;
        out.push_back(std::move(f));
    }
    return out;
}

struct ColdStartInput {
    std::string user;
    std::vector<std::string> source_tokens;  // source-domain behaviour sequence
    Vec attrs;                               // encoded attributes
};

struct ColdStartContext {
    const ModelParams* params = nullptr;
    const EmbeddingTable* source_table = nullptr;
    const ClusterModel* clusters = nullptr;
    const std::vector<std::vector<std::string>>* cluster_members = nullptr;  // sorted ids
    const std::map<std::string, Vec>* user_vectors = nullptr;
    const std::vector<ItemFactor>* items = nullptr;
    int group_capacity = 10;  // L
};

// Algorithm: pool the new user's source sequence, assign the nearest
// cluster, form a user group from that cluster's nearest members, run the
// user tower once, then score every catalog item with sigmoid(s_u . s_i)
// fused with popularity. Users with no in-vocabulary token fall back to the
// popularity ranking, flagged on the output.
inline RankedList cold_start_recommend(const ColdStartInput& input, const ColdStartContext& ctx,
                                       std::size_t k) {
    RankedList list;
    list.user = input.user;

    TokenSequence seq{input.user, Domain::source, input.source_tokens};
    const UserVector uv = user_vector(seq, *ctx.source_table);

    std::vector<std::pair<double, const ItemFactor*>> scored;
    scored.reserve(ctx.items->size());
    if (!uv.embeddable()) {
        list.fallback_hot = true;
        for (const auto& f : *ctx.items) scored.emplace_back(f.popularity, &f);
    } else {
        const int cluster = ctx.clusters->assign(uv.vec);
        std::vector<std::pair<std::string, const Vec*>> candidates;
        for (const auto& member : (*ctx.cluster_members)[cluster]) {
            if (member == input.user) continue;
            auto it = ctx.user_vectors->find(member);
            if (it == ctx.user_vectors->end())
                throw LookupError("no vector for cluster member: " + member);
            candidates.emplace_back(member, &it->second);
        }
        auto friends = detail::nearest_by_distance(
            uv.vec, candidates, static_cast<std::size_t>(ctx.group_capacity - 1));
        UserGroup group{input.user, {}, ctx.group_capacity};
        for (const auto& [id, vec] : friends) group.members.push_back(GroupMember{id, *vec});
        group.members.push_back(GroupMember{input.user, uv.vec});

        const AttentionResult att = attention(group, ctx.params->w_a_user);
        const Vec s_u =
            mlp_forward(ctx.params->user_mlp, concat(att.output, input.attrs), nullptr);
        for (const auto& f : *ctx.items) {
            const double y_hat =
                sigmoid(std::clamp(dot(s_u, f.s), -kLogitClip, kLogitClip));
            scored.emplace_back(fuse_popularity(y_hat, f.popularity), &f);
        }
    }

    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->item < b.second->item;
    });
    const std::size_t take = std::min(k, scored.size());
    list.items.reserve(take);
    list.scores.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        list.items.push_back(scored[i].second->item);
        list.scores.push_back(scored[i].first);
    }
    return list;
}

// -------- checkpoint --------

struct Checkpoint {
    ModelParams params;
    AttributeEncoder user_encoder, item_encoder;
    std::string optimizer = "adam";
};

namespace detail {

inline void write_mat(std::ostream& out, const Mat& m) {
    out << m.rows << ' ' << m.cols << '\n';
    for (std::size_t r = 0; r < m.rows; ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) out << (c ? " " : "") << format_double(row[c]);
        out << '\n';
    }
}

inline Mat read_mat(std::istream& in, const std::string& what) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("checkpoint: missing dims for " + what);
    std::size_t rows = 0, cols = 0;
    if (std::sscanf(line.c_str(), "%zu %zu", &rows, &cols) != 2)
        throw DataError("checkpoint: bad dims for " + what);
    Mat m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw DataError("checkpoint: truncated " + what);
        const auto f = split(line, ' ');
        if (f.size() != cols) throw DataError("checkpoint: bad row width in " + what);
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = parse_double(f[c]);
    }
    return m;
}

inline void write_vec(std::ostream& out, const Vec& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_double(v[i]);
    out << '\n';
}

inline Vec read_vec(std::istream& in, std::size_t size, const std::string& what) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("checkpoint: truncated " + what);
    const auto f = split(line, ' ');
    if (f.size() != size) throw DataError("checkpoint: bad vector width in " + what);
    Vec v(size);
    for (std::size_t i = 0; i < size; ++i) v[i] = parse_double(f[i]);
    return v;
}

inline void write_tower(std::ostream& out, const std::vector<MlpLayer>& tower) {
    out << "layers=" << tower.size() << '\n';
    for (const auto& l : tower) {
        write_mat(out, l.w);
        write_vec(out, l.b);
    }
}

inline std::vector<MlpLayer> read_tower(std::istream& in, const std::string& what) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("checkpoint: missing tower header for " + what);
    std::size_t layers = 0;
    if (std::sscanf(line.c_str(), "layers=%zu", &layers) != 1)
        throw DataError("checkpoint: bad tower header for " + what);
    std::vector<MlpLayer> tower;
    for (std::size_t i = 0; i < layers; ++i) {
        MlpLayer l;
        l.w = read_mat(in, what + " layer " + std::to_string(i));
        l.b = read_vec(in, l.w.rows, what + " bias " + std::to_string(i));
        tower.push_back(std::move(l));
    }
    return tower;
}

inline void expect_line(std::istream& in, const std::string& expected) {
    std::string line;
    if (!std::getline(in, line) || line != expected)
        throw DataError("checkpoint: expected '" + expected + "', got '" + line + "'");
}

}  // namespace detail

// Versioned line-oriented checkpoint with round-trip-exact decimals; the
// attribute encoders travel with the weights so serving needs no refit.
inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    auto out = detail::open_out(path);
    char hash_buf[32];
    out << "lhrm-checkpoint v1\n";
    out << "embed_dim=" << ckpt.params.embed_dim << " latent_dim=" << ckpt.params.latent_dim
        << '\n';
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(ckpt.user_encoder.schema_hash()));
    out << "user_schema_hash=" << hash_buf << '\n';
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(ckpt.item_encoder.schema_hash()));
    out << "item_schema_hash=" << hash_buf << '\n';
    out << "optimizer=" << ckpt.optimizer << '\n';
    out << "[user_encoder]\n";
    ckpt.user_encoder.serialize(out);
    out << "[item_encoder]\n";
    ckpt.item_encoder.serialize(out);
    out << "[w_a_user]\n";
    detail::write_mat(out, ckpt.params.w_a_user);
    out << "[w_a_item]\n";
    detail::write_mat(out, ckpt.params.w_a_item);
    out << "[user_mlp]\n";
    detail::write_tower(out, ckpt.params.user_mlp);
    out << "[item_mlp]\n";
    detail::write_tower(out, ckpt.params.item_mlp);
    out << "[end]\n";
}

inline Checkpoint load_checkpoint(const std::string& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "lhrm-checkpoint v1")
        throw DataError(path + ": not a v1 checkpoint");
    Checkpoint ckpt;
    if (!std::getline(in, line) ||
        std::sscanf(line.c_str(), "embed_dim=%d latent_dim=%d", &ckpt.params.embed_dim,
                    &ckpt.params.latent_dim) != 2)
        throw DataError(path + ": bad dims line");
    unsigned long long user_hash = 0, item_hash = 0;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "user_schema_hash=%llx", &user_hash) != 1)
        throw DataError(path + ": bad user schema hash");
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "item_schema_hash=%llx", &item_hash) != 1)
        throw DataError(path + ": bad item schema hash");
    if (!std::getline(in, line) || line.rfind("optimizer=", 0) != 0)
        throw DataError(path + ": bad optimizer line");
    ckpt.optimizer = line.substr(10);

    detail::expect_line(in, "[user_encoder]");
    ckpt.user_encoder = AttributeEncoder::deserialize(in);
    detail::expect_line(in, "[item_encoder]");
    ckpt.item_encoder = AttributeEncoder::deserialize(in);
    if (ckpt.user_encoder.schema_hash() != user_hash)
        throw DataError(path + ": user encoder does not match its schema hash");
    if (ckpt.item_encoder.schema_hash() != item_hash)
        throw DataError(path + ": item encoder does not match its schema hash");

    detail::expect_line(in, "[w_a_user]");
    ckpt.params.w_a_user = detail::read_mat(in, "w_a_user");
    detail::expect_line(in, "[w_a_item]");
    ckpt.params.w_a_item = detail::read_mat(in, "w_a_item");
    detail::expect_line(in, "[user_mlp]");
    ckpt.params.user_mlp = detail::read_tower(in, "user_mlp");
    detail::expect_line(in, "[item_mlp]");
    ckpt.params.item_mlp = detail::read_tower(in, "item_mlp");
    detail::expect_line(in, "[end]");
    return ckpt;
}

}  // namespace lhrm
