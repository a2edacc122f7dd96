#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lhrm/common.hpp"
#include "lhrm/events.hpp"
#include "lhrm/ranking.hpp"

namespace lhrm {

// Ground truth for one cold user: the items they clicked in the test window.
struct EvalCase {
    std::string user;
    std::set<std::string> target_items;  // non-empty
};

using RankedLists = std::map<std::string, RankedList>;

enum class HrAveraging { micro, macro };

namespace detail {

inline const RankedList& list_for(const EvalCase& c, const RankedLists& lists) {
    auto it = lists.find(c.user);
    if (it == lists.end()) throw EvalError("no ranked list for user: " + c.user);
    if (c.target_items.empty()) throw EvalError("empty target set for user: " + c.user);
    return it->second;
}

}  // namespace detail

// Hit rate at k. Micro: fraction of (case, target) pairs whose target shows
// up in the top-k of the case's list. Macro: per-case hit fraction, averaged
// over cases.
inline double hr_at_k(const std::vector<EvalCase>& cases, const RankedLists& lists, std::size_t k,
                      HrAveraging avg = HrAveraging::micro) {
    if (cases.empty()) throw EvalError("hr_at_k: no cases");
    std::size_t pair_hits = 0, pairs = 0;
    double macro_sum = 0.0;
    for (const auto& c : cases) {
        const RankedList& list = detail::list_for(c, lists);
        const std::size_t top = std::min(k, list.items.size());
        std::size_t hits = 0;
        for (std::size_t i = 0; i < top; ++i)
            if (c.target_items.count(list.items[i])) ++hits;
        pair_hits += hits;
        pairs += c.target_items.size();
        macro_sum += static_cast<double>(hits) / static_cast<double>(c.target_items.size());
    }
    if (avg == HrAveraging::macro) return macro_sum / static_cast<double>(cases.size());
    return static_cast<double>(pair_hits) / static_cast<double>(pairs);
}

// NDCG at k, averaged over cases. Per case, DCG sums 1/log2(p+1) over the
// 1-indexed hit positions p <= k; IDCG is the DCG of the ideal ordering of
// the case's full target set (not truncated at k), which keeps NDCG@k
// non-decreasing in k for fixed lists.
inline double ndcg_at_k(const std::vector<EvalCase>& cases, const RankedLists& lists,
                        std::size_t k) {
    if (cases.empty()) throw EvalError("ndcg_at_k: no cases");
    double sum = 0.0;
    for (const auto& c : cases) {
        const RankedList& list = detail::list_for(c, lists);
        const std::size_t top = std::min(k, list.items.size());
        double dcg = 0.0;
        for (std::size_t i = 0; i < top; ++i)
            if (c.target_items.count(list.items[i]))
                dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        double idcg = 0.0;
        for (std::size_t p = 1; p <= c.target_items.size(); ++p)
            idcg += 1.0 / std::log2(static_cast<double>(p) + 1.0);
        sum += dcg / idcg;
    }
    return sum / static_cast<double>(cases.size());
}

enum class MatchCondition { same_destination_and_category, same_destination, same_category };

inline std::string to_string(MatchCondition c) {
    switch (c) {
        case MatchCondition::same_destination_and_category:
            return "same_destination_and_category";
        case MatchCondition::same_destination:
            return "same_destination";
        default:
            return "same_category";
    }
}

// Relevance-conditioned hit rate: the fraction of cases where some item in
// the top-k satisfies the condition against at least one target item.
inline double conditioned_hr(const std::vector<EvalCase>& cases, const RankedLists& lists,
                             const std::map<std::string, ItemCatalogEntry>& catalog,
                             std::size_t k, MatchCondition condition) {
    if (cases.empty()) throw EvalError("conditioned_hr: no cases");
    auto entry = [&](const std::string& item) -> const ItemCatalogEntry& {
        auto it = catalog.find(item);
        if (it == catalog.end()) throw EvalError("item missing from catalog: " + item);
        return it->second;
    };
    auto matches = [&](const ItemCatalogEntry& a, const ItemCatalogEntry& b) {
        const bool dest = a.destination == b.destination;
        const bool cat = a.category == b.category;
        switch (condition) {
            case MatchCondition::same_destination_and_category:
                return dest && cat;
            case MatchCondition::same_destination:
                return dest;
            default:
                return cat;
        }
    };

    std::size_t case_hits = 0;
    for (const auto& c : cases) {
        const RankedList& list = detail::list_for(c, lists);
        std::vector<const ItemCatalogEntry*> targets;
        for (const auto& t : c.target_items) targets.push_back(&entry(t));
        const std::size_t top = std::min(k, list.items.size());
        bool hit = false;
        for (std::size_t i = 0; i < top && !hit; ++i) {
            const ItemCatalogEntry& rec = entry(list.items[i]);
            for (const auto* t : targets) {
                if (matches(rec, *t)) {
                    hit = true;
                    break;
                }
            }
        }
        if (hit) ++case_hits;
    }
    return static_cast<double>(case_hits) / static_cast<double>(cases.size());
}

// -------- non-personalized baselines (one shared list) --------

// Popularity ranking: items by descending train-window click count, ties by
// item id; catalog items with zero clicks rank after the clicked ones.
inline RankedList baseline_hot(const std::vector<LabeledInteraction>& train,
                               const std::vector<std::string>& catalog_items, std::size_t k) {
    if (train.empty()) throw ValidationError("baseline_hot: empty train interactions");
    std::map<std::string, double> counts;
    for (const auto& item : catalog_items) counts[item];  // zero-initialize
    for (const auto& t : train)
        if (t.label == 1 && counts.count(t.item)) counts[t.item] += 1.0;

    std::vector<std::pair<std::string, double>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    RankedList list;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
        list.items.push_back(ranked[i].first);
        list.scores.push_back(ranked[i].second);
    }
    return list;
}

// Greedy maximum user coverage: repeatedly pick the item that covers the most
// not-yet-covered training users (ties by click count, then id); once no item
// adds coverage, fill the remaining slots in Hot order. Scores are the
// descending rank positions (only the order is meaningful).
inline RankedList baseline_maxcov(const std::vector<LabeledInteraction>& train,
                                  const std::vector<std::string>& catalog_items, std::size_t k) {
    if (train.empty()) throw ValidationError("baseline_maxcov: empty train interactions");
    std::map<std::string, std::set<std::string>> clickers;
    std::map<std::string, std::size_t> counts;
    for (const auto& item : catalog_items) {
        clickers[item];
        counts[item];
    }
    for (const auto& t : train) {
        if (t.label != 1 || !clickers.count(t.item)) continue;
        clickers[t.item].insert(t.user);
        ++counts[t.item];
    }

    std::set<std::string> covered;
    std::set<std::string> chosen;
    std::vector<std::string> order;
    while (order.size() < k && order.size() < catalog_items.size()) {
        std::string best;
        std::size_t best_new = 0, best_count = 0;
        for (const auto& [item, users] : clickers) {
            if (chosen.count(item)) continue;
            std::size_t fresh = 0;
            for (const auto& u : users)
                if (!covered.count(u)) ++fresh;
            const std::size_t cnt = counts[item];
            if (fresh > best_new || (fresh == best_new && fresh > 0 &&
                                     (cnt > best_count || (cnt == best_count && item < best)))) {
                best = item;
                best_new = fresh;
                best_count = cnt;
            }
        }
        if (best_new == 0) break;  // nothing adds coverage; Hot fills the rest
        chosen.insert(best);
        order.push_back(best);
        covered.insert(clickers[best].begin(), clickers[best].end());
    }
    if (order.size() < k) {
        const RankedList hot = baseline_hot(train, catalog_items, catalog_items.size());
        for (const auto& item : hot.items) {
            if (order.size() >= k) break;
            if (!chosen.count(item)) {
                order.push_back(item);
                chosen.insert(item);
            }
        }
    }

    RankedList list;
    for (std::size_t i = 0; i < order.size(); ++i) {
        list.items.push_back(order[i]);
        list.scores.push_back(static_cast<double>(order.size() - i));
    }
    return list;
}

// -------- report --------

struct ModelMetrics {
    std::string model;
    std::vector<int> ks;
    Vec hr, ndcg;                      // parallel to ks
    Vec hr_dest_cat, hr_dest, hr_cat;  // conditioned hit rates, parallel to ks
};

inline ModelMetrics evaluate_model(const std::string& model, const std::vector<EvalCase>& cases,
                                   const RankedLists& lists,
                                   const std::map<std::string, ItemCatalogEntry>& catalog,
                                   const std::vector<int>& ks,
                                   HrAveraging avg = HrAveraging::micro) {
    ModelMetrics m;
    m.model = model;
    m.ks = ks;
    for (int k : ks) {
        if (k <= 0) throw ConfigError("eval: k must be positive");
        const auto ku = static_cast<std::size_t>(k);
        m.hr.push_back(hr_at_k(cases, lists, ku, avg));
        m.ndcg.push_back(ndcg_at_k(cases, lists, ku));
        m.hr_dest_cat.push_back(conditioned_hr(cases, lists, catalog, ku,
                                               MatchCondition::same_destination_and_category));
        m.hr_dest.push_back(
            conditioned_hr(cases, lists, catalog, ku, MatchCondition::same_destination));
        m.hr_cat.push_back(
            conditioned_hr(cases, lists, catalog, ku, MatchCondition::same_category));
    }
    return m;
}

namespace detail {

inline std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace detail

// Human-readable report: one Table-2-shaped block (rows = models, columns =
// HR@k then NDCG@k), then one block per relevance condition.
inline void write_report(const std::string& path, const std::vector<ModelMetrics>& rows,
                         std::size_t n_cases) {
    if (rows.empty()) throw EvalError("report: no model rows");
    auto out = detail::open_out(path);
    const std::vector<int>& ks = rows[0].ks;
    std::size_t name_w = 5;
    for (const auto& r : rows) name_w = std::max(name_w, r.model.size());
    const std::size_t col_w = 9;

    auto table = [&](const std::string& title,
                     auto&& column_header, auto&& cell) {
        out << title << '\n';
        out << detail::pad_right("model", name_w);
        for (std::size_t c = 0; c < column_header.size(); ++c)
            out << detail::pad_left(column_header[c], col_w);
        out << '\n';
        for (const auto& r : rows) {
            out << detail::pad_right(r.model, name_w);
            for (std::size_t c = 0; c < column_header.size(); ++c)
                out << detail::pad_left(format_fixed(cell(r, c), 4), col_w);
            out << '\n';
        }
    };

    std::vector<std::string> main_cols;
    for (int k : ks) main_cols.push_back("HR@" + std::to_string(k));
    for (int k : ks) main_cols.push_back("NDCG@" + std::to_string(k));
    out << "cold-start evaluation over " << n_cases << " cases\n\n";
    table("== ranking metrics ==", main_cols, [&](const ModelMetrics& r, std::size_t c) {
        return c < ks.size() ? r.hr[c] : r.ndcg[c - ks.size()];
    });

    std::vector<std::string> k_cols;
    for (int k : ks) k_cols.push_back("@" + std::to_string(k));
    out << '\n';
    table("== hit rate, same destination and category ==", k_cols,
          [](const ModelMetrics& r, std::size_t c) { return r.hr_dest_cat[c]; });
    out << '\n';
    table("== hit rate, same destination ==", k_cols,
          [](const ModelMetrics& r, std::size_t c) { return r.hr_dest[c]; });
    out << '\n';
    table("== hit rate, same category ==", k_cols,
          [](const ModelMetrics& r, std::size_t c) { return r.hr_cat[c]; });
}

// Machine-readable companion: line-oriented key=value with full precision.
inline void write_report_kv(const std::string& path, const std::vector<ModelMetrics>& rows,
                            std::size_t n_cases) {
    if (rows.empty()) throw EvalError("report: no model rows");
    auto out = detail::open_out(path);
    out << "cases=" << n_cases << '\n';
    out << "ks=";
    for (std::size_t i = 0; i < rows[0].ks.size(); ++i)
        out << (i ? "," : "") << rows[0].ks[i];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.ks.size(); ++i) {
            const std::string at = "@" + std::to_string(r.ks[i]);
            out << r.model << ".hr" << at << '=' << format_double(r.hr[i]) << '\n';
            out << r.model << ".ndcg" << at << '=' << format_double(r.ndcg[i]) << '\n';
            out << r.model << ".hr_same_destination_and_category" << at << '='
                << format_double(r.hr_dest_cat[i]) << '\n';
            out << r.model << ".hr_same_destination" << at << '=' << format_double(r.hr_dest[i])
                << '\n';
            out << r.model << ".hr_same_category" << at << '=' << format_double(r.hr_cat[i])
                << '\n';
        }
    }
}

// Parses the kv report back into (key -> value) for tests and tooling.
inline std::map<std::string, std::string> read_report_kv(const std::string& path) {
    auto in = detail::open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto p = line.find('=');
        if (p == std::string::npos) throw DataError(path + ": bad kv line: " + line);
        kv[line.substr(0, p)] = line.substr(p + 1);
    }
    return kv;
}

}  // namespace lhrm
