#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lhrm/config.hpp"
#include "lhrm/embedding.hpp"
#include "lhrm/events.hpp"
#include "lhrm/groups.hpp"
#include "lhrm/kmeans.hpp"
#include "lhrm/metrics.hpp"
#include "lhrm/model.hpp"
#include "lhrm/ranking.hpp"
#include "lhrm/sequences.hpp"
#include "lhrm/split.hpp"
#include "lhrm/synthetic.hpp"

namespace lhrm {

// Artifact layout inside one output directory; every stage reads and writes
// through these.
struct Paths {
    std::string dir;

    std::string config() const { return dir + "/config.txt"; }
    std::string events() const { return dir + "/events.tsv"; }
    std::string catalog() const { return dir + "/catalog.tsv"; }
    std::string users() const { return dir + "/users.tsv"; }
    std::string source_emb() const { return dir + "/source.emb"; }
    std::string target_emb() const { return dir + "/target.emb"; }
    std::string user_vectors() const { return dir + "/user_vectors.tsv"; }
    std::string clusters() const { return dir + "/clusters.tsv"; }
    std::string user_groups() const { return dir + "/user_groups.tsv"; }
    std::string item_groups() const { return dir + "/item_groups.tsv"; }
    std::string checkpoint() const { return dir + "/checkpoint.txt"; }
    std::string train_log() const { return dir + "/train_log.txt"; }
    std::string recommendations(const std::string& model) const {
        return dir + "/recommendations_" + model + ".tsv";
    }
    std::string report() const { return dir + "/report.txt"; }
    std::string report_kv() const { return dir + "/report.kv"; }
};

namespace detail {

inline std::map<std::string, ItemCatalogEntry> catalog_map(
    const std::vector<ItemCatalogEntry>& entries) {
    std::map<std::string, ItemCatalogEntry> m;
    for (const auto& e : entries) m[e.item] = e;
    return m;
}

inline std::map<std::string, Vec> table_as_map(const EmbeddingTable& table) {
    std::map<std::string, Vec> m;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto v = table.vec(i);
        m[table.tokens()[i]] = Vec(v.begin(), v.end());
    }
    return m;
}

inline std::vector<BehaviorEvent> events_before(const std::vector<BehaviorEvent>& events,
                                                std::int64_t cut) {
    std::vector<BehaviorEvent> out;
    for (const auto& e : events)
        if (e.timestamp < cut) out.push_back(e);
    return out;
}

inline TravelFilter travel_filter_from(const std::map<std::string, ItemCatalogEntry>& catalog) {
    return [&catalog](const std::string& item) {
        auto it = catalog.find(item);
        if (it == catalog.end()) throw DataError("event item not in catalog: " + item);
        return it->second.travel_related;
    };
}

// Per-(user, item) labels with the click-wins rule.
inline std::map<std::pair<std::string, std::string>, int> dedupe_labels(
    const std::vector<LabeledInteraction>& interactions) {
    std::map<std::pair<std::string, std::string>, int> labels;
    for (const auto& li : interactions) {
        auto& cell = labels[{li.user, li.item}];
        cell = std::max(cell, li.label);
    }
    return labels;
}

inline RawAttributes user_raw_attrs(const UserRecord& u) {
    RawAttributes r;
    for (const auto& [k, v] : u.attrs) r.cat[k] = v;
    return r;
}

inline RawAttributes item_raw_attrs(const ItemCatalogEntry& e) {
    RawAttributes r;
    r.cat["category"] = e.category;
    r.cat["destination"] = e.destination;
    r.cat["topic"] = e.topic;
    return r;
}

// Raw train-window click counts per item, and the same max-normalized to
// [0, 1] for Eq-6 fusion.
inline std::map<std::string, double> popularity_counts(
    const std::vector<LabeledInteraction>& train) {
    std::map<std::string, double> pop;
    for (const auto& li : train)
        if (li.label == 1) pop[li.item] += 1.0;
    return pop;
}

inline std::map<std::string, double> normalize_popularity(std::map<std::string, double> pop) {
    double mx = 0.0;
    for (const auto& [item, c] : pop) mx = std::max(mx, c);
    if (mx > 0.0)
        for (auto& [item, c] : pop) c /= mx;
    return pop;
}

}  // namespace detail

// ---- stages ----

inline void stage_gen_data(const RunConfig& cfg, const Paths& p) {
    GenConfig g = cfg.gen;
    g.seed = mix_seed(cfg.seed, "gen");
    const SyntheticData data = generate_synthetic(g);
    write_events(p.events(), data.events);
    write_catalog(p.catalog(), data.catalog);
    write_users(p.users(), data.users);
}

// SGNS over both domains on pre-test-window clicks, then pooled user vectors
// from the source embeddings. Only embeddable users are persisted.
inline void stage_pretrain(const RunConfig& cfg, const Paths& p) {
    const auto events = read_events(p.events());
    const auto catalog = detail::catalog_map(read_catalog(p.catalog()));
    const auto pre = detail::events_before(events, cfg.split.test_window_start);
    const auto filter = detail::travel_filter_from(catalog);
    auto sequences = build_sequences(pre, filter, cfg.geohash_precision);

    std::vector<TokenSequence> source_seqs, target_seqs;
    for (auto& s : sequences)
        (s.domain == Domain::source ? source_seqs : target_seqs).push_back(std::move(s));

    SgnsConfig sc = cfg.sgns;
    sc.seed = mix_seed(cfg.seed, "sgns-source");
    const EmbeddingTable source_table = train_skipgram(source_seqs, sc);
    source_table.save(p.source_emb());

    SgnsConfig tc = cfg.sgns;
    tc.seed = mix_seed(cfg.seed, "sgns-target");
    const EmbeddingTable target_table = train_skipgram(target_seqs, tc);
    target_table.save(p.target_emb());

    std::vector<UserVector> user_vectors;
    for (const auto& s : source_seqs) {
        UserVector uv = user_vector(s, source_table);
        if (uv.embeddable()) user_vectors.push_back(std::move(uv));
    }
    save_user_vectors(p.user_vectors(), user_vectors, source_table.dim());
}

// k-means over the warm users' source-side vectors. k is clamped to the
// number of distinct vectors so small datasets stay runnable.
inline void stage_cluster(const RunConfig& cfg, const Paths& p) {
    const auto events = read_events(p.events());
    const DatasetSplit split = split_dataset(events, cfg.split);
    const EmbeddingTable table = EmbeddingTable::load(p.user_vectors());

    const std::set<std::string> warm(split.warm_users.begin(), split.warm_users.end());
    std::vector<UserVector> vectors;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& user = table.tokens()[i];
        if (!warm.count(user)) continue;
        const auto v = table.vec(i);
        vectors.push_back(UserVector{user, Vec(v.begin(), v.end()), 1});
    }
    if (vectors.empty()) throw DataError("cluster: no warm user has a source vector");

    std::set<Vec> distinct;
    for (const auto& uv : vectors) distinct.insert(uv.vec);
    const int k = std::min<int>(cfg.cluster_k, static_cast<int>(distinct.size()));

    const ClusterModel model =
        kmeans(vectors, k, cfg.cluster_max_iters, mix_seed(cfg.seed, "kmeans"));
    model.save(p.clusters());
}

// User groups for every clustered user; item groups for every item in the
// target vocabulary, anchored at the item's most frequent train clicker.
inline void stage_build_groups(const RunConfig& cfg, const Paths& p) {
    const auto events = read_events(p.events());
    const auto catalog = read_catalog(p.catalog());
    const DatasetSplit split = split_dataset(events, cfg.split);
    const ClusterModel clusters = ClusterModel::load(p.clusters());
    const auto user_vecs = detail::table_as_map(EmbeddingTable::load(p.user_vectors()));

    std::vector<UserGroup> user_groups;
    std::map<std::string, const UserGroup*> group_of_user;
    for (const auto& [user, c] : clusters.assignment)
        user_groups.push_back(build_user_group(user, clusters, user_vecs, cfg.group_capacity));
    for (const auto& g : user_groups) group_of_user[g.target] = &g;
    write_groups(p.user_groups(), user_groups);

    const EmbeddingTable target_table = EmbeddingTable::load(p.target_emb());
    InteractionMatrix interactions;
    for (const auto& li : split.train) interactions.add(li.user, li.item, li.label);
    std::map<std::string, std::string> topic_of;
    for (const auto& e : catalog)
        if (e.domain == Domain::target) topic_of[e.item] = e.topic;

    // item -> (train clicker -> click count); the anchor is the heaviest
    // clicker (ties to the lowest user id via the map order).
    std::map<std::string, std::map<std::string, int>> clickers;
    for (const auto& li : split.train)
        if (li.label == 1) ++clickers[li.item][li.user];

    const UserGroup no_anchor{"", {}, cfg.group_capacity};
    std::vector<ItemGroup> item_groups;
    for (const auto& item : target_table.tokens()) {
        if (!topic_of.count(item)) continue;  // not a catalog target item
        const UserGroup* anchor = &no_anchor;
        auto cc = clickers.find(item);
        if (cc != clickers.end()) {
            const std::string* best = nullptr;
            int best_n = 0;
            for (const auto& [user, n] : cc->second) {
                if (n > best_n) {
                    best_n = n;
                    best = &user;
                }
            }
            if (best) {
                auto it = group_of_user.find(*best);
                if (it != group_of_user.end()) anchor = it->second;
            }
        }
        item_groups.push_back(build_item_group(item, *anchor, interactions, target_table,
                                               topic_of, cfg.group_capacity, cfg.group_n_recall));
    }
    if (item_groups.empty()) throw DataError("build-groups: no target item has a group");
    write_groups(p.item_groups(), item_groups);
}

// Assembles (user group, item group, attributes, label) samples from the
// split and trains the twin towers. Encoders are frozen into the checkpoint.
inline TrainReport stage_train(const RunConfig& cfg, const Paths& p) {
    const auto events = read_events(p.events());
    const auto catalog = read_catalog(p.catalog());
    const auto users = read_users(p.users());
    const DatasetSplit split = split_dataset(events, cfg.split);

    const auto user_vecs = detail::table_as_map(EmbeddingTable::load(p.user_vectors()));
    const auto item_vecs = detail::table_as_map(EmbeddingTable::load(p.target_emb()));
    const auto user_groups = read_groups(p.user_groups(), user_vecs);
    const auto item_groups = read_groups(p.item_groups(), item_vecs);
    std::map<std::string, const EmbeddingGroup*> ug_of, ig_of;
    for (const auto& g : user_groups) ug_of[g.target] = &g;
    for (const auto& g : item_groups) ig_of[g.target] = &g;

    std::vector<RawAttributes> user_rows;
    for (const auto& u : users) user_rows.push_back(detail::user_raw_attrs(u));
    const AttributeEncoder user_enc = AttributeEncoder::fit(user_rows);
    std::vector<RawAttributes> item_rows;
    for (const auto& e : catalog)
        if (e.domain == Domain::target) item_rows.push_back(detail::item_raw_attrs(e));
    const AttributeEncoder item_enc = AttributeEncoder::fit(item_rows);

    std::map<std::string, Vec> user_attr, item_attr;
    for (const auto& u : users) user_attr[u.user] = user_enc.encode(detail::user_raw_attrs(u));
    for (const auto& e : catalog)
        if (e.domain == Domain::target)
            item_attr[e.item] = item_enc.encode(detail::item_raw_attrs(e));

    std::size_t skipped_train = 0, skipped_val = 0;
    auto assemble = [&](const std::vector<LabeledInteraction>& part, std::size_t& skipped) {
        std::vector<SampleView> samples;
        for (const auto& [key, label] : detail::dedupe_labels(part)) {
            auto ug = ug_of.find(key.first);
            auto ig = ig_of.find(key.second);
            auto ua = user_attr.find(key.first);
            auto ia = item_attr.find(key.second);
            if (ug == ug_of.end() || ig == ig_of.end() || ua == user_attr.end() ||
                ia == item_attr.end()) {
                ++skipped;
                continue;
            }
            samples.push_back(SampleView{ug->second, ig->second, &ua->second, &ia->second, label});
        }
        return samples;
    };
    const auto train_samples = assemble(split.train, skipped_train);
    const auto val_samples = assemble(split.validation, skipped_val);
    if (train_samples.empty()) throw DataError("train: no usable training samples");

    ModelParams params = ModelParams::init(
        cfg.sgns.dim, static_cast<int>(user_enc.dim()), static_cast<int>(item_enc.dim()),
        cfg.model_hidden, cfg.model_latent_dim, mix_seed(cfg.seed, "model-init"));
    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(cfg.seed, "train");
    TrainReport report;
    params = train(train_samples, val_samples, std::move(params), tc, &report);

    save_checkpoint(p.checkpoint(), Checkpoint{std::move(params), user_enc, item_enc,
                                               tc.optimizer});

    auto log = detail::open_out(p.train_log());
    log << "train_samples=" << train_samples.size() << " val_samples=" << val_samples.size()
        << " skipped_train=" << skipped_train << " skipped_val=" << skipped_val << '\n';
    for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
        log << "epoch=" << e << " train_loss=" << format_double(report.train_loss[e]);
        if (e < report.val_loss.size()) log << " val_loss=" << format_double(report.val_loss[e]);
        log << '\n';
    }
    log << "best_epoch=" << report.best_epoch << '\n';
    if (report.single_label_warning) log << "warning=single_label_training_set\n";
    return report;
}

// Writes top-k lists for every cold user under the named model. Items the
// model cannot score (no train-window clicks, hence no embedding/group) fill
// the tail with score zero in id order.
inline void stage_recommend(const RunConfig& cfg, const Paths& p, const std::string& model) {
    const auto events = read_events(p.events());
    const auto catalog = read_catalog(p.catalog());
    const DatasetSplit split = split_dataset(events, cfg.split);
    const std::size_t k_max = static_cast<std::size_t>(
        *std::max_element(cfg.eval_ks.begin(), cfg.eval_ks.end()));

    std::vector<std::string> target_items;
    for (const auto& e : catalog)
        if (e.domain == Domain::target) target_items.push_back(e.item);
    std::sort(target_items.begin(), target_items.end());

    auto fill_tail = [&](RankedList& l) {
        if (l.items.size() >= k_max) return;
        std::set<std::string> have(l.items.begin(), l.items.end());
        for (const auto& item : target_items) {
            if (l.items.size() >= k_max) break;
            if (have.count(item)) continue;
            l.items.push_back(item);
            l.scores.push_back(0.0);
        }
    };

    std::vector<RankedList> lists;
    if (model == "hot" || model == "maxcov") {
        RankedList shared = model == "hot" ? baseline_hot(split.train, target_items, k_max)
                                           : baseline_maxcov(split.train, target_items, k_max);
        for (const auto& c : split.test) {
            RankedList l = shared;
            l.user = c.user;
            validate_ranked_list(l);
            lists.push_back(std::move(l));
        }
    } else if (model == "lhrm") {
        const Checkpoint ckpt = load_checkpoint(p.checkpoint());
        const EmbeddingTable source_table = EmbeddingTable::load(p.source_emb());
        const EmbeddingTable target_table = EmbeddingTable::load(p.target_emb());
        const ClusterModel clusters = ClusterModel::load(p.clusters());
        const auto user_vecs = detail::table_as_map(EmbeddingTable::load(p.user_vectors()));
        const auto item_groups = read_groups(p.item_groups(), detail::table_as_map(target_table));

        const auto popularity =
            detail::normalize_popularity(detail::popularity_counts(split.train));
        std::map<std::string, Vec> item_attr;
        for (const auto& e : catalog)
            if (e.domain == Domain::target)
                item_attr[e.item] = ckpt.item_encoder.encode(detail::item_raw_attrs(e));
        const auto factors =
            compute_item_factors(item_groups, item_attr, popularity, ckpt.params);

        std::vector<std::vector<std::string>> members(clusters.k);
        for (const auto& [user, c] : clusters.assignment) members[c].push_back(user);

        const auto pre = detail::events_before(events, cfg.split.test_window_start);
        const auto cmap = detail::catalog_map(catalog);
        const auto filter = detail::travel_filter_from(cmap);
        const auto sequences = build_sequences(pre, filter, cfg.geohash_precision);
        std::map<std::string, const TokenSequence*> source_seq;
        for (const auto& s : sequences)
            if (s.domain == Domain::source) source_seq[s.owner] = &s;

        std::map<std::string, const UserRecord*> user_rec;
        const auto users = read_users(p.users());
        for (const auto& u : users) user_rec[u.user] = &u;

        ColdStartContext ctx;
        ctx.params = &ckpt.params;
        ctx.source_table = &source_table;
        ctx.clusters = &clusters;
        ctx.cluster_members = &members;
        ctx.user_vectors = &user_vecs;
        ctx.items = &factors;
        ctx.group_capacity = cfg.group_capacity;

        for (const auto& c : split.test) {
            ColdStartInput input;
            input.user = c.user;
            auto s = source_seq.find(c.user);
            if (s != source_seq.end()) input.source_tokens = s->second->tokens;
            RawAttributes raw;
            auto u = user_rec.find(c.user);
            if (u != user_rec.end()) raw = detail::user_raw_attrs(*u->second);
            input.attrs = ckpt.user_encoder.encode(raw);
            RankedList l = cold_start_recommend(input, ctx, k_max);
            fill_tail(l);
            validate_ranked_list(l);
            lists.push_back(std::move(l));
        }
    } else {
        throw ConfigError("unknown model '" + model + "' (expected lhrm, hot, or maxcov)");
    }
    write_recommendations(p.recommendations(model), lists);
}

inline std::vector<ModelMetrics> stage_eval(const RunConfig& cfg, const Paths& p,
                                            const std::vector<std::string>& models) {
    const auto events = read_events(p.events());
    const auto cmap = detail::catalog_map(read_catalog(p.catalog()));
    const DatasetSplit split = split_dataset(events, cfg.split);

    std::vector<ModelMetrics> rows;
    for (const auto& model : models) {
        RankedLists lists;
        for (auto& l : read_recommendations(p.recommendations(model))) {
            validate_ranked_list(l);
            lists[l.user] = std::move(l);
        }
        rows.push_back(
            evaluate_model(model, split.test, lists, cmap, cfg.eval_ks, cfg.eval_averaging));
    }
    write_report(p.report(), rows, split.test.size());
    write_report_kv(p.report_kv(), rows, split.test.size());
    return rows;
}

// Reraises stage errors with the stage name attached, preserving the error
// type (and with it the CLI exit code).
template <typename F>
inline void run_stage(const char* name, F&& f) {
    auto tag = [&](const char* what) { return std::string(name) + ": " + what; };
    try {
        f();
    } catch (const ConfigError& e) {
        throw ConfigError(tag(e.what()));
    } catch (const ShapeError& e) {
        throw ShapeError(tag(e.what()));
    } catch (const ValidationError& e) {
        throw ValidationError(tag(e.what()));
    } catch (const LookupError& e) {
        throw LookupError(tag(e.what()));
    } catch (const EvalError& e) {
        throw EvalError(tag(e.what()));
    } catch (const DataError& e) {
        throw DataError(tag(e.what()));
    } catch (const Error& e) {
        throw Error(tag(e.what()));
    }
}

// The whole Algorithm-1 pipeline on one synthetic dataset. Returns the final
// metric rows (lhrm, hot, maxcov); every intermediate artifact lands in
// out_dir. Byte-identical outputs for identical (config, seed).
inline std::vector<ModelMetrics> run_end_to_end(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    const Paths p{out_dir};
    cfg.save(p.config());

    run_stage("gen-data", [&] { stage_gen_data(cfg, p); });
    run_stage("pretrain", [&] { stage_pretrain(cfg, p); });
    run_stage("cluster", [&] { stage_cluster(cfg, p); });
    run_stage("build-groups", [&] { stage_build_groups(cfg, p); });
    run_stage("train", [&] { stage_train(cfg, p); });
    run_stage("recommend", [&] {
        stage_recommend(cfg, p, "lhrm");
        stage_recommend(cfg, p, "hot");
        stage_recommend(cfg, p, "maxcov");
    });
    std::vector<ModelMetrics> rows;
    run_stage("eval", [&] { rows = stage_eval(cfg, p, {"lhrm", "hot", "maxcov"}); });
    return rows;
}

}  // namespace lhrm
