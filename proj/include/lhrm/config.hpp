#pragma once

#include <map>
#include <string>
#include <vector>

#include "lhrm/common.hpp"
#include "lhrm/events.hpp"
#include "lhrm/embedding.hpp"
#include "lhrm/metrics.hpp"
#include "lhrm/model.hpp"
#include "lhrm/split.hpp"
#include "lhrm/synthetic.hpp"

namespace lhrm {

// Every hyperparameter of every stage, governed by one key=value file.
// CLI flags override file values; the seed must come from one of the two.
struct RunConfig {
    std::uint64_t seed = 1;
    int geohash_precision = 5;
    GenConfig gen;
    SplitConfig split;
    SgnsConfig sgns;  // one config for both domains; embed_dim == sgns.dim
    int cluster_k = 50;
    int cluster_max_iters = 50;
    int group_capacity = 10;  // L
    int group_n_recall = 20;  // i2i candidates per item
    std::vector<int> model_hidden = {64, 32};
    int model_latent_dim = 32;
    TrainConfig train;
    std::vector<int> eval_ks = {30, 50, 100, 200};
    HrAveraging eval_averaging = HrAveraging::micro;

    void set(const std::string& key, const std::string& value);
    std::vector<std::pair<std::string, std::string>> to_kv() const;
    void validate() const;

    void save(const std::string& path) const {
        auto out = detail::open_out(path);
        for (const auto& [k, v] : to_kv()) out << k << '=' << v << '\n';
    }

    // Parses `key=value` lines over the defaults; '#' starts a comment.
    static RunConfig load(const std::string& path) {
        auto in = detail::open_in(path);
        RunConfig cfg;
        std::string line;
        std::size_t lineno = 0;
        bool have_seed = false;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
            const std::string key = trim(line.substr(0, eq));
            cfg.set(key, trim(line.substr(eq + 1)));
            if (key == "seed") have_seed = true;
        }
        if (!have_seed) throw ConfigError(path + ": config must set seed");
        cfg.validate();
        return cfg;
    }
};

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& part : split(s, ','))
        out.push_back(static_cast<int>(parse_i64(trim(part))));
    return out;
}

inline std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
    auto as_int = [&] { return static_cast<int>(parse_i64(value)); };
    auto as_i64 = [&] { return parse_i64(value); };
    auto as_real = [&] { return parse_double(value); };
    try {
        if (key == "seed") seed = static_cast<std::uint64_t>(as_i64());
        else if (key == "geohash.precision") geohash_precision = as_int();
        else if (key == "gen.n_users") gen.n_users = as_int();
        else if (key == "gen.n_geo_cells") gen.n_geo_cells = as_int();
        else if (key == "gen.n_source_items") gen.n_source_items = as_int();
        else if (key == "gen.n_target_items") gen.n_target_items = as_int();
        else if (key == "gen.n_topics") gen.n_topics = as_int();
        else if (key == "gen.n_categories") gen.n_categories = as_int();
        else if (key == "gen.preference_strength") gen.preference_strength = as_real();
        else if (key == "gen.cold_fraction") gen.cold_fraction = as_real();
        else if (key == "gen.source_events_per_user") gen.source_events_per_user = as_int();
        else if (key == "gen.target_clicks_per_user") gen.target_clicks_per_user = as_int();
        else if (key == "gen.target_impressions_per_user")
            gen.target_impressions_per_user = as_int();
        else if (key == "gen.test_clicks_per_user") gen.test_clicks_per_user = as_int();
        else if (key == "gen.warm_window_end") gen.warm_window_end = as_i64();
        else if (key == "gen.window_end") gen.window_end = as_i64();
        else if (key == "split.train_window_start") split.train_window_start = as_i64();
        else if (key == "split.test_window_start") split.test_window_start = as_i64();
        else if (key == "split.window_end") split.window_end = as_i64();
        else if (key == "split.train_fraction") split.train_fraction = as_real();
        else if (key == "sgns.dim") sgns.dim = as_int();
        else if (key == "sgns.window") sgns.window = as_int();
        else if (key == "sgns.negatives") sgns.negatives = as_int();
        else if (key == "sgns.epochs") sgns.epochs = as_int();
        else if (key == "sgns.learning_rate") sgns.learning_rate = as_real();
        else if (key == "sgns.min_count") sgns.min_count = as_int();
        else if (key == "cluster.k") cluster_k = as_int();
        else if (key == "cluster.max_iters") cluster_max_iters = as_int();
        else if (key == "group.capacity") group_capacity = as_int();
        else if (key == "group.n_recall") group_n_recall = as_int();
        else if (key == "model.hidden") model_hidden = detail::parse_int_list(value);
        else if (key == "model.latent_dim") model_latent_dim = as_int();
        else if (key == "train.epochs") train.epochs = as_int();
        else if (key == "train.batch_size") train.batch_size = as_int();
        else if (key == "train.learning_rate") train.learning_rate = as_real();
        else if (key == "train.optimizer") train.optimizer = value;
        else if (key == "eval.ks") eval_ks = detail::parse_int_list(value);
        else if (key == "eval.averaging") {
            if (value == "micro") eval_averaging = HrAveraging::micro;
            else if (value == "macro") eval_averaging = HrAveraging::macro;
            else throw ConfigError("eval.averaging must be micro or macro, got '" + value + "'");
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const DataError& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

inline std::vector<std::pair<std::string, std::string>> RunConfig::to_kv() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("seed", std::to_string(seed));
    kv.emplace_back("geohash.precision", std::to_string(geohash_precision));
    kv.emplace_back("gen.n_users", std::to_string(gen.n_users));
    kv.emplace_back("gen.n_geo_cells", std::to_string(gen.n_geo_cells));
    kv.emplace_back("gen.n_source_items", std::to_string(gen.n_source_items));
    kv.emplace_back("gen.n_target_items", std::to_string(gen.n_target_items));
    kv.emplace_back("gen.n_topics", std::to_string(gen.n_topics));
    kv.emplace_back("gen.n_categories", std::to_string(gen.n_categories));
    kv.emplace_back("gen.preference_strength", format_double(gen.preference_strength));
    kv.emplace_back("gen.cold_fraction", format_double(gen.cold_fraction));
    kv.emplace_back("gen.source_events_per_user", std::to_string(gen.source_events_per_user));
    kv.emplace_back("gen.target_clicks_per_user", std::to_string(gen.target_clicks_per_user));
    kv.emplace_back("gen.target_impressions_per_user",
                    std::to_string(gen.target_impressions_per_user));
    kv.emplace_back("gen.test_clicks_per_user", std::to_string(gen.test_clicks_per_user));
    kv.emplace_back("gen.warm_window_end", std::to_string(gen.warm_window_end));
    kv.emplace_back("gen.window_end", std::to_string(gen.window_end));
    kv.emplace_back("split.train_window_start", std::to_string(split.train_window_start));
    kv.emplace_back("split.test_window_start", std::to_string(split.test_window_start));
    kv.emplace_back("split.window_end", std::to_string(split.window_end));
    kv.emplace_back("split.train_fraction", format_double(split.train_fraction));
    kv.emplace_back("sgns.dim", std::to_string(sgns.dim));
    kv.emplace_back("sgns.window", std::to_string(sgns.window));
    kv.emplace_back("sgns.negatives", std::to_string(sgns.negatives));
    kv.emplace_back("sgns.epochs", std::to_string(sgns.epochs));
    kv.emplace_back("sgns.learning_rate", format_double(sgns.learning_rate));
    kv.emplace_back("sgns.min_count", std::to_string(sgns.min_count));
    kv.emplace_back("cluster.k", std::to_string(cluster_k));
    kv.emplace_back("cluster.max_iters", std::to_string(cluster_max_iters));
    kv.emplace_back("group.capacity", std::to_string(group_capacity));
    kv.emplace_back("group.n_recall", std::to_string(group_n_recall));
    kv.emplace_back("model.hidden", detail::join_ints(model_hidden));
    kv.emplace_back("model.latent_dim", std::to_string(model_latent_dim));
    kv.emplace_back("train.epochs", std::to_string(train.epochs));
    kv.emplace_back("train.batch_size", std::to_string(train.batch_size));
    kv.emplace_back("train.learning_rate", format_double(train.learning_rate));
    kv.emplace_back("train.optimizer", train.optimizer);
    kv.emplace_back("eval.ks", detail::join_ints(eval_ks));
    kv.emplace_back("eval.averaging",
                    eval_averaging == HrAveraging::micro ? "micro" : "macro");
    return kv;
}

inline void RunConfig::validate() const {
    if (geohash_precision < 1 || geohash_precision > kMaxGeohashPrecision)
        throw ConfigError("geohash.precision must be in [1, 12]");
    if (sgns.dim <= 0) throw ConfigError("sgns.dim must be positive");
    if (cluster_k < 1) throw ConfigError("cluster.k must be >= 1");
    if (cluster_max_iters < 1) throw ConfigError("cluster.max_iters must be >= 1");
    if (group_capacity < 1) throw ConfigError("group.capacity must be >= 1");
    if (group_n_recall < 0) throw ConfigError("group.n_recall must be >= 0");
    if (model_latent_dim < 1) throw ConfigError("model.latent_dim must be >= 1");
    for (int h : model_hidden)
        if (h < 1) throw ConfigError("model.hidden widths must be >= 1");
    if (train.optimizer != "adam" && train.optimizer != "sgd")
        throw ConfigError("train.optimizer must be adam or sgd");
    if (eval_ks.empty()) throw ConfigError("eval.ks must be non-empty");
    for (int k : eval_ks)
        if (k < 1) throw ConfigError("eval.ks entries must be >= 1");
}

}  // namespace lhrm
