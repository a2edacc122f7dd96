#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "lhrm/common.hpp"
#include "lhrm/events.hpp"
#include "lhrm/geohash.hpp"

namespace lhrm {

// Two-domain synthetic log generator. Users live in geographic cells; each
// cell carries a latent travel-topic preference that biases both their
// source-domain clicks (with the cell's coordinates attached) and their
// target-domain clicks. A held-out cold cohort gets no target-domain history
// before the test window, only ground-truth test clicks.
struct GenConfig {
    int n_users = 5000;
    int n_geo_cells = 50;
    int n_source_items = 2000;
    int n_target_items = 500;
    int n_topics = 10;
    int n_categories = 8;
    double preference_strength = 0.8;  // probability a click follows the cell topic
    double cold_fraction = 0.2;
    int source_events_per_user = 40;
    int target_clicks_per_user = 8;        // warm users, pre-test window
    int target_impressions_per_user = 12;  // negatives knob: impressions without a click
    int test_clicks_per_user = 5;          // cold users, test window
    std::int64_t warm_window_end = 80000;  // target history before this is "warm"
    std::int64_t window_end = 100000;
    std::uint64_t seed = 1;
};

struct GeoCell {
    GeoPoint point;  // every user of the cell shares this exact coordinate
    int topic = 0;
};

struct SyntheticData {
    std::vector<BehaviorEvent> events;
    std::vector<ItemCatalogEntry> catalog;
    std::vector<UserRecord> users;
    // Ground truth for tests; never persisted with the dataset.
    std::vector<GeoCell> cells;
    std::map<std::string, int> user_cell;
    std::vector<std::string> cold_users;
};

namespace detail {

inline std::string gen_id(const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%05d", prefix, i);
    return std::string(buf);
}

}  // namespace detail

inline SyntheticData generate_synthetic(const GenConfig& cfg) {
    if (cfg.n_users < 1 || cfg.n_geo_cells < 1 || cfg.n_source_items < 1 ||
        cfg.n_target_items < 1 || cfg.n_topics < 1 || cfg.n_categories < 1)
        throw ConfigError("gen: all counts must be >= 1");
    if (cfg.n_topics > cfg.n_target_items || cfg.n_topics > cfg.n_source_items)
        throw ConfigError("gen: n_topics exceeds the item count of a domain");
    if (cfg.preference_strength < 0.0 || cfg.preference_strength > 1.0)
        throw ConfigError("gen: preference_strength must be in [0, 1]");
    if (cfg.cold_fraction <= 0.0 || cfg.cold_fraction >= 1.0)
        throw ConfigError("gen: cold_fraction must be in (0, 1)");
    if (cfg.warm_window_end < 1 || cfg.window_end <= cfg.warm_window_end)
        throw ConfigError("gen: need 0 < warm_window_end < window_end");
    if (cfg.source_events_per_user < 1 || cfg.test_clicks_per_user < 1 ||
        cfg.target_clicks_per_user < 1 || cfg.target_impressions_per_user < 0)
        throw ConfigError("gen: per-user event counts out of range");
    const int n_cold = std::max(
        1, static_cast<int>(std::llround(cfg.cold_fraction * cfg.n_users)));
    if (n_cold >= cfg.n_users)
        throw ConfigError("gen: cold cohort would swallow every user");

    Rng rng(cfg.seed);
    SyntheticData data;

    for (int c = 0; c < cfg.n_geo_cells; ++c) {
        GeoPoint p(rng.uniform(-60.0, 60.0), rng.uniform(-170.0, 170.0));
        data.cells.push_back(GeoCell{p, c % cfg.n_topics});
    }

    // Source items: topic round-robin, one in four is non-travel noise.
    std::vector<std::vector<int>> source_by_topic(cfg.n_topics);
    std::vector<int> travel_items, noise_items;
    for (int i = 0; i < cfg.n_source_items; ++i) {
        ItemCatalogEntry e;
        e.item = detail::gen_id("s", i);
        e.domain = Domain::source;
        e.topic = "topic" + std::to_string(i % cfg.n_topics);
        e.category = "sc" + std::to_string(i % cfg.n_categories);
        e.travel_related = i % 4 != 3;
        if (e.travel_related) {
            source_by_topic[i % cfg.n_topics].push_back(i);
            travel_items.push_back(i);
        } else {
            noise_items.push_back(i);
        }
        data.catalog.push_back(std::move(e));
    }
    for (int t = 0; t < cfg.n_topics; ++t)
        if (source_by_topic[t].empty())
            throw ConfigError("gen: topic " + std::to_string(t) + " has no travel source items");

    // Target items: destination is the topic's city, category cycles
    // independently of topic.
    std::vector<std::vector<int>> target_by_topic(cfg.n_topics);
    for (int i = 0; i < cfg.n_target_items; ++i) {
        ItemCatalogEntry e;
        e.item = detail::gen_id("t", i);
        e.domain = Domain::target;
        e.topic = "topic" + std::to_string(i % cfg.n_topics);
        e.destination = "dest" + std::to_string(i % cfg.n_topics);
        e.category = "cat" + std::to_string((i / cfg.n_topics) % cfg.n_categories);
        target_by_topic[i % cfg.n_topics].push_back(i);
        data.catalog.push_back(std::move(e));
    }

    // Popularity skew within a pool: squaring the uniform draw biases the
    // pick toward the low indices, so every topic has its own "hot" items.
    auto biased_pick = [&](const std::vector<int>& pool) {
        const double u = rng.uniform01();
        auto idx = static_cast<std::size_t>(u * u * static_cast<double>(pool.size()));
        return pool[std::min(idx, pool.size() - 1)];
    };
    auto uniform_pick = [&](const std::vector<int>& pool) {
        return pool[rng.uniform_index(pool.size())];
    };
    auto stamp = [&](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(rng.uniform01() * static_cast<double>(hi - lo));
    };

    static const char* kDevices[] = {"android", "ios", "web"};
    static const char* kAges[] = {"18_24", "25_34", "35_44", "45_54", "55_plus"};

    for (int i = 0; i < cfg.n_users; ++i) {
        const std::string user = detail::gen_id("u", i);
        const bool cold = i >= cfg.n_users - n_cold;
        const int cell = static_cast<int>(rng.uniform_index(data.cells.size()));
        const int topic = data.cells[cell].topic;

        UserRecord rec;
        rec.user = user;
        rec.attrs["device"] = kDevices[rng.uniform_index(3)];
        rec.attrs["age_bucket"] = kAges[rng.uniform_index(5)];
        data.users.push_back(std::move(rec));
        data.user_cell[user] = cell;
        if (cold) data.cold_users.push_back(user);

        // Source-domain clicks, geo-tagged with the cell coordinate.
        for (int e = 0; e < cfg.source_events_per_user; ++e) {
            int item;
            const double r = rng.uniform01();
            if (r < cfg.preference_strength) {
                item = biased_pick(source_by_topic[topic]);
            } else if (noise_items.empty() || rng.uniform01() < 0.85) {
                item = uniform_pick(travel_items);
            } else {
                item = uniform_pick(noise_items);
            }
            BehaviorEvent ev;
            ev.user = user;
            ev.item = detail::gen_id("s", item);
            ev.domain = Domain::source;
            ev.action = Action::click;
            ev.timestamp = stamp(0, cfg.warm_window_end);
            if (rng.uniform01() < 0.9) ev.location = data.cells[cell].point;
            data.events.push_back(std::move(ev));
        }

        auto pick_target = [&]() {
            if (rng.uniform01() < cfg.preference_strength)
                return biased_pick(target_by_topic[topic]);
            return static_cast<int>(rng.uniform_index(cfg.n_target_items));
        };
        auto push_target = [&](Action action, int item, std::int64_t lo, std::int64_t hi) {
            BehaviorEvent ev;
            ev.user = user;
            ev.item = detail::gen_id("t", item);
            ev.domain = Domain::target;
            ev.action = action;
            ev.timestamp = stamp(lo, hi);
            data.events.push_back(std::move(ev));
        };

        if (!cold) {
            for (int e = 0; e < cfg.target_clicks_per_user; ++e)
                push_target(Action::click, pick_target(), 0, cfg.warm_window_end);
            for (int e = 0; e < cfg.target_impressions_per_user; ++e)
                push_target(Action::impression,
                            static_cast<int>(rng.uniform_index(cfg.n_target_items)), 0,
                            cfg.warm_window_end);
            // A slice of warm users stays active in the test window; the
            // splitter must keep them out of the cold cohort.
            if (rng.uniform01() < 0.1)
                push_target(Action::click, pick_target(), cfg.warm_window_end, cfg.window_end);
        } else {
            for (int e = 0; e < cfg.test_clicks_per_user; ++e)
                push_target(Action::click, pick_target(), cfg.warm_window_end, cfg.window_end);
        }
    }
    return data;
}

}  // namespace lhrm
