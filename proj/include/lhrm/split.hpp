#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "lhrm/common.hpp"
#include "lhrm/events.hpp"
#include "lhrm/metrics.hpp"

namespace lhrm {

struct SplitConfig {
    std::int64_t train_window_start = 0;
    std::int64_t test_window_start = 80000;  // the cold/warm boundary
    std::int64_t window_end = 100000;
    double train_fraction = 0.8;  // time share of the pre-test window used for training
};

// Target-domain supervision partitions. Warm users' pre-test-window events
// split by time into train/validation; cold users (no target-domain history
// before the test window) supply the test cases.
struct DatasetSplit {
    std::vector<LabeledInteraction> train;
    std::vector<LabeledInteraction> validation;
    std::vector<EvalCase> test;
    std::vector<std::string> warm_users;  // users with pre-window target history
    std::vector<std::string> cold_users;  // test cohort, sorted
    std::vector<std::string> demoted;     // test-window clickers rejected for warm history
};

inline DatasetSplit split_dataset(const std::vector<BehaviorEvent>& events,
                                  const SplitConfig& cfg) {
    if (!(cfg.train_window_start < cfg.test_window_start &&
          cfg.test_window_start < cfg.window_end))
        throw ConfigError("split: need train_window_start < test_window_start < window_end");
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
        throw ConfigError("split: train_fraction must be in (0, 1)");

    const double span = static_cast<double>(cfg.test_window_start - cfg.train_window_start);
    const std::int64_t val_start =
        cfg.train_window_start + static_cast<std::int64_t>(cfg.train_fraction * span);

    std::map<std::string, std::vector<const BehaviorEvent*>> pre, post;
    for (const auto& e : events) {
        if (e.timestamp < cfg.train_window_start || e.timestamp >= cfg.window_end)
            throw DataError("split: event outside the configured window, user " + e.user +
                            " ts " + std::to_string(e.timestamp));
        if (e.domain != Domain::target) continue;
        (e.timestamp < cfg.test_window_start ? pre : post)[e.user].push_back(&e);
    }

    DatasetSplit out;
    for (const auto& [user, evs] : pre) {
        out.warm_users.push_back(user);
        for (const auto* e : evs) {
            LabeledInteraction li{user, e->item, e->action == Action::click ? 1 : 0,
                                  e->timestamp};
            (e->timestamp < val_start ? out.train : out.validation).push_back(std::move(li));
        }
    }
    // Disjointness invariant: no (user, item, timestamp) triple in both
    // supervision lists (true by the time cut; asserted, not assumed).
    std::set<std::tuple<std::string, std::string, std::int64_t>> train_triples;
    for (const auto& li : out.train) train_triples.insert({li.user, li.item, li.timestamp});
    for (const auto& li : out.validation)
        if (train_triples.count({li.user, li.item, li.timestamp}))
            throw DataError("split: triple in both train and validation: " + li.user + " " +
                            li.item + " " + std::to_string(li.timestamp));

    for (const auto& [user, evs] : post) {
        EvalCase c;
        c.user = user;
        for (const auto* e : evs)
            if (e->action == Action::click) c.target_items.insert(e->item);
        if (c.target_items.empty()) continue;  // impressions only: nothing to evaluate
        if (pre.count(user)) {
            out.demoted.push_back(user);  // has warm history, not a cold user
            continue;
        }
        out.cold_users.push_back(user);
        out.test.push_back(std::move(c));
    }
    if (out.test.empty())
        throw ConfigError("split: empty cold cohort (no cold users with test-window clicks)");
    return out;
}

}  // namespace lhrm
