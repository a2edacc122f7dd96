#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lhrm/events.hpp"
#include "lhrm/geohash.hpp"

namespace lhrm {

// Time-ordered token sequence for one user in one domain. Source-domain
// sequences mix item tokens with geohash-5 location tokens.
struct TokenSequence {
    std::string owner;
    Domain domain = Domain::source;
    std::vector<std::string> tokens;
};

using TravelFilter = std::function<bool(const std::string& item)>;

// Builds per-user behaviour sequences from click events. Source-domain items
// failing the travel filter are dropped; each surviving source event appends
// its item token followed by the event's geohash token (location-free events
// contribute no geohash token). Target-domain sequences are plain item-token
// sequences. Empty sequences are not emitted. Output is ordered by user id,
// source sequence before target sequence.
inline std::vector<TokenSequence> build_sequences(const std::vector<BehaviorEvent>& events,
                                                  const TravelFilter& travel_filter,
                                                  int geo_precision = 5) {
    struct Slot {
        std::int64_t ts;
        std::size_t order;  // input order breaks timestamp ties
        const BehaviorEvent* e;
    };
    std::map<std::string, std::vector<Slot>> by_user;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.action != Action::click) continue;
        by_user[e.user].push_back(Slot{e.timestamp, i, &e});
    }

    std::vector<TokenSequence> out;
    for (auto& [user, slots] : by_user) {
        std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
            return a.ts != b.ts ? a.ts < b.ts : a.order < b.order;
        });
        TokenSequence src{user, Domain::source, {}};
        TokenSequence tgt{user, Domain::target, {}};
        for (const auto& s : slots) {
            const auto& e = *s.e;
            if (e.domain == Domain::source) {
                if (!travel_filter(e.item)) continue;
                src.tokens.push_back(e.item);
                if (e.location)
                    src.tokens.push_back(encode_geohash(*e.location, geo_precision).code);
            } else {
                tgt.tokens.push_back(e.item);
            }
        }
        if (!src.tokens.empty()) out.push_back(std::move(src));
        if (!tgt.tokens.empty()) out.push_back(std::move(tgt));
    }
    return out;
}

}  // namespace lhrm
