#pragma once

#include <set>
#include <string>
#include <vector>

#include "lhrm/common.hpp"
#include "lhrm/events.hpp"

namespace lhrm {

// Scored, ordered candidate items for one user, best first.
struct RankedList {
    std::string user;
    std::vector<std::string> items;
    Vec scores;              // parallel to items, non-increasing
    bool fallback_hot = false;  // set when the user had no in-vocabulary tokens
};

inline void validate_ranked_list(const RankedList& list) {
    if (list.items.size() != list.scores.size())
        throw ValidationError("ranked list: items/scores length mismatch");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        if (!seen.insert(list.items[i]).second)
            throw ValidationError("ranked list: duplicate item " + list.items[i]);
        if (i > 0 && list.scores[i] > list.scores[i - 1])
            throw ValidationError("ranked list: scores increase at rank " + std::to_string(i + 1));
    }
}

// Recommendation file: `user \t fallback(0|1) \t item=score,item=score,...`
inline void write_recommendations(const std::string& path, const std::vector<RankedList>& lists) {
    auto out = detail::open_out(path);
    for (const auto& l : lists) {
        out << l.user << '\t' << (l.fallback_hot ? 1 : 0) << '\t';
        for (std::size_t i = 0; i < l.items.size(); ++i) {
            if (i) out << ',';
            out << l.items[i] << '=' << format_double(l.scores[i]);
        }
        out << '\n';
    }
}

inline std::vector<RankedList> read_recommendations(const std::string& path) {
    auto in = detail::open_in(path);
    std::vector<RankedList> lists;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, '\t');
        if (f.size() != 3)
            throw DataError(path + ":" + std::to_string(lineno) + ": bad recommendation line");
        RankedList l;
        l.user = f[0];
        l.fallback_hot = f[1] == "1";
        if (!f[2].empty()) {
            for (const auto& pair : split(f[2], ',')) {
                const auto p = pair.rfind('=');
                if (p == std::string::npos)
                    throw DataError(path + ":" + std::to_string(lineno) + ": bad item=score pair");
                l.items.push_back(pair.substr(0, p));
                l.scores.push_back(parse_double(pair.substr(p + 1)));
            }
        }
        lists.push_back(std::move(l));
    }
    return lists;
}

}  // namespace lhrm
