#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lhrm/common.hpp"
#include "lhrm/geohash.hpp"

namespace lhrm {

enum class Domain { source, target };
enum class Action { impression, click };

inline std::string to_string(Domain d) { return d == Domain::source ? "source" : "target"; }
inline std::string to_string(Action a) { return a == Action::click ? "click" : "impression"; }

inline Domain parse_domain(const std::string& s) {
    if (s == "source") return Domain::source;
    if (s == "target") return Domain::target;
    throw DataError("unknown domain '" + s + "'");
}

inline Action parse_action(const std::string& s) {
    if (s == "click") return Action::click;
    if (s == "impression") return Action::impression;
    throw DataError("unknown action '" + s + "'");
}

// One timestamped user action on an item; the raw log unit.
struct BehaviorEvent {
    std::string user;
    std::string item;
    Domain domain = Domain::source;
    Action action = Action::click;
    std::int64_t timestamp = 0;  // seconds, >= 0
    std::optional<GeoPoint> location;
};

struct ItemCatalogEntry {
    std::string item;
    Domain domain = Domain::target;
    std::string category;
    std::string destination;  // target-domain items
    std::string topic;
    bool travel_related = false;  // source-domain items
    double popularity = 0.0;      // derived from train clicks, normalized to [0, 1]
};

// Observable user attributes (the synthetic generator's ground truth stays
// out of this record).
struct UserRecord {
    std::string user;
    std::map<std::string, std::string> attrs;
};

// A labelled (user, item) pair from the split: 1 = click, 0 = impression-no-click.
struct LabeledInteraction {
    std::string user;
    std::string item;
    int label = 0;
    std::int64_t timestamp = 0;
};

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for reading: " + path);
    return in;
}

}  // namespace detail

// Event log: one event per line, tab-separated
//   user item domain action timestamp lat lon
// with empty lat/lon for location-free events.
inline void write_events(const std::string& path, const std::vector<BehaviorEvent>& events) {
    auto out = detail::open_out(path);
    for (const auto& e : events) {
        out << e.user << '\t' << e.item << '\t' << to_string(e.domain) << '\t'
            << to_string(e.action) << '\t' << e.timestamp << '\t';
        if (e.location) {
            out << format_double(e.location->lat) << '\t' << format_double(e.location->lon);
        } else {
            out << '\t';
        }
        out << '\n';
    }
}

inline std::vector<BehaviorEvent> read_events(const std::string& path) {
    auto in = detail::open_in(path);
    std::vector<BehaviorEvent> events;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, '\t');
        if (f.size() != 7)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 7 fields, got " +
                            std::to_string(f.size()));
        BehaviorEvent e;
        e.user = f[0];
        e.item = f[1];
        e.domain = parse_domain(f[2]);
        e.action = parse_action(f[3]);
        e.timestamp = parse_i64(f[4]);
        if (e.timestamp < 0)
            throw DataError(path + ":" + std::to_string(lineno) + ": negative timestamp");
        if (!f[5].empty() || !f[6].empty()) {
            if (f[5].empty() || f[6].empty())
                throw DataError(path + ":" + std::to_string(lineno) + ": partial location");
            e.location.emplace(parse_double(f[5]), parse_double(f[6]));
        }
        events.push_back(std::move(e));
    }
    return events;
}

// Catalog: item domain category destination topic travel_related popularity
inline void write_catalog(const std::string& path, const std::vector<ItemCatalogEntry>& items) {
    auto out = detail::open_out(path);
    for (const auto& it : items) {
        out << it.item << '\t' << to_string(it.domain) << '\t' << it.category << '\t'
            << it.destination << '\t' << it.topic << '\t' << (it.travel_related ? 1 : 0) << '\t'
            << format_double(it.popularity) << '\n';
    }
}

inline std::vector<ItemCatalogEntry> read_catalog(const std::string& path) {
    auto in = detail::open_in(path);
    std::vector<ItemCatalogEntry> items;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, '\t');
        if (f.size() != 7)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 7 fields");
        ItemCatalogEntry it;
        it.item = f[0];
        it.domain = parse_domain(f[1]);
        it.category = f[2];
        it.destination = f[3];
        it.topic = f[4];
        it.travel_related = f[5] == "1";
        it.popularity = parse_double(f[6]);
        items.push_back(std::move(it));
    }
    return items;
}

// Users: user key=value key=value ...
inline void write_users(const std::string& path, const std::vector<UserRecord>& users) {
    auto out = detail::open_out(path);
    for (const auto& u : users) {
        out << u.user;
        for (const auto& [k, v] : u.attrs) out << '\t' << k << '=' << v;
        out << '\n';
    }
}

inline std::vector<UserRecord> read_users(const std::string& path) {
    auto in = detail::open_in(path);
    std::vector<UserRecord> users;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, '\t');
        UserRecord u;
        u.user = f[0];
        for (std::size_t i = 1; i < f.size(); ++i) {
            const auto p = f[i].find('=');
            if (p == std::string::npos)
                throw DataError(path + ":" + std::to_string(lineno) + ": bad attribute field");
            u.attrs[f[i].substr(0, p)] = f[i].substr(p + 1);
        }
        users.push_back(std::move(u));
    }
    return users;
}

}  // namespace lhrm
