#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lhrm/common.hpp"
#include "lhrm/embedding.hpp"
#include "lhrm/kmeans.hpp"

namespace lhrm {

struct GroupMember {
    std::string id;
    Vec vec;
};

// Ordered member list with the target last; slots above members.size() up to
// capacity are zero-vector padding (excluded from attention by construction).
struct EmbeddingGroup {
    std::string target;
    std::vector<GroupMember> members;  // size in [1, capacity], target last
    int capacity = 0;                  // L

    int pad_count() const { return capacity - static_cast<int>(members.size()); }
};

using UserGroup = EmbeddingGroup;
using ItemGroup = EmbeddingGroup;

// Sparse binary user-item relationship matrix; a click wins over an
// impression for a repeated pair.
class InteractionMatrix {
public:
    void add(const std::string& user, const std::string& item, int label) {
        if (label != 0 && label != 1) throw ValidationError("interaction label must be 0 or 1");
        auto& cell = labels_[user][item];
        cell = std::max(cell, label);
        if (label == 1) clicked_[user].insert(item);
    }

    // Items with Y=1 for the user; empty set if the user is unknown.
    const std::set<std::string>& clicked_items(const std::string& user) const {
        static const std::set<std::string> empty;
        auto it = clicked_.find(user);
        return it == clicked_.end() ? empty : it->second;
    }

    std::size_t pair_count() const {
        std::size_t n = 0;
        for (const auto& [u, m] : labels_) n += m.size();
        return n;
    }

private:
    std::map<std::string, std::map<std::string, int>> labels_;
    std::map<std::string, std::set<std::string>> clicked_;
};

namespace detail {

// Nearest candidates to `anchor` by Euclidean distance, ties by id.
inline std::vector<std::pair<std::string, const Vec*>> nearest_by_distance(
    const Vec& anchor, const std::vector<std::pair<std::string, const Vec*>>& candidates,
    std::size_t count) {
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        order.emplace_back(squared_distance(*candidates[i].second, anchor), i);
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return candidates[a.second].first < candidates[b.second].first;
    });
    std::vector<std::pair<std::string, const Vec*>> out;
    for (std::size_t i = 0; i < order.size() && i < count; ++i)
        out.push_back(candidates[order[i].second]);
    return out;
}

}  // namespace detail

// E_u_g for a target user: up to L-1 co-clustered friends nearest to the
// target's vector (ties by user id), target appended last.
inline UserGroup build_user_group(const std::string& target, const ClusterModel& model,
                                  const std::map<std::string, Vec>& vectors, int L) {
    if (L < 1) throw ConfigError("user group: L must be >= 1");
    const int cluster = model.cluster_of(target);
    auto tv = vectors.find(target);
    if (tv == vectors.end()) throw LookupError("no vector for user: " + target);

    std::vector<std::pair<std::string, const Vec*>> candidates;
    for (const auto& [user, c] : model.assignment) {
        if (c != cluster || user == target) continue;
        auto it = vectors.find(user);
        if (it == vectors.end()) throw LookupError("no vector for user: " + user);
        candidates.emplace_back(user, &it->second);
    }
    auto friends =
        detail::nearest_by_distance(tv->second, candidates, static_cast<std::size_t>(L - 1));

    UserGroup g{target, {}, L};
    for (const auto& [id, vec] : friends) g.members.push_back(GroupMember{id, *vec});
    g.members.push_back(GroupMember{target, tv->second});
    return g;
}

// The n items most cosine-similar to the target (excluding it), ties by id.
inline std::vector<std::string> i2i_recall(const std::string& target_item,
                                           const EmbeddingTable& table, std::size_t n) {
    const auto target_vec = table.vec(target_item);  // throws LookupError if unknown
    if (n == 0) return {};

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table.tokens()[i] == target_item) continue;
        scored.emplace_back(cosine_similarity(table.vec(i), target_vec), i);
    }
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return table.tokens()[a.second] < table.tokens()[b.second];
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < scored.size() && i < n; ++i)
        out.push_back(table.tokens()[scored[i].second]);
    return out;
}

// E_i_g for a target item: candidates are the i2i recall plus items clicked
// by any member of `group`; candidates off the target's topic or without a
// vector are dropped; the L-1 most cosine-similar survivors (ties by id) are
// kept, target appended last.
inline ItemGroup build_item_group(const std::string& target_item, const UserGroup& group,
                                  const InteractionMatrix& interactions,
                                  const EmbeddingTable& table,
                                  const std::map<std::string, std::string>& topic_of, int L,
                                  int n_recall) {
    if (L < 1) throw ConfigError("item group: L must be >= 1");
    auto topic_it = topic_of.find(target_item);
    if (topic_it == topic_of.end()) throw DataError("target item has no topic: " + target_item);
    if (!table.contains(target_item))
        throw DataError("target item has no vector: " + target_item);
    const std::string& topic = topic_it->second;
    const auto target_vec = table.vec(target_item);

    std::set<std::string> candidates;
    for (auto& item : i2i_recall(target_item, table, static_cast<std::size_t>(n_recall)))
        candidates.insert(std::move(item));
    for (const auto& member : group.members)
        for (const auto& item : interactions.clicked_items(member.id)) candidates.insert(item);
    candidates.erase(target_item);

    std::vector<std::pair<double, std::string>> scored;
    for (const auto& item : candidates) {
        auto t = topic_of.find(item);
        if (t == topic_of.end() || t->second != topic) continue;
        if (!table.contains(item)) continue;
        scored.emplace_back(cosine_similarity(table.vec(item), target_vec), item);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    ItemGroup g{target_item, {}, L};
    for (std::size_t i = 0; i < scored.size() && i + 1 < static_cast<std::size_t>(L); ++i)
        g.members.push_back(GroupMember{scored[i].second, Vec(table.vec(scored[i].second).begin(),
                                                              table.vec(scored[i].second).end())});
    g.members.push_back(
        GroupMember{target_item, Vec(target_vec.begin(), target_vec.end())});
    return g;
}

// Groups persist as `<target_id>\t<member_id,...>\t<pad_count>`; vectors are
// resolved against an embedding/user-vector file at load time.
inline void write_groups(const std::string& path, const std::vector<EmbeddingGroup>& groups) {
    auto out = detail::open_out(path);
    for (const auto& g : groups) {
        out << g.target << '\t';
        for (std::size_t i = 0; i < g.members.size(); ++i) {
            if (i) out << ',';
            out << g.members[i].id;
        }
        out << '\t' << g.pad_count() << '\n';
    }
}

inline std::vector<EmbeddingGroup> read_groups(const std::string& path,
                                               const std::map<std::string, Vec>& vectors) {
    auto in = detail::open_in(path);
    std::vector<EmbeddingGroup> groups;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, '\t');
        if (f.size() != 3) throw DataError(path + ":" + std::to_string(lineno) + ": bad group line");
        EmbeddingGroup g;
        g.target = f[0];
        const auto ids = split(f[1], ',');
        for (const auto& id : ids) {
            auto it = vectors.find(id);
            if (it == vectors.end())
                throw DataError(path + ":" + std::to_string(lineno) + ": unresolved member " + id);
            g.members.push_back(GroupMember{id, it->second});
        }
        const int pad = static_cast<int>(parse_i64(f[2]));
        g.capacity = static_cast<int>(g.members.size()) + pad;
        if (g.members.empty() || g.members.back().id != g.target)
            throw DataError(path + ":" + std::to_string(lineno) + ": target must be last member");
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace lhrm
