#pragma once

#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lhrm/common.hpp"
#include "lhrm/embedding.hpp"

namespace lhrm {

struct ClusterModel {
    int k = 0;
    int dim = 0;
    std::vector<Vec> centroids;
    std::map<std::string, int> assignment;  // user -> cluster index
    std::vector<double> wcss_history;       // within-cluster sum of squares per iteration

    // Nearest centroid by Euclidean distance, ties to the lowest index.
    int assign(std::span<const double> vec) const {
        if (static_cast<int>(vec.size()) != dim) throw ShapeError("assign: dim mismatch");
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            const double d = squared_distance(centroids[c], vec);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        return best;
    }

    int cluster_of(const std::string& user) const {
        auto it = assignment.find(user);
        if (it == assignment.end()) throw LookupError("user not in cluster model: " + user);
        return it->second;
    }

    void save(const std::string& path) const {
        auto out = detail::open_out(path);
        out << "k=" << k << " dim=" << dim << '\n';
        for (int c = 0; c < k; ++c) {
            out << "centroid " << c;
            for (double v : centroids[c]) out << ' ' << format_double(v);
            out << '\n';
        }
        for (const auto& [user, c] : assignment) out << "assign " << user << ' ' << c << '\n';
    }

    static ClusterModel load(const std::string& path) {
        auto in = detail::open_in(path);
        std::string line;
        if (!std::getline(in, line)) throw DataError(path + ": empty cluster file");
        ClusterModel m;
        if (std::sscanf(line.c_str(), "k=%d dim=%d", &m.k, &m.dim) != 2)
            throw DataError(path + ": bad cluster header: " + line);
        m.centroids.assign(m.k, Vec(m.dim, 0.0));
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto f = split(line, ' ');
            if (f[0] == "centroid") {
                if (static_cast<int>(f.size()) != m.dim + 2)
                    throw DataError(path + ": bad centroid line");
                const int c = static_cast<int>(parse_i64(f[1]));
                for (int j = 0; j < m.dim; ++j) m.centroids[c][j] = parse_double(f[j + 2]);
            } else if (f[0] == "assign") {
                if (f.size() != 3) throw DataError(path + ": bad assign line");
                m.assignment[f[1]] = static_cast<int>(parse_i64(f[2]));
            } else {
                throw DataError(path + ": unknown record '" + f[0] + "'");
            }
        }
        return m;
    }
};

// Lloyd's algorithm with k-means++ seeding. Stops when assignments are stable
// or after max_iters. WCSS is recorded after every assignment step and is
// non-increasing. Empty clusters keep their previous centroid. Deterministic
// for a fixed seed; distance ties go to the lowest centroid index.
inline ClusterModel kmeans(const std::vector<UserVector>& vectors, int k, int max_iters,
                           std::uint64_t seed) {
    if (vectors.empty()) throw ConfigError("kmeans: no vectors");
    if (k <= 0) throw ConfigError("kmeans: k must be positive");
    if (max_iters < 1) throw ConfigError("kmeans: max_iters must be >= 1");
    const int dim = static_cast<int>(vectors[0].vec.size());
    for (const auto& uv : vectors)
        if (static_cast<int>(uv.vec.size()) != dim) throw ShapeError("kmeans: mixed dimensions");

    std::set<Vec> distinct;
    for (const auto& uv : vectors) distinct.insert(uv.vec);
    if (static_cast<std::size_t>(k) > distinct.size())
        throw ConfigError("kmeans: k=" + std::to_string(k) + " exceeds " +
                          std::to_string(distinct.size()) + " distinct vectors");

    const std::size_t n = vectors.size();
    Rng rng(seed);

    ClusterModel model;
    model.k = k;
    model.dim = dim;
    model.centroids.reserve(k);

    // k-means++: first centroid uniform, then proportional to squared
    // distance from the nearest chosen centroid.
    model.centroids.push_back(vectors[rng.uniform_index(n)].vec);
    Vec d2(n);
    while (static_cast<int>(model.centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : model.centroids)
                best = std::min(best, squared_distance(c, vectors[i].vec));
            d2[i] = best;
            total += best;
        }
        const double r = rng.uniform01() * total;
        double acc = 0.0;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (r < acc) {
                pick = i;
                break;
            }
        }
        model.centroids.push_back(vectors[pick].vec);
    }

    std::vector<int> labels(n, -1);
    for (int iter = 0; iter < max_iters; ++iter) {
        // Assignment step.
        bool changed = false;
        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = squared_distance(model.centroids[c], vectors[i].vec);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
            wcss += best_d;
        }
        model.wcss_history.push_back(wcss);
        if (!changed) break;

        // Update step: recompute means of non-empty clusters.
        std::vector<Vec> sums(k, Vec(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int j = 0; j < dim; ++j) sums[labels[i]][j] += vectors[i].vec[j];
            ++counts[labels[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (int j = 0; j < dim; ++j)
                model.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }
    }

    for (std::size_t i = 0; i < n; ++i) model.assignment[vectors[i].user] = labels[i];
    return model;
}

}  // namespace lhrm
