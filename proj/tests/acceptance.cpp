// Acceptance gate: one PASS/FAIL line per criterion, exit 0 only if all pass.
// Criteria C1..C9 cover the geohash anchor, attention/loss/gradient math,
// k-means, metric oracles, the seeded synthetic benchmark ordering, the
// latent-dimension sweep, and CLI-level byte determinism.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lhrm/pipeline.hpp"

using namespace lhrm;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

template <typename F>
void criterion(const std::string& name, F&& body) {
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
        ok = false;
    }
    report(name, ok, detail);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "lhrm_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Reduced configuration for the sweep and CLI checks; the benchmark
// criterion uses the full default scale.
RunConfig reduced_cfg(std::uint64_t seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.gen.n_users = 300;
    cfg.gen.n_geo_cells = 10;
    cfg.gen.n_source_items = 200;
    cfg.gen.n_target_items = 60;
    cfg.gen.n_topics = 5;
    cfg.gen.source_events_per_user = 20;
    cfg.gen.target_clicks_per_user = 6;
    cfg.gen.target_impressions_per_user = 8;
    cfg.gen.test_clicks_per_user = 4;
    cfg.cluster_k = 10;
    cfg.sgns.epochs = 3;
    cfg.train.epochs = 3;
    return cfg;
}

EmbeddingGroup make_group(std::vector<Vec> members, int capacity) {
    EmbeddingGroup g;
    for (std::size_t i = 0; i < members.size(); ++i)
        g.members.push_back(GroupMember{"m" + std::to_string(i), std::move(members[i])});
    g.target = g.members.back().id;
    g.capacity = capacity;
    return g;
}

// ---------- C1: geohash ----------

bool c1_geohash(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    if (encode_geohash(GeoPoint(31.1932993, 121.4396019), 6).code != "wtw37q") {
        detail = "known vector mismatch";
        return false;
    }
    if (encode_geohash(GeoPoint(31.1932993, 121.4396019), 5).code != "wtw37") {
        detail = "precision-5 prefix mismatch";
        return false;
    }
    Rng rng(60601);
    for (int i = 0; i < 1000; ++i) {
        const GeoPoint p(rng.uniform(-90.0, 90.0), rng.uniform(-180.0, 180.0));
        const std::string full = encode_geohash(p, 12).code;
        for (int prec = 1; prec <= 12; ++prec)
            if (encode_geohash(p, prec).code != full.substr(0, static_cast<std::size_t>(prec))) {
                detail = "prefix property violated";
                return false;
            }
    }
    const double secs = seconds_since(t0);
    detail = "wtw37q anchor, 1000-point prefix property, " + fmt(secs) + " s";
    return secs < 1.0;
}

// ---------- C2: attention ----------

bool c2_attention(std::string& detail) {
    // Random groups: weights over real members sum to 1 within 1e-9.
    Rng rng(111);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 2 + rng.uniform_index(4);
        const std::size_t m = 1 + rng.uniform_index(6);
        Mat w(d, d);
        for (double& x : w.data) x = rng.uniform(-1.0, 1.0);
        std::vector<Vec> members(m, Vec(d));
        for (auto& v : members)
            for (double& x : v) x = rng.uniform(-2.0, 2.0);
        const auto res = attention(make_group(members, static_cast<int>(m) + 3), w);
        if (res.weights.size() != m) {  // padding slots carry no weight
            detail = "padding received attention weight";
            return false;
        }
        double sum = 0.0;
        for (double wt : res.weights) sum += wt;
        if (std::abs(sum - 1.0) > 1e-9) {
            detail = "weights sum off by " + fmt(std::abs(sum - 1.0), 12);
            return false;
        }
    }

    // Single member: a = e regardless of W_a.
    Mat w2(2, 2);
    w2.data = {3.0, -1.0, 2.0, 0.5};
    const auto single = attention(make_group({{0.7, -0.4}}, 4), w2);
    if (single.output != Vec{0.7, -0.4} || single.weights != Vec{1.0}) {
        detail = "single-member closed form";
        return false;
    }

    // W_a = 0: uniform weights, a = member mean.
    const auto unif = attention(make_group({{1.0, 0.0}, {0.0, 2.0}, {2.0, 1.0}}, 3),
                                Mat(2, 2, 0.0));
    for (double wt : unif.weights)
        if (std::abs(wt - 1.0 / 3.0) > 1e-12) {
            detail = "zero-W_a uniform weights";
            return false;
        }
    if (std::abs(unif.output[0] - 1.0) > 1e-12 || std::abs(unif.output[1] - 1.0) > 1e-12) {
        detail = "zero-W_a mean output";
        return false;
    }

    // Two-member hand fixture: e_t=(1,0), e_1=(0,1), W_a=I.
    Mat eye(2, 2);
    eye(0, 0) = eye(1, 1) = 1.0;
    const auto hand = attention(make_group({{0.0, 1.0}, {1.0, 0.0}}, 2), eye);
    const double e = std::exp(1.0);
    const double a0 = e / (1.0 + e), a1 = 1.0 / (1.0 + e);
    if (std::abs(hand.weights[0] - a1) > 1e-12 || std::abs(hand.weights[1] - a0) > 1e-12 ||
        std::abs(hand.output[0] - a0) > 1e-12 || std::abs(hand.output[1] - a1) > 1e-12) {
        detail = "hand fixture off beyond 1e-12";
        return false;
    }
    detail = "weight sums, closed forms, hand fixture to 1e-12";
    return true;
}

// ---------- C3: gradients ----------

bool c3_gradients(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(313);
    const double h = 1e-5;
    double worst = 0.0;
    for (int config = 0; config < 50; ++config) {
        ModelParams p = ModelParams::init(2, 2, 1, {2}, 2, 7000 + config);

        const std::size_t um = 1 + rng.uniform_index(3), im = 1 + rng.uniform_index(3);
        std::vector<Vec> umem(um, Vec(2)), imem(im, Vec(2));
        for (auto& v : umem)
            for (double& x : v) x = rng.uniform(-1.0, 1.0);
        for (auto& v : imem)
            for (double& x : v) x = rng.uniform(-1.0, 1.0);
        EmbeddingGroup ug = make_group(umem, static_cast<int>(um) + 1);
        EmbeddingGroup ig = make_group(imem, static_cast<int>(im) + 1);
        Vec ua{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
        Vec ia{rng.uniform(0.0, 1.0)};
        const SampleView view{&ug, &ig, &ua, &ia, config % 2};

        ModelParams grad = p.zeros_like();
        backward(view, p, forward(view, p), grad);

        std::vector<std::span<double>> pb, gb;
        p.for_each_block([&](std::span<double> b) { pb.push_back(b); });
        grad.for_each_block([&](std::span<double> b) { gb.push_back(b); });
        for (std::size_t b = 0; b < pb.size(); ++b) {
            for (std::size_t j = 0; j < pb[b].size(); ++j) {
                const double saved = pb[b][j];
                pb[b][j] = saved + h;
                const double up = sample_loss(view, p);
                pb[b][j] = saved - h;
                const double down = sample_loss(view, p);
                pb[b][j] = saved;
                const double numeric = (up - down) / (2.0 * h);
                const double analytic = gb[b][j];
                const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
                worst = std::max(worst, std::abs(analytic - numeric) / scale);
            }
        }
    }
    const double secs = seconds_since(t0);
    detail = "50 configs, max rel err " + fmt(worst, 8) + ", " + fmt(secs) + " s";
    return worst < 1e-4 && secs < 10.0;
}

// ---------- C4: loss ----------

bool c4_loss(std::string& detail) {
    if (std::abs(loss(1, 0.5) - std::log(2.0)) > 1e-12) {
        detail = "loss(1, 0.5) != ln 2";
        return false;
    }
    Rng rng(404);
    for (int i = 0; i < 10000; ++i) {
        const int y = rng.uniform01() < 0.5 ? 0 : 1;
        if (loss(y, rng.uniform01()) < 0.0) {
            detail = "negative loss";
            return false;
        }
    }
    detail = "ln 2 closed form, 10^4 random pairs non-negative";
    return true;
}

// ---------- C5: k-means ----------

bool c5_kmeans(std::string& detail) {
    Rng rng(515);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 30 + rng.uniform_index(50);
        const int k = 2 + static_cast<int>(rng.uniform_index(5));
        std::vector<UserVector> pts;
        for (std::size_t i = 0; i < n; ++i)
            pts.push_back(UserVector{"u" + std::to_string(i),
                                     {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0),
                                      rng.uniform(-5.0, 5.0)},
                                     1});
        const ClusterModel m = kmeans(pts, k, 60, 4000 + trial);
        for (std::size_t i = 1; i < m.wcss_history.size(); ++i)
            if (m.wcss_history[i] > m.wcss_history[i - 1] + 1e-9) {
                detail = "WCSS increased on trial " + std::to_string(trial);
                return false;
            }
    }

    const std::vector<Vec> centers{{0.0, 0.0}, {12.0, 0.0}, {0.0, 12.0}};
    std::vector<UserVector> pts;
    std::vector<int> truth;
    for (int i = 0; i < 200; ++i) {
        const int g = i % 3;
        pts.push_back(UserVector{"u" + std::to_string(i),
                                 {centers[g][0] + rng.gaussian(), centers[g][1] + rng.gaussian()},
                                 1});
        truth.push_back(g);
    }
    const ClusterModel m = kmeans(pts, 3, 100, 99);
    std::map<int, std::map<int, int>> votes;
    for (std::size_t i = 0; i < pts.size(); ++i) votes[truth[i]][m.cluster_of(pts[i].user)]++;
    std::map<int, int> majority;
    for (const auto& [g, counts] : votes) {
        int best = -1, best_n = -1;
        for (const auto& [c, cnt] : counts)
            if (cnt > best_n) {
                best_n = cnt;
                best = c;
            }
        majority[g] = best;
    }
    int agree = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (m.cluster_of(pts[i].user) == majority[truth[i]]) ++agree;
    detail = "WCSS monotone on 20 datasets, Gaussian recovery " +
             fmt(100.0 * agree / 200.0, 1) + "%";
    return agree >= 190;
}

// ---------- C6: metric oracles ----------

bool c6_metrics(std::string& detail) {
    {
        std::vector<EvalCase> third{{"u", {"c"}}};
        RankedLists lt;
        RankedList l;
        l.user = "u";
        l.items = {"a", "b", "c", "d"};
        l.scores = {4.0, 3.0, 2.0, 1.0};
        lt.emplace("u", l);
        if (std::abs(ndcg_at_k(third, lt, 3) - 0.5) > 1e-12) {
            detail = "rank-3 NDCG != 0.5";
            return false;
        }
    }

    Rng rng(616);
    for (int fixture = 0; fixture < 25; ++fixture) {
        const std::size_t n_items = 5 + rng.uniform_index(16);
        std::vector<std::string> catalog;
        for (std::size_t i = 0; i < n_items; ++i) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "i%02zu", i);
            catalog.push_back(buf);
        }
        const std::size_t n_cases = 1 + rng.uniform_index(10);
        std::vector<EvalCase> cases;
        RankedLists lists;
        for (std::size_t c = 0; c < n_cases; ++c) {
            const std::string u = "u" + std::to_string(c);
            std::vector<std::string> perm = catalog;
            rng.shuffle(perm);
            perm.resize(1 + rng.uniform_index(perm.size()));
            std::set<std::string> targets;
            const std::size_t nt = 1 + rng.uniform_index(3);
            while (targets.size() < nt)
                targets.insert(catalog[rng.uniform_index(catalog.size())]);
            cases.push_back({u, targets});
            RankedList l;
            l.user = u;
            l.items = perm;
            for (std::size_t i = 0; i < perm.size(); ++i)
                l.scores.push_back(static_cast<double>(perm.size() - i));
            lists.emplace(u, std::move(l));
        }

        double prev_hr = 0.0, prev_ndcg = 0.0;
        for (std::size_t k = 1; k <= n_items; ++k) {
            // Independent oracle: per-target linear rank search.
            std::size_t hits = 0, pairs = 0;
            double ndcg_sum = 0.0;
            for (const auto& c : cases) {
                const auto& l = lists.at(c.user);
                double dcg = 0.0, idcg = 0.0;
                for (const auto& t : c.target_items) {
                    ++pairs;
                    std::size_t rank = std::numeric_limits<std::size_t>::max();
                    for (std::size_t i = 0; i < l.items.size(); ++i)
                        if (l.items[i] == t) {
                            rank = i + 1;
                            break;
                        }
                    if (rank <= k) {
                        ++hits;
                        dcg += 1.0 / std::log2(static_cast<double>(rank + 1));
                    }
                }
                for (std::size_t p = 1; p <= c.target_items.size(); ++p)
                    idcg += 1.0 / std::log2(static_cast<double>(p + 1));
                ndcg_sum += dcg / idcg;
            }
            const double hr_oracle = static_cast<double>(hits) / static_cast<double>(pairs);
            const double ndcg_oracle = ndcg_sum / static_cast<double>(cases.size());

            const double hr = hr_at_k(cases, lists, k);
            const double nd = ndcg_at_k(cases, lists, k);
            if (hr != hr_oracle) {
                detail = "HR mismatch on fixture " + std::to_string(fixture);
                return false;
            }
            if (std::abs(nd - ndcg_oracle) > 1e-12) {
                detail = "NDCG mismatch on fixture " + std::to_string(fixture);
                return false;
            }
            if (hr < prev_hr || nd < prev_ndcg - 1e-12) {
                detail = "monotonicity violated on fixture " + std::to_string(fixture);
                return false;
            }
            prev_hr = hr;
            prev_ndcg = nd;
        }
    }
    detail = "25 fixtures exact vs brute force, monotone in k";
    return true;
}

// ---------- C7: benchmark ordering ----------

bool c7_benchmark(std::string& detail) {
    const double kNoiseBand = 0.02;  // 3-seed |LHRM - Hot| bound with no signal
    std::string lhrm_s, hot_s, gap_s;
    double max_secs = 0.0;

    auto hr30 = [](const std::vector<ModelMetrics>& rows, const std::string& model) {
        for (const auto& r : rows)
            if (r.model == model) {
                for (std::size_t i = 0; i < r.ks.size(); ++i)
                    if (r.ks[i] == 30) return r.hr[i];
            }
        throw EvalError("missing HR@30 for " + model);
    };

    for (std::uint64_t seed : {1, 2, 3}) {
        RunConfig cfg;  // full default scale, preference_strength 0.8, dim 32
        cfg.seed = seed;
        const std::string out = (work_dir() / ("bench_s" + std::to_string(seed))).string();
        const auto t0 = std::chrono::steady_clock::now();
        const auto rows = run_end_to_end(cfg, out);
        max_secs = std::max(max_secs, seconds_since(t0));

        const double lhrm = hr30(rows, "lhrm"), hot = hr30(rows, "hot"),
                     maxcov = hr30(rows, "maxcov");
        lhrm_s += (lhrm_s.empty() ? "" : "/") + fmt(lhrm);
        hot_s += (hot_s.empty() ? "" : "/") + fmt(hot);
        if (!(lhrm > hot && lhrm > maxcov)) {
            detail = "seed " + std::to_string(seed) + ": lhrm " + fmt(lhrm) + " vs hot " +
                     fmt(hot) + ", maxcov " + fmt(maxcov);
            return false;
        }
    }

    for (std::uint64_t seed : {1, 2, 3}) {
        RunConfig cfg;
        cfg.seed = seed;
        cfg.gen.preference_strength = 0.0;  // no planted signal
        const std::string out = (work_dir() / ("flat_s" + std::to_string(seed))).string();
        const auto t0 = std::chrono::steady_clock::now();
        const auto rows = run_end_to_end(cfg, out);
        max_secs = std::max(max_secs, seconds_since(t0));

        const double gap = std::abs(hr30(rows, "lhrm") - hr30(rows, "hot"));
        gap_s += (gap_s.empty() ? "" : "/") + fmt(gap);
        if (gap > kNoiseBand) {
            detail = "strength-0 seed " + std::to_string(seed) + ": |gap| " + fmt(gap) +
                     " > " + fmt(kNoiseBand);
            return false;
        }
    }

    detail = "HR@30 lhrm " + lhrm_s + " > hot " + hot_s + " (3 seeds); strength-0 gaps " +
             gap_s + " <= " + fmt(kNoiseBand) + "; max " + fmt(max_secs, 1) + " s/seed";
    return max_secs < 300.0;
}

// ---------- C8: dimension sweep ----------

bool c8_sweep(std::string& detail) {
    std::string dims;
    for (int dim : {32, 64, 128, 256}) {
        RunConfig cfg = reduced_cfg(11);
        cfg.model_latent_dim = dim;
        const std::string out = (work_dir() / ("sweep_d" + std::to_string(dim))).string();
        const auto rows = run_end_to_end(cfg, out);
        if (rows.size() != 3) {
            detail = "dim " + std::to_string(dim) + ": expected 3 model rows";
            return false;
        }
        const std::string text = slurp(Paths{out}.report());
        for (const char* needle :
             {"== ranking metrics ==", "lhrm", "hot", "maxcov", "HR@30", "NDCG@200"})
            if (text.find(needle) == std::string::npos) {
                detail = "dim " + std::to_string(dim) + ": report missing " + needle;
                return false;
            }
        dims += (dims.empty() ? "" : ",") + std::to_string(dim);
    }
    detail = "latent dims {" + dims + "} complete with full reports (no ordering asserted)";
    return true;
}

// ---------- C9: CLI determinism ----------

bool c9_determinism(std::string& detail) {
    const fs::path base = work_dir() / "cli";
    fs::create_directories(base);
    const std::string cfg_path = (base / "config.txt").string();
    reduced_cfg(21).save(cfg_path);

    auto run = [&](const std::string& out) {
        std::ostringstream cmd;
        cmd << LHRM_CLI_PATH << " run-all --config " << cfg_path << " --out " << out
            << " >" << out << ".stdout 2>" << out << ".stderr";
        return std::system(cmd.str().c_str());
    };
    const std::string o1 = (base / "run1").string(), o2 = (base / "run2").string();
    if (run(o1) != 0 || run(o2) != 0) {
        detail = "CLI run-all exited non-zero";
        return false;
    }
    const Paths p1{o1}, p2{o2};
    if (slurp(p1.report()) != slurp(p2.report())) {
        detail = "report.txt differs between runs";
        return false;
    }
    if (slurp(p1.report_kv()) != slurp(p2.report_kv())) {
        detail = "report.kv differs between runs";
        return false;
    }
    if (slurp(p1.checkpoint()) != slurp(p2.checkpoint())) {
        detail = "checkpoint differs between runs";
        return false;
    }
    detail = "run-all twice: report and checkpoint byte-identical";
    return true;
}

}  // namespace

int main() {
    work_dir();  // reset the scratch space once
    criterion("C1 geohash known vector and prefix property", c1_geohash);
    criterion("C2 attention closed forms and weight sums", c2_attention);
    criterion("C3 gradient suite vs finite differences", c3_gradients);
    criterion("C4 logistic loss closed forms", c4_loss);
    criterion("C5 k-means WCSS and planted recovery", c5_kmeans);
    criterion("C6 HR/NDCG brute-force oracles", c6_metrics);
    criterion("C7 benchmark ordering LHRM > Hot, MaxCov", c7_benchmark);
    criterion("C8 latent dimension sweep", c8_sweep);
    criterion("C9 CLI byte determinism", c9_determinism);
    if (g_failures == 0) std::printf("all criteria passed\n");
    return g_failures == 0 ? 0 : 1;
}
