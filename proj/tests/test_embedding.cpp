#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "lhrm/embedding.hpp"

using namespace lhrm;

namespace {

TokenSequence seq(std::string owner, std::vector<std::string> tokens,
                  Domain d = Domain::source) {
    return TokenSequence{std::move(owner), d, std::move(tokens)};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("sgns gradients match central finite differences", "[embedding]") {
    const std::size_t d = 4;
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        Vec center(d), context(d);
        std::vector<Vec> negs(3, Vec(d));
        for (auto& x : center) x = rng.uniform(-1.0, 1.0);
        for (auto& x : context) x = rng.uniform(-1.0, 1.0);
        for (auto& n : negs)
            for (auto& x : n) x = rng.uniform(-1.0, 1.0);

        auto neg_spans = [&] {
            std::vector<std::span<const double>> s;
            for (const auto& n : negs) s.emplace_back(n);
            return s;
        };

        Vec g_center(d), g_context(d);
        std::vector<Vec> g_negs;
        sgns_pair_grad(center, context, neg_spans(), g_center, g_context, g_negs);

        const double h = 1e-5;
        auto check = [&](double analytic, double* slot) {
            const double saved = *slot;
            *slot = saved + h;
            const double up = sgns_pair_loss(center, context, neg_spans());
            *slot = saved - h;
            const double down = sgns_pair_loss(center, context, neg_spans());
            *slot = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            REQUIRE(std::abs(analytic - numeric) / scale < 1e-4);
        };

        for (std::size_t j = 0; j < d; ++j) check(g_center[j], &center[j]);
        for (std::size_t j = 0; j < d; ++j) check(g_context[j], &context[j]);
        for (std::size_t k = 0; k < negs.size(); ++k)
            for (std::size_t j = 0; j < d; ++j) check(g_negs[k][j], &negs[k][j]);
    }
}

TEST_CASE("planted co-occurrence separates similar from dissimilar tokens", "[embedding]") {
    // X and Y always co-occur and share filler contexts; Z lives in a
    // disjoint filler world, so nothing ties it to X.
    std::vector<TokenSequence> corpus;
    for (int i = 0; i < 200; ++i) {
        const std::string f = "f" + std::to_string(i % 7);
        const std::string g = "g" + std::to_string(i % 5);
        corpus.push_back(seq("u" + std::to_string(i), {"X", "Y", f}));
        corpus.push_back(seq("v" + std::to_string(i), {"Z", g}));
    }
    SgnsConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 5;
    cfg.seed = 3;
    const EmbeddingTable table = train_skipgram(corpus, cfg);
    const double sim_xy = cosine_similarity(table.vec("X"), table.vec("Y"));
    const double sim_xz = cosine_similarity(table.vec("X"), table.vec("Z"));
    CHECK(sim_xy > sim_xz);
}

TEST_CASE("epoch loss is non-increasing early in training", "[embedding]") {
    std::vector<TokenSequence> corpus;
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        std::vector<std::string> tokens;
        const int topic = i % 4;
        for (int t = 0; t < 8; ++t)
            tokens.push_back("t" + std::to_string(topic) + "_" +
                             std::to_string(rng.uniform_index(6)));
        corpus.push_back(seq("u" + std::to_string(i), std::move(tokens)));
    }
    SgnsConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 3;
    cfg.seed = 5;
    std::vector<double> losses;
    train_skipgram(corpus, cfg, &losses);
    REQUIRE(losses.size() == 3);
    CHECK(losses[1] <= losses[0] + 1e-6);
    CHECK(losses[2] <= losses[1] + 1e-6);
}

TEST_CASE("vocabulary is ordered by frequency then token", "[embedding]") {
    std::vector<TokenSequence> corpus{
        seq("u1", {"bb", "aa", "bb", "cc", "aa", "bb"}),
        seq("u2", {"cc", "aa"}),
    };
    SgnsConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 1;
    const EmbeddingTable table = train_skipgram(corpus, cfg);
    // Frequencies: aa=3, bb=3, cc=2 -> freq desc, token asc.
    REQUIRE(table.tokens() == std::vector<std::string>{"aa", "bb", "cc"});
    CHECK(table.frequency(0) == 3);
    CHECK(table.frequency(2) == 2);
}

TEST_CASE("min_count filters rare tokens", "[embedding]") {
    std::vector<TokenSequence> corpus{
        seq("u1", {"common", "common", "common", "rare", "common"}),
    };
    SgnsConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 1;
    cfg.min_count = 2;
    const EmbeddingTable table = train_skipgram(corpus, cfg);
    CHECK(table.contains("common"));
    CHECK_FALSE(table.contains("rare"));
}

TEST_CASE("degenerate corpora raise configuration errors", "[embedding]") {
    SgnsConfig cfg;
    cfg.dim = 4;
    CHECK_THROWS_AS(train_skipgram({}, cfg), ConfigError);
    // Single-token vocabulary: no (center, context) pair exists.
    CHECK_THROWS_AS(train_skipgram({seq("u1", {"only"})}, cfg), ConfigError);
    SgnsConfig bad = cfg;
    bad.dim = 0;
    CHECK_THROWS_AS(train_skipgram({seq("u1", {"a", "b"})}, bad), ConfigError);
}

TEST_CASE("training is deterministic for a fixed seed", "[embedding]") {
    std::vector<TokenSequence> corpus;
    for (int i = 0; i < 30; ++i)
        corpus.push_back(seq("u" + std::to_string(i),
                             {"a" + std::to_string(i % 3), "b" + std::to_string(i % 5), "c"}));
    SgnsConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 2;
    cfg.seed = 77;
    const EmbeddingTable t1 = train_skipgram(corpus, cfg);
    const EmbeddingTable t2 = train_skipgram(corpus, cfg);
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        const auto v1 = t1.vec(i), v2 = t2.vec(i);
        for (std::size_t j = 0; j < v1.size(); ++j) REQUIRE(v1[j] == v2[j]);
    }
}

TEST_CASE("table save/load round-trips bit-exactly", "[embedding]") {
    std::vector<TokenSequence> corpus{
        seq("u1", {"x", "y", "z", "x", "y"}),
        seq("u2", {"y", "z", "w"}),
    };
    SgnsConfig cfg;
    cfg.dim = 6;
    cfg.epochs = 2;
    const EmbeddingTable table = train_skipgram(corpus, cfg);

    const std::string path = temp_path("lhrm_test_emb.txt");
    table.save(path);
    const EmbeddingTable loaded = EmbeddingTable::load(path);
    REQUIRE(loaded.dim() == table.dim());
    REQUIRE(loaded.tokens() == table.tokens());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto a = table.vec(i), b = loaded.vec(i);
        for (std::size_t j = 0; j < a.size(); ++j) REQUIRE(a[j] == b[j]);
    }
    // Write -> read -> write is byte-identical.
    const std::string path2 = temp_path("lhrm_test_emb2.txt");
    loaded.save(path2);
    std::ifstream f1(path), f2(path2);
    const std::string s1((std::istreambuf_iterator<char>(f1)), {});
    const std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("user_vector pools in-vocabulary tokens", "[embedding]") {
    EmbeddingTable table(2, {"p", "q", "r"}, {3, 2, 1});
    auto set = [&](const std::string& tok, double a, double b) {
        auto v = table.vec(table.index_of(tok));
        v[0] = a;
        v[1] = b;
    };
    set("p", 1.0, 2.0);
    set("q", -1.0, -2.0);
    set("r", 4.0, 0.0);

    // Mean of one token is that token's vector.
    const UserVector one = user_vector(seq("u", {"p"}), table);
    CHECK(one.vec == Vec{1.0, 2.0});
    CHECK(one.embeddable());

    // v and -v cancel.
    const UserVector zero = user_vector(seq("u", {"p", "q"}), table);
    CHECK(zero.vec == Vec{0.0, 0.0});
    CHECK(zero.in_vocab == 2);

    // Hand-computed 3-token mean: ((1,2) + (-1,-2) + (4,0)) / 3 = (4/3, 0).
    const UserVector mean = user_vector(seq("u", {"p", "q", "r"}), table);
    CHECK(mean.vec[0] == Catch::Approx(4.0 / 3.0).margin(1e-15));
    CHECK(mean.vec[1] == Catch::Approx(0.0).margin(1e-15));

    // Permutation invariance; OOV tokens are skipped.
    const UserVector perm = user_vector(seq("u", {"r", "oov", "q", "p"}), table);
    CHECK(perm.vec == mean.vec);
    CHECK(perm.in_vocab == 3);

    // All-OOV sequence flags the user as un-embeddable.
    const UserVector none = user_vector(seq("u", {"nope", "nada"}), table);
    CHECK_FALSE(none.embeddable());
    CHECK(none.vec == Vec{0.0, 0.0});
}

TEST_CASE("emitted vectors are finite", "[embedding]") {
    std::vector<TokenSequence> corpus;
    for (int i = 0; i < 50; ++i)
        corpus.push_back(seq("u" + std::to_string(i),
                             {"a" + std::to_string(i % 4), "b" + std::to_string(i % 6)}));
    SgnsConfig cfg;
    cfg.dim = 12;
    cfg.epochs = 5;
    const EmbeddingTable table = train_skipgram(corpus, cfg);
    for (std::size_t i = 0; i < table.size(); ++i)
        for (double v : table.vec(i)) REQUIRE(std::isfinite(v));
}
