#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "textshape/neighborhood.hpp"

using namespace textshape;
using testutil::vec;

namespace {

AttributeScorer speed_scorer() {
    AttributeScorer s;
    s.attribute = Attribute::speed;
    s.config.window_size = 1;
    s.config.stride = 1;
    return s;
}

NeighborhoodSpec make_spec(double delta, double tolerance, double jaccard_max = 0.5) {
    NeighborhoodSpec spec;
    spec.scorer = speed_scorer();
    spec.delta = delta;
    spec.tolerance = tolerance;
    spec.jaccard_max = jaccard_max;
    return spec;
}

std::multiset<std::pair<std::uint32_t, std::uint32_t>> pair_ids(
    const std::vector<TrainingPair>& pairs) {
    std::multiset<std::pair<std::uint32_t, std::uint32_t>> ids;
    for (const auto& p : pairs) ids.insert({p.src_id, p.proto_id});
    return ids;
}

}  // namespace

TEST_CASE("jaccard distance follows set counting") {
    auto a = testutil::tokens({"a", "b", "c"});
    auto b = testutil::tokens({"b", "c", "d"});
    REQUIRE(jaccard_distance(a, a) == 0.0);
    REQUIRE(jaccard_distance(a, testutil::tokens({"x", "y"})) == 1.0);
    REQUIRE(jaccard_distance(a, b) == Catch::Approx(0.5));
    // duplicated tokens collapse into the set view
    REQUIRE(jaccard_distance(testutil::tokens({"a", "a", "b"}), testutil::tokens({"b", "a"})) ==
            0.0);
}

TEST_CASE("jaccard distance rejects empty token sets") {
    TokenSeq empty;
    REQUIRE_THROWS_MATCHES(jaccard_distance(empty, testutil::tokens({"a"})), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == errc::empty_input; }));
}

TEST_CASE("build_index validates banding and rejects empty corpora") {
    auto cc = testutil::make_cluster_corpus(1, 5);
    REQUIRE_THROWS_MATCHES(
        LshIndex::build(cc.sentences, cc.table, speed_scorer(), 128, 20, 1), Error,
        Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == errc::config_error; }));
    std::vector<TokenSeq> empty;
    REQUIRE_THROWS_AS(LshIndex::build(empty, cc.table, speed_scorer(), 128, 16, 1), Error);
}

TEST_CASE("single-sentence index lands in exactly `bands` buckets") {
    auto table = testutil::make_table(2, {{"a", vec({0, 0})}, {"b", vec({1, 0})}});
    std::vector<TokenSeq> corpus = {testutil::tokens({"a", "b", "a", "b"})};
    auto index = LshIndex::build(corpus, table, speed_scorer(), 32, 8, 99);
    REQUIRE(index.size() == 1);
    REQUIRE(index.sentence(0).signature.size() == 32);
    // a duplicate query collides in every band; the sentence is returned once
    auto cands = index.query_candidates(corpus[0]);
    REQUIRE(cands == std::vector<std::uint32_t>{0});
}

TEST_CASE("duplicate sentences share signatures and co-bucket") {
    auto table = testutil::make_table(2, {{"a", vec({0, 0})}, {"b", vec({1, 0})}});
    std::vector<TokenSeq> corpus = {testutil::tokens({"a", "b", "a"}),
                                    testutil::tokens({"a", "b", "a"}),
                                    testutil::tokens({"b", "a", "b"})};
    auto index = LshIndex::build(corpus, table, speed_scorer(), 64, 16, 7);
    REQUIRE(index.sentence(0).signature == index.sentence(1).signature);
    // same token set regardless of order
    REQUIRE(index.sentence(0).signature == index.sentence(2).signature);
    auto cands = index.query_candidates(std::uint32_t{0});
    REQUIRE(std::find(cands.begin(), cands.end(), 1) != cands.end());
    REQUIRE(std::find(cands.begin(), cands.end(), 0) == cands.end());  // self excluded
}

TEST_CASE("constrained neighborhood of an exact duplicate at delta 0") {
    auto table = testutil::make_table(2, {{"a", vec({0, 0})}, {"b", vec({1, 0})}});
    std::vector<TokenSeq> corpus = {testutil::tokens({"a", "b", "a"}),
                                    testutil::tokens({"a", "b", "a"})};
    auto index = LshIndex::build(corpus, table, speed_scorer(), 64, 16, 7);
    auto pairs = constrained_neighborhood(0, index, make_spec(0.0, 1e9));
    REQUIRE(pairs.size() == 1);
    REQUIRE(pairs[0].proto_id == 1);
    REQUIRE(pairs[0].jaccard == 0.0);
    REQUIRE(pairs[0].delta == 0.0);
}

TEST_CASE("constrained neighborhood equals brute force on a small corpus") {
    auto cc = testutil::make_cluster_corpus(10, 21);  // 50 sentences
    // 32 bands x 4 rows: at within-cluster similarity ~0.87 the per-pair
    // candidate-miss probability is ~1e-12, so set equality is exact here.
    auto index = LshIndex::build(cc.sentences, cc.table, speed_scorer(), 128, 32, 31);

    for (double delta : {0.0, 0.05}) {
        auto spec = make_spec(delta, 0.08);
        auto brute = testutil::brute_force_pairs(cc.sentences, cc.table, spec);
        auto pairs = generate_pairs(index, spec, 1u << 30);
        REQUIRE(pair_ids(pairs) == pair_ids(brute));
        for (const auto& p : pairs) {
            // exact re-verification: soundness is absolute
            const double dj = jaccard_distance(cc.sentences[p.src_id], cc.sentences[p.proto_id]);
            REQUIRE(dj == p.jaccard);
            const double ds = score(cc.sentences[p.src_id], cc.table, spec.scorer) -
                              score(cc.sentences[p.proto_id], cc.table, spec.scorer);
            REQUIRE(ds == p.delta);
            REQUIRE(std::abs(p.delta - spec.delta) <= spec.tolerance);
            REQUIRE(p.jaccard < spec.jaccard_max);
        }
    }
}

TEST_CASE("unreachable delta yields an empty neighborhood") {
    auto cc = testutil::make_cluster_corpus(4, 3);
    auto index = LshIndex::build(cc.sentences, cc.table, speed_scorer(), 128, 16, 11);
    auto pairs = generate_pairs(index, make_spec(1e6, 0.1), 1u << 30);
    REQUIRE(pairs.empty());
}

TEST_CASE("enlarging the tolerance never removes a pair") {
    auto cc = testutil::make_cluster_corpus(8, 17);
    auto index = LshIndex::build(cc.sentences, cc.table, speed_scorer(), 128, 16, 13);
    auto narrow = pair_ids(generate_pairs(index, make_spec(0.04, 0.02), 1u << 30));
    auto wide = pair_ids(generate_pairs(index, make_spec(0.04, 0.12), 1u << 30));
    REQUIRE(std::includes(wide.begin(), wide.end(), narrow.begin(), narrow.end()));
    REQUIRE(wide.size() >= narrow.size());
}

TEST_CASE("pair stream is deterministic and respects max_pairs") {
    auto cc = testutil::make_cluster_corpus(6, 29);
    auto index_a = LshIndex::build(cc.sentences, cc.table, speed_scorer(), 128, 16, 5);
    auto index_b = LshIndex::build(cc.sentences, cc.table, speed_scorer(), 128, 16, 5, 4);
    auto spec = make_spec(0.0, 1e9);
    auto pairs_a = generate_pairs(index_a, spec, 1u << 30);
    auto pairs_b = generate_pairs(index_b, spec, 1u << 30, 4);
    REQUIRE(pairs_a.size() == pairs_b.size());
    for (std::size_t i = 0; i < pairs_a.size(); ++i) {
        REQUIRE(pairs_a[i].src_id == pairs_b[i].src_id);
        REQUIRE(pairs_a[i].proto_id == pairs_b[i].proto_id);
        REQUIRE(pairs_a[i].delta == pairs_b[i].delta);
    }
    REQUIRE(generate_pairs(index_a, spec, 0).empty());
    REQUIRE(generate_pairs(index_a, spec, 7).size() == 7);
}

TEST_CASE("both directions of a qualifying duplicate pair are emitted") {
    auto table = testutil::make_table(2, {{"a", vec({0, 0})}, {"b", vec({1, 0})}});
    std::vector<TokenSeq> corpus = {testutil::tokens({"a", "b", "a"}),
                                    testutil::tokens({"a", "b", "a"})};
    auto index = LshIndex::build(corpus, table, speed_scorer(), 64, 16, 7);
    auto pairs = generate_pairs(index, make_spec(0.0, 0.5), 1u << 30);
    REQUIRE(pair_ids(pairs) ==
            std::multiset<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {1, 0}});
    REQUIRE(pairs[0].delta == -pairs[1].delta);
}

TEST_CASE("unscorable sentences are indexed for Jaccard but excluded from pairs") {
    AttributeScorer circ;
    circ.attribute = Attribute::circuitousness;
    circ.config.window_size = 1;
    circ.config.stride = 1;
    auto table = testutil::make_table(
        2, {{"a", vec({0, 0})}, {"b", vec({1, 0})}, {"c", vec({2, 1})}, {"d", vec({0, 1})}});
    // two tokens -> 2 windows -> circuitousness unscorable
    std::vector<TokenSeq> corpus = {testutil::tokens({"a", "b"}),
                                    testutil::tokens({"a", "b", "c"}),
                                    testutil::tokens({"a", "b", "c", "d"})};
    NeighborhoodSpec spec;
    spec.scorer = circ;
    spec.delta = 0.0;
    spec.tolerance = 1e9;
    spec.jaccard_max = 1.0;
    auto index = LshIndex::build(corpus, table, circ, 64, 16, 41);
    REQUIRE(index.unscored_count() == 1);
    REQUIRE_FALSE(index.sentence(0).score.has_value());
    auto pairs = generate_pairs(index, spec, 1u << 30);
    for (const auto& p : pairs) {
        REQUIRE(p.src_id != 0);
        REQUIRE(p.proto_id != 0);
    }
    // the unscorable sentence still occupies buckets
    REQUIRE_FALSE(index.query_candidates(std::uint32_t{0}).empty());
    REQUIRE_THROWS_AS(constrained_neighborhood(0, index, spec), Error);
}

TEST_CASE("index round-trips through its binary file byte-stably") {
    testutil::TempDir dir("index");
    auto cc = testutil::make_cluster_corpus(5, 57);
    auto index = LshIndex::build(cc.sentences, cc.table, speed_scorer(), 128, 16, 23);
    index.save(dir.file("a.idx"));
    index.save(dir.file("b.idx"));
    REQUIRE(testutil::read_file(dir.file("a.idx")) == testutil::read_file(dir.file("b.idx")));

    auto loaded = LshIndex::load(dir.file("a.idx"));
    REQUIRE(loaded.size() == index.size());
    REQUIRE(loaded.seed() == index.seed());
    REQUIRE(loaded.scorer().attribute == index.scorer().attribute);
    for (std::uint32_t i = 0; i < index.size(); ++i) {
        REQUIRE(loaded.sentence(i).signature == index.sentence(i).signature);
        REQUIRE(loaded.sentence(i).score == index.sentence(i).score);
        REQUIRE(loaded.query_candidates(i) == index.query_candidates(i));
    }
    auto spec = make_spec(0.0, 1e9);
    REQUIRE(pair_ids(generate_pairs(loaded, spec, 1u << 30)) ==
            pair_ids(generate_pairs(index, spec, 1u << 30)));
}

TEST_CASE("index load rejects foreign files") {
    testutil::TempDir dir("index");
    testutil::write_file(dir.file("bogus.idx"), "definitely not an index");
    REQUIRE_THROWS_MATCHES(LshIndex::load(dir.file("bogus.idx")), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == errc::format_error; }));
    REQUIRE_THROWS_MATCHES(LshIndex::load(dir.file("missing.idx")), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == errc::io_error; }));
}

TEST_CASE("candidate recall on a 2000-sentence corpus stays above 0.95") {
    auto cc = testutil::make_cluster_corpus(400, 2024);  // 2000 sentences
    auto index = LshIndex::build(cc.sentences, cc.table, speed_scorer(), 128, 16, 90, 4);
    auto spec = make_spec(0.0, 1e12);  // Jaccard-only operating point
    auto brute = testutil::brute_force_pairs(cc.sentences, cc.table, spec);
    auto mined = pair_ids(generate_pairs(index, spec, 1u << 30, 4));

    std::size_t hit = 0;
    for (const auto& p : brute) {
        if (mined.count({p.src_id, p.proto_id})) ++hit;
    }
    REQUIRE(brute.size() > 0);
    const double recall = static_cast<double>(hit) / static_cast<double>(brute.size());
    REQUIRE(recall >= 0.95);
    // soundness: nothing outside the brute-force set is ever emitted
    auto brute_ids = pair_ids(brute);
    for (const auto& id : mined) REQUIRE(brute_ids.count(id) == 1);

    // candidate lists stay far below corpus size
    double mean_candidates = 0.0;
    for (std::uint32_t i = 0; i < 100; ++i) {
        mean_candidates += static_cast<double>(index.query_candidates(i).size());
    }
    mean_candidates /= 100.0;
    REQUIRE(mean_candidates < 50.0);
}
