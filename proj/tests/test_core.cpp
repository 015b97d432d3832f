#include <doctest.h>

#include "gener/core.hpp"
#include "gener/preprocess.hpp"
#include "gener/rng.hpp"

using namespace gener;

TEST_SUITE("core") {

TEST_CASE("canonicalize orders lexicographically") {
    auto [a, b] = canonicalize_pair(GeneId{"YBR001"}, GeneId{"YAL002"});
    CHECK(a.name == "YAL002");
    CHECK(b.name == "YBR001");

    auto [c, d] = canonicalize_pair(GeneId{"A"}, GeneId{"B"});
    CHECK(c.name == "A");
    CHECK(d.name == "B");
}

TEST_CASE("canonicalize rejects self pairs") {
    CHECK_THROWS_AS(canonicalize_pair(GeneId{"G1"}, GeneId{"G1"}), GenerError);
    try {
        canonicalize_pair(GeneId{"G1"}, GeneId{"G1"});
    } catch (const GenerError& e) {
        CHECK(e.code() == errc::self_pair);
    }
}

TEST_CASE("canonicalize is symmetric and idempotent") {
    Xoshiro256 rng(11);
    for (int i = 0; i < 200; ++i) {
        std::string x = "G" + std::to_string(rng.bounded(1000));
        std::string y = "G" + std::to_string(rng.bounded(1000));
        if (x == y) continue;
        auto ab = canonicalize_pair(GeneId{x}, GeneId{y});
        auto ba = canonicalize_pair(GeneId{y}, GeneId{x});
        CHECK(ab == ba);
        CHECK(canonicalize_pair(ab.first, ab.second) == ab);
    }
}

TEST_CASE("expression lookup returns the row unmodified") {
    ExpressionMatrix m({"G1", "G2"}, {"c1", "c2", "c3"}, {1, 2, 3, 4, 5, 6});
    CHECK(get_expression(m, GeneId{"G1"}) == std::vector<double>{1, 2, 3});
    CHECK(get_expression(m, GeneId{"G2"}) == std::vector<double>{4, 5, 6});
    CHECK_THROWS_AS(get_expression(m, GeneId{"NOPE"}), GenerError);
}

TEST_CASE("expression lookup has length L for wide matrices") {
    // Yeastract-shaped: every gene row is a vector of 1012 values.
    const std::size_t L = 1012;
    std::vector<std::string> conditions(L);
    for (std::size_t i = 0; i < L; ++i) conditions[i] = "c" + std::to_string(i);
    std::vector<double> values(2 * L, 0.5);
    ExpressionMatrix m({"GA", "GB"}, conditions, values);
    CHECK(get_expression(m, GeneId{"GA"}).size() == 1012);
}

TEST_CASE("matrix rejects duplicates and non-finite values") {
    CHECK_THROWS_AS(ExpressionMatrix({"G1", "G1"}, {"c"}, {1, 2}), GenerError);
    CHECK_THROWS_AS(
        ExpressionMatrix({"G1"}, {"c"}, {std::numeric_limits<double>::quiet_NaN()}), GenerError);
}

TEST_CASE("pair features satisfy the product invariant") {
    Xoshiro256 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t L = 1 + rng.bounded(16);
        std::vector<double> values(2 * L);
        for (auto& v : values) v = rng.normal();
        std::vector<std::string> conditions(L);
        for (std::size_t i = 0; i < L; ++i) conditions[i] = "c" + std::to_string(i);
        ExpressionMatrix m({"A", "B"}, conditions, values);
        auto f = prep::featurize(make_pair_example(GeneId{"B"}, GeneId{"A"}, 1), m);
        REQUIRE(f.product.size() == L);
        for (std::size_t i = 0; i < L; ++i)
            CHECK(f.product[i] == f.stacked[i] * f.stacked[L + i]);
    }
}

TEST_CASE("dataset validation rejects duplicates and reversed pairs") {
    ExpressionMatrix m({"A", "B", "C"}, {"c1", "c2"}, {1, 2, 3, 4, 5, 6});
    LabeledDataset ok;
    ok.pairs = {make_pair_example(GeneId{"A"}, GeneId{"B"}, 1),
                make_pair_example(GeneId{"C"}, GeneId{"B"}, 0)};
    CHECK_NOTHROW(ok.validate_against(m));

    LabeledDataset dup = ok;
    dup.pairs.push_back(make_pair_example(GeneId{"B"}, GeneId{"A"}, 0));
    CHECK_THROWS_AS(dup.validate_against(m), GenerError);

    LabeledDataset reversed;
    reversed.pairs = {PairExample{GeneId{"B"}, GeneId{"A"}, 1, Split::unassigned}};
    CHECK_THROWS_AS(reversed.validate_against(m), GenerError);
}

}  // TEST_SUITE
