#include <doctest.h>

#include <cmath>

#include "gener/io_util.hpp"
#include "gener/metrics.hpp"
#include "gener/rng.hpp"
#include "oracles.hpp"

using namespace gener;
using namespace gener::metrics;

TEST_SUITE("metrics") {

TEST_CASE("roc points for the worked example") {
    ScoredSet s{{0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}};
    auto pts = roc_points(s);
    REQUIRE(pts.size() == 5);
    const std::vector<std::pair<double, double>> expected{
        {0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(pts[i].x == doctest::Approx(expected[i].first));
        CHECK(pts[i].y == doctest::Approx(expected[i].second));
    }
    CHECK(auroc(s) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("roc edge shapes") {
    // perfectly separated: passes through (0,1)
    ScoredSet sep{{0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}};
    auto pts = roc_points(sep);
    bool hits_corner = false;
    for (const auto& p : pts) hits_corner = hits_corner || (p.x == 0.0 && p.y == 1.0);
    CHECK(hits_corner);

    // all scores tied: just the two endpoints, AUROC 1/2
    ScoredSet tied{{0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}};
    auto tp = roc_points(tied);
    REQUIRE(tp.size() == 2);
    CHECK(tp[0].x == 0.0);
    CHECK(tp[0].y == 0.0);
    CHECK(tp[1].x == 1.0);
    CHECK(tp[1].y == 1.0);
    CHECK(auroc(tied) == doctest::Approx(0.5));
}

TEST_CASE("roc requires both classes") {
    ScoredSet single{{0.2, 0.3}, {1, 1}};
    CHECK_THROWS_AS(roc_points(single), GenerError);
    CHECK_THROWS_AS(auroc(single), GenerError);
}

TEST_CASE("label flip mirrors auroc") {
    Xoshiro256 rng(21);
    for (int t = 0; t < 50; ++t) {
        auto s = oracle::random_scored_set(rng, 60);
        auto flipped = s;
        for (auto& l : flipped.labels) l = 1 - l;
        CHECK(auroc(flipped) == doctest::Approx(1.0 - auroc(s)).epsilon(1e-12));
    }
}

TEST_CASE("aupr worked examples") {
    ScoredSet s{{0.8, 0.4, 0.35, 0.1}, {1, 0, 1, 0}};
    CHECK(aupr(s) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));

    ScoredSet perfect{{0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}};
    CHECK(aupr(perfect) == doctest::Approx(1.0));

    // single positive ranked last of n -> AP = 1/n
    ScoredSet last{{0.9, 0.8, 0.7, 0.1}, {0, 0, 0, 1}};
    CHECK(aupr(last) == doctest::Approx(0.25).epsilon(1e-12));

    ScoredSet no_pos{{0.5, 0.6}, {0, 0}};
    CHECK_THROWS_AS(aupr(no_pos), GenerError);
}

TEST_CASE("auroc matches the quadratic Mann-Whitney oracle on random tied sets") {
    Xoshiro256 rng(1234);
    for (int t = 0; t < 300; ++t) {
        auto s = oracle::random_scored_set(rng, 500);
        CHECK(auroc(s) == doctest::Approx(oracle::auroc_pair_counting(s)).epsilon(1e-9));
    }
}

TEST_CASE("aupr matches the step-wise oracle on random tied sets") {
    Xoshiro256 rng(4321);
    for (int t = 0; t < 300; ++t) {
        auto s = oracle::random_scored_set(rng, 500);
        CHECK(aupr(s) == doctest::Approx(oracle::average_precision_steps(s)).epsilon(1e-9));
    }
}

TEST_CASE("auroc and aupr are invariant under strictly increasing transforms") {
    Xoshiro256 rng(55);
    for (int t = 0; t < 40; ++t) {
        auto s = oracle::random_scored_set(rng, 100);
        auto warped = s;
        for (auto& v : warped.scores) v = std::exp(2.0 * v) + 3.0;
        CHECK(auroc(warped) == doctest::Approx(auroc(s)).epsilon(1e-12));
        CHECK(aupr(warped) == doctest::Approx(aupr(s)).epsilon(1e-12));
    }
}

TEST_CASE("curve coordinates are monotone") {
    Xoshiro256 rng(66);
    for (int t = 0; t < 40; ++t) {
        auto s = oracle::random_scored_set(rng, 100);
        auto roc = roc_points(s);
        for (std::size_t i = 1; i < roc.size(); ++i) {
            CHECK(roc[i].x >= roc[i - 1].x);
            CHECK(roc[i].y >= roc[i - 1].y);
        }
        auto pr = pr_points(s);
        for (std::size_t i = 1; i < pr.size(); ++i) CHECK(pr[i].x >= pr[i - 1].x);
    }
}

TEST_CASE("mcc worked example and degenerate guard") {
    CHECK(mcc(ConfusionMatrix{3, 1, 4, 2}) ==
          doctest::Approx(10.0 / std::sqrt(600.0)).epsilon(1e-12));
    CHECK(mcc(ConfusionMatrix{5, 0, 5, 0}) == doctest::Approx(1.0));
    // all predictions one class
    CHECK(mcc(ConfusionMatrix{5, 5, 0, 0}) == 0.0);
}

TEST_CASE("mcc is class-symmetric for binary confusion") {
    Xoshiro256 rng(91);
    for (int t = 0; t < 50; ++t) {
        ConfusionMatrix c{rng.bounded(30), rng.bounded(30), rng.bounded(30), rng.bounded(30)};
        ConfusionMatrix swapped{c.tn, c.fn, c.tp, c.fp};
        CHECK(mcc(c) == doctest::Approx(mcc(swapped)).epsilon(1e-12));
    }
}

TEST_CASE("micro averaging pools class scores") {
    // perfectly separated two-example case
    std::map<int, ScoredSet> per_class;
    per_class[0] = ScoredSet{{0.9, 0.2}, {1, 0}};
    per_class[1] = ScoredSet{{0.1, 0.8}, {0, 1}};
    auto [roc_micro, pr_micro] = micro_average_ovr(per_class);
    CHECK(roc_micro == doctest::Approx(1.0));
    CHECK(pr_micro == doctest::Approx(1.0));

    // uniform probabilities: chance level
    std::map<int, ScoredSet> uniform;
    uniform[0] = ScoredSet{{0.5, 0.5}, {1, 0}};
    uniform[1] = ScoredSet{{0.5, 0.5}, {0, 1}};
    CHECK(micro_average_ovr(uniform).first == doctest::Approx(0.5));
}

TEST_CASE("micro averaging equals the brute-force pooled oracle") {
    Xoshiro256 rng(808);
    std::vector<std::array<double, 2>> probs;
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) {
        const double p = rng.next_double();
        probs.push_back({1.0 - p, p});
        labels.push_back(static_cast<int>(rng.bounded(2)));
    }
    std::map<int, ScoredSet> per_class;
    ScoredSet pooled;
    for (int cls : {0, 1}) {
        ScoredSet set;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            set.scores.push_back(probs[i][static_cast<std::size_t>(cls)]);
            set.labels.push_back(labels[i] == cls ? 1 : 0);
            pooled.scores.push_back(probs[i][static_cast<std::size_t>(cls)]);
            pooled.labels.push_back(labels[i] == cls ? 1 : 0);
        }
        per_class[cls] = set;
    }
    auto [a, p] = micro_average_ovr(per_class);
    CHECK(a == doctest::Approx(oracle::auroc_pair_counting(pooled)).epsilon(1e-9));
    CHECK(p == doctest::Approx(oracle::average_precision_steps(pooled)).epsilon(1e-9));

    // class-0 scores are an affine decreasing transform of class-1 scores,
    // so both per-class AUROCs agree (the pooled value is its own quantity)
    CHECK(auroc(per_class[0]) == doctest::Approx(auroc(per_class[1])).epsilon(1e-9));
}

TEST_CASE("argmax confusion with tie rule") {
    auto c = confusion_at_argmax({{0.9, 0.1}}, {0}, 0);
    CHECK(c.tp == 1);

    // exact tie predicts class 0
    auto t = confusion_at_argmax({{0.5, 0.5}}, {0}, 0);
    CHECK(t.tp == 1);

    std::vector<std::array<double, 2>> probs{{0.9, 0.1}, {0.3, 0.7}, {0.6, 0.4}, {0.2, 0.8}};
    std::vector<int> labels{0, 1, 1, 0};
    auto c1 = confusion_at_argmax(probs, labels, 1);
    auto c0 = confusion_at_argmax(probs, labels, 0);
    CHECK(c1.tp == c0.tn);
    CHECK(c1.fp == c0.fn);
    CHECK(c1.tn == c0.tp);
    CHECK(c1.fn == c0.fp);
}

TEST_CASE("curve csv round trips at full precision") {
    std::vector<CurvePoint> pts{{0.0, 0.0}, {1.0 / 3.0, 0.7071067811865476}, {1.0, 1.0}};
    auto csv = curve_csv(pts, "fpr", "tpr");
    auto lines = split_lines(csv);
    REQUIRE(lines.size() == 4);  // header + 3 rows
    CHECK(lines[0] == "fpr,tpr");
    auto parsed = parse_curve_csv(csv);
    REQUIRE(parsed.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(parsed[i].x == pts[i].x);
        CHECK(parsed[i].y == pts[i].y);
    }
}

TEST_CASE("svg output is well-formed with one polyline") {
    auto svg = curve_svg({{0, 0}, {0.5, 0.8}, {1, 1}}, "FPR", "TPR", "AUROC = 0.9000");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("viewBox=\"0 0 600 600\"") != std::string::npos);
    CHECK(svg.find("AUROC = 0.9000") != std::string::npos);
    std::size_t count = 0, at = 0;
    while ((at = svg.find("<polyline", at)) != std::string::npos) {
        ++count;
        ++at;
    }
    CHECK(count == 1);
    // closing tags balance
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("report json carries the full schema") {
    std::vector<std::array<double, 2>> probs{{0.9, 0.1}, {0.2, 0.8}, {0.7, 0.3}, {0.4, 0.6}};
    std::vector<int> labels{0, 1, 0, 1};
    auto report = score_probabilities(probs, labels);
    auto j = report.to_json();
    for (const char* key : {"auroc_micro", "aupr_micro", "mcc_class1", "mcc_class2", "confusion",
                            "n_train", "n_val", "n_test"})
        CHECK(j.contains(key));
    CHECK(report.auroc_micro == doctest::Approx(1.0));
    // binary argmax confusion is class-symmetric, so the two MCC views agree
    CHECK(report.mcc_class1 == doctest::Approx(report.mcc_class2));
}

}  // TEST_SUITE
