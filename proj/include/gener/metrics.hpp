#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gener/errors.hpp"

namespace gener::metrics {

struct ScoredSet {
    std::vector<double> scores;
    std::vector<int> labels;  // 1 positive, 0 negative
};

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
};

// Threshold sweep over distinct score values (descending, ties grouped).
// Starts at (0,0), ends at (1,1), monotone in both coordinates.
std::vector<CurvePoint> roc_points(const ScoredSet& s);

// Trapezoidal area over roc_points; equal to the tie-corrected Mann-Whitney
// statistic P(score+ > score-) + 0.5 P(=). Accumulated in integers so the
// two formulations agree exactly.
double auroc(const ScoredSet& s);

// (recall, precision) per threshold group, led by the (0,1) anchor.
std::vector<CurvePoint> pr_points(const ScoredSet& s);

// Average precision: sum over threshold groups of delta-recall times the
// precision at that group.
double aupr(const ScoredSet& s);

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;
};

// Matthews correlation coefficient; 0 when any denominator factor is 0.
double mcc(const ConfusionMatrix& c);

// One-vs-all micro averaging: pool every class's (score, indicator) pairs
// into one set and score that. Returns (auroc, aupr).
std::pair<double, double> micro_average_ovr(const std::map<int, ScoredSet>& per_class);

// Argmax predictions (tie -> class 0) against truth, with `positive_class`
// treated as positive.
ConfusionMatrix confusion_at_argmax(const std::vector<std::array<double, 2>>& probabilities,
                                    const std::vector<int>& labels, int positive_class);

std::string curve_csv(const std::vector<CurvePoint>& points, const std::string& x_name,
                      const std::string& y_name);
void export_curve_csv(const std::vector<CurvePoint>& points, const std::string& x_name,
                      const std::string& y_name, const std::filesystem::path& destination);

std::string curve_svg(const std::vector<CurvePoint>& points, const std::string& x_label,
                      const std::string& y_label, const std::string& annotation);
void render_curve_svg(const std::vector<CurvePoint>& points, const std::string& x_label,
                      const std::string& y_label, const std::string& annotation,
                      const std::filesystem::path& destination);

std::vector<CurvePoint> parse_curve_csv(std::string_view text);

struct MetricsReport {
    double auroc_micro = 0.0;
    double aupr_micro = 0.0;
    double mcc_class1 = 0.0;  // interaction treated as positive
    double mcc_class2 = 0.0;  // no-interaction treated as positive
    ConfusionMatrix confusion;  // positive class = interaction
    std::uint64_t n_train = 0;
    std::uint64_t n_val = 0;
    std::uint64_t n_test = 0;
    std::vector<CurvePoint> roc;  // pooled one-vs-all set
    std::vector<CurvePoint> pr;

    nlohmann::json to_json() const;
};

// Builds the full report from two-column probabilities and binary truth.
MetricsReport score_probabilities(const std::vector<std::array<double, 2>>& probabilities,
                                  const std::vector<int>& labels);

}  // namespace gener::metrics
