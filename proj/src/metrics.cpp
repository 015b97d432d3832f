#include "gener/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gener/io_util.hpp"

namespace gener::metrics {

namespace {

struct TieGroup {
    std::uint64_t tp = 0;  // cumulative positives at or above this threshold
    std::uint64_t fp = 0;
};

struct Sweep {
    std::vector<TieGroup> groups;
    std::uint64_t positives = 0;
    std::uint64_t negatives = 0;
};

Sweep sweep_thresholds(const ScoredSet& s) {
    if (s.scores.size() != s.labels.size() || s.scores.empty())
        throw GenerError(errc::shape_mismatch, fail_class::data,
                         "scored set needs equal, non-zero score/label lengths");
    for (double v : s.scores)
        if (!std::isfinite(v))
            throw GenerError(errc::non_numeric, fail_class::data, "scores must be finite");

    std::vector<std::size_t> order(s.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s.scores[a] > s.scores[b]; });

    Sweep sweep;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double v = s.scores[order[i]];
        std::size_t j = i;
        while (j < order.size() && s.scores[order[j]] == v) {
            if (s.labels[order[j]] == 1)
                ++tp;
            else
                ++fp;
            ++j;
        }
        sweep.groups.push_back({tp, fp});
        i = j;
    }
    sweep.positives = tp;
    sweep.negatives = fp;
    return sweep;
}

Sweep sweep_both_classes(const ScoredSet& s) {
    Sweep sweep = sweep_thresholds(s);
    if (sweep.positives == 0 || sweep.negatives == 0)
        throw GenerError(errc::single_class, fail_class::data,
                         "ROC needs both classes present");
    return sweep;
}

}  // namespace

std::vector<CurvePoint> roc_points(const ScoredSet& s) {
    const Sweep sweep = sweep_both_classes(s);
    std::vector<CurvePoint> points;
    points.reserve(sweep.groups.size() + 1);
    points.push_back({0.0, 0.0});
    const auto P = static_cast<double>(sweep.positives);
    const auto N = static_cast<double>(sweep.negatives);
    for (const auto& g : sweep.groups)
        points.push_back({static_cast<double>(g.fp) / N, static_cast<double>(g.tp) / P});
    return points;
}

double auroc(const ScoredSet& s) {
    const Sweep sweep = sweep_both_classes(s);
    // Twice the trapezoid area in (tp x fp) units: dfp * (tp_prev + tp_cur).
    std::uint64_t twice_area = 0;
    std::uint64_t prev_tp = 0;
    std::uint64_t prev_fp = 0;
    for (const auto& g : sweep.groups) {
        twice_area += (g.fp - prev_fp) * (prev_tp + g.tp);
        prev_tp = g.tp;
        prev_fp = g.fp;
    }
    return static_cast<double>(twice_area) /
           (2.0 * static_cast<double>(sweep.positives) * static_cast<double>(sweep.negatives));
}

std::vector<CurvePoint> pr_points(const ScoredSet& s) {
    const Sweep sweep = sweep_thresholds(s);
    if (sweep.positives == 0)
        throw GenerError(errc::no_positives, fail_class::data,
                         "PR curve needs at least one positive");
    std::vector<CurvePoint> points;
    points.reserve(sweep.groups.size() + 1);
    points.push_back({0.0, 1.0});
    const auto P = static_cast<double>(sweep.positives);
    for (const auto& g : sweep.groups)
        points.push_back({static_cast<double>(g.tp) / P,
                          static_cast<double>(g.tp) / static_cast<double>(g.tp + g.fp)});
    return points;
}

double aupr(const ScoredSet& s) {
    const Sweep sweep = sweep_thresholds(s);
    if (sweep.positives == 0)
        throw GenerError(errc::no_positives, fail_class::data,
                         "average precision needs at least one positive");
    const auto P = static_cast<double>(sweep.positives);
    double ap = 0.0;
    std::uint64_t prev_tp = 0;
    for (const auto& g : sweep.groups) {
        if (g.tp == prev_tp) continue;
        const double precision = static_cast<double>(g.tp) / static_cast<double>(g.tp + g.fp);
        ap += (static_cast<double>(g.tp - prev_tp) / P) * precision;
        prev_tp = g.tp;
    }
    return ap;
}

double mcc(const ConfusionMatrix& c) {
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn);
    const double fn = static_cast<double>(c.fn);
    const double d1 = tp + fp;
    const double d2 = tp + fn;
    const double d3 = tn + fp;
    const double d4 = tn + fn;
    if (d1 == 0.0 || d2 == 0.0 || d3 == 0.0 || d4 == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(d1 * d2 * d3 * d4);
}

std::pair<double, double> micro_average_ovr(const std::map<int, ScoredSet>& per_class) {
    ScoredSet pooled;
    for (const auto& [cls, set] : per_class) {
        (void)cls;
        if (set.scores.size() != set.labels.size())
            throw GenerError(errc::shape_mismatch, fail_class::data,
                             "scored set needs equal score/label lengths");
        pooled.scores.insert(pooled.scores.end(), set.scores.begin(), set.scores.end());
        pooled.labels.insert(pooled.labels.end(), set.labels.begin(), set.labels.end());
    }
    return {auroc(pooled), aupr(pooled)};
}

ConfusionMatrix confusion_at_argmax(const std::vector<std::array<double, 2>>& probabilities,
                                    const std::vector<int>& labels, int positive_class) {
    if (probabilities.size() != labels.size())
        throw GenerError(errc::shape_mismatch, fail_class::data,
                         "probabilities/labels length mismatch");
    ConfusionMatrix c;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const int predicted = probabilities[i][1] > probabilities[i][0] ? 1 : 0;
        const bool actual_pos = labels[i] == positive_class;
        const bool predicted_pos = predicted == positive_class;
        if (actual_pos && predicted_pos)
            ++c.tp;
        else if (!actual_pos && predicted_pos)
            ++c.fp;
        else if (!actual_pos && !predicted_pos)
            ++c.tn;
        else
            ++c.fn;
    }
    return c;
}

std::string curve_csv(const std::vector<CurvePoint>& points, const std::string& x_name,
                      const std::string& y_name) {
    std::string out = x_name + "," + y_name + "\n";
    for (const auto& p : points) out += format_double(p.x) + "," + format_double(p.y) + "\n";
    return out;
}

void export_curve_csv(const std::vector<CurvePoint>& points, const std::string& x_name,
                      const std::string& y_name, const std::filesystem::path& destination) {
    if (points.size() < 2)
        throw GenerError(errc::shape_mismatch, fail_class::data,
                         "curve export needs at least 2 points");
    StagedWriter writer;
    writer.write(destination, curve_csv(points, x_name, y_name));
    writer.commit();
}

std::vector<CurvePoint> parse_curve_csv(std::string_view text) {
    auto lines = split_lines(text);
    if (lines.size() < 2)
        throw GenerError(errc::empty_file, fail_class::data, "curve CSV has no points");
    std::vector<CurvePoint> points;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto comma = lines[li].find(',');
        if (comma == std::string_view::npos)
            throw GenerError(errc::malformed_row, fail_class::data,
                             "curve CSV row missing comma");
        points.push_back({parse_double(lines[li].substr(0, comma), li + 1),
                          parse_double(lines[li].substr(comma + 1), li + 1)});
    }
    return points;
}

std::string curve_svg(const std::vector<CurvePoint>& points, const std::string& x_label,
                      const std::string& y_label, const std::string& annotation) {
    // 600x600 viewBox with a 50px margin; curve coordinates are in [0,1].
    const double margin = 50.0;
    const double span = 500.0;
    auto px = [&](double x) { return margin + x * span; };
    auto py = [&](double y) { return margin + (1.0 - y) * span; };

    std::string svg =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 600 600\">\n"
        "  <rect x=\"0\" y=\"0\" width=\"600\" height=\"600\" fill=\"white\"/>\n"
        "  <line x1=\"50\" y1=\"550\" x2=\"550\" y2=\"550\" stroke=\"black\"/>\n"
        "  <line x1=\"50\" y1=\"50\" x2=\"50\" y2=\"550\" stroke=\"black\"/>\n";
    svg += "  <text x=\"300\" y=\"590\" text-anchor=\"middle\" font-size=\"16\">" + x_label +
           "</text>\n";
    svg += "  <text x=\"15\" y=\"300\" text-anchor=\"middle\" font-size=\"16\" "
           "transform=\"rotate(-90 15 300)\">" +
           y_label + "</text>\n";
    svg += "  <polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i) svg += ' ';
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f,%.3f", px(points[i].x), py(points[i].y));
        svg += buf;
    }
    svg += "\"/>\n";
    svg += "  <text x=\"540\" y=\"80\" text-anchor=\"end\" font-size=\"16\">" + annotation +
           "</text>\n";
    svg += "</svg>\n";
    return svg;
}

void render_curve_svg(const std::vector<CurvePoint>& points, const std::string& x_label,
                      const std::string& y_label, const std::string& annotation,
                      const std::filesystem::path& destination) {
    if (points.size() < 2)
        throw GenerError(errc::shape_mismatch, fail_class::data,
                         "curve render needs at least 2 points");
    StagedWriter writer;
    writer.write(destination, curve_svg(points, x_label, y_label, annotation));
    writer.commit();
}

nlohmann::json MetricsReport::to_json() const {
    return nlohmann::json{
        {"auroc_micro", auroc_micro},
        {"aupr_micro", aupr_micro},
        {"mcc_class1", mcc_class1},
        {"mcc_class2", mcc_class2},
        {"confusion",
         {{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn}, {"fn", confusion.fn}}},
        {"n_train", n_train},
        {"n_val", n_val},
        {"n_test", n_test},
    };
}

MetricsReport score_probabilities(const std::vector<std::array<double, 2>>& probabilities,
                                  const std::vector<int>& labels) {
    if (probabilities.size() != labels.size() || probabilities.empty())
        throw GenerError(errc::shape_mismatch, fail_class::data,
                         "probabilities/labels length mismatch");

    std::map<int, ScoredSet> per_class;
    for (int cls : {0, 1}) {
        ScoredSet set;
        set.scores.reserve(probabilities.size());
        set.labels.reserve(probabilities.size());
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            set.scores.push_back(probabilities[i][static_cast<std::size_t>(cls)]);
            set.labels.push_back(labels[i] == cls ? 1 : 0);
        }
        per_class.emplace(cls, std::move(set));
    }

    ScoredSet pooled;
    for (const auto& [cls, set] : per_class) {
        (void)cls;
        pooled.scores.insert(pooled.scores.end(), set.scores.begin(), set.scores.end());
        pooled.labels.insert(pooled.labels.end(), set.labels.begin(), set.labels.end());
    }

    MetricsReport report;
    std::tie(report.auroc_micro, report.aupr_micro) = micro_average_ovr(per_class);
    report.confusion = confusion_at_argmax(probabilities, labels, 1);
    report.mcc_class1 = mcc(report.confusion);
    report.mcc_class2 = mcc(confusion_at_argmax(probabilities, labels, 0));
    report.roc = roc_points(pooled);
    report.pr = pr_points(pooled);
    return report;
}

}  // namespace gener::metrics
