#include "gener/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "gener/io_util.hpp"
#include "gener/rng.hpp"

namespace gener::prep {

void SplitFractions::validate() const {
    auto in_open_unit = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in_open_unit(train) || !in_open_unit(val) || !in_open_unit(test))
        throw GenerError(errc::config_invalid, fail_class::config,
                         "split fractions must each lie in (0,1)");
    if (std::abs(train + val + test - 1.0) > 1e-12)
        throw GenerError(errc::config_invalid, fail_class::config,
                         "split fractions must sum to 1");
}

NormalizationKind normalization_from_name(const std::string& name) {
    if (name == "standardize") return NormalizationKind::standardize;
    if (name == "quantile") return NormalizationKind::quantile;
    if (name == "none") return NormalizationKind::none;
    throw GenerError(errc::config_invalid, fail_class::config,
                     "unknown normalization: " + name);
}

const char* normalization_name(NormalizationKind kind) {
    switch (kind) {
        case NormalizationKind::standardize: return "standardize";
        case NormalizationKind::quantile: return "quantile";
        case NormalizationKind::none: return "none";
    }
    return "none";
}

ExpressionMatrix standardize_rows(const ExpressionMatrix& matrix) {
    const std::size_t L = matrix.length();
    std::vector<double> values(matrix.n_genes() * L);
    for (std::size_t i = 0; i < matrix.n_genes(); ++i) {
        auto row = matrix.row(i);
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(L);
        double var = 0.0;
        for (double v : row) var += (v - mean) * (v - mean);
        var /= static_cast<double>(L);
        if (var == 0.0) {
            for (std::size_t c = 0; c < L; ++c) values[i * L + c] = 0.0;
        } else {
            const double inv_sd = 1.0 / std::sqrt(var);
            for (std::size_t c = 0; c < L; ++c) values[i * L + c] = (row[c] - mean) * inv_sd;
        }
    }
    return ExpressionMatrix(matrix.genes(), matrix.conditions(), std::move(values));
}

ExpressionMatrix quantile_normalize_columns(const ExpressionMatrix& matrix) {
    const std::size_t n = matrix.n_genes();
    const std::size_t L = matrix.length();
    std::vector<double> values(n * L);
    if (n == 0) return ExpressionMatrix(matrix.genes(), matrix.conditions(), std::move(values));

    // Per column: row indices ordered by value (stable on ties).
    std::vector<std::vector<std::size_t>> order(L, std::vector<std::size_t>(n));
    for (std::size_t c = 0; c < L; ++c) {
        auto& idx = order[c];
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return matrix.values()[a * L + c] < matrix.values()[b * L + c];
        });
    }

    std::vector<double> rank_means(n, 0.0);
    for (std::size_t c = 0; c < L; ++c)
        for (std::size_t r = 0; r < n; ++r) rank_means[r] += matrix.values()[order[c][r] * L + c];
    for (double& m : rank_means) m /= static_cast<double>(L);

    for (std::size_t c = 0; c < L; ++c) {
        const auto& idx = order[c];
        std::size_t r = 0;
        while (r < n) {
            std::size_t end = r + 1;
            const double v = matrix.values()[idx[r] * L + c];
            while (end < n && matrix.values()[idx[end] * L + c] == v) ++end;
            double mean = 0.0;
            for (std::size_t k = r; k < end; ++k) mean += rank_means[k];
            mean /= static_cast<double>(end - r);
            for (std::size_t k = r; k < end; ++k) values[idx[k] * L + c] = mean;
            r = end;
        }
    }
    return ExpressionMatrix(matrix.genes(), matrix.conditions(), std::move(values));
}

namespace {

// Keeps `keep` of the indices in `pool`, chosen uniformly without
// replacement via a partial Fisher-Yates pass.
std::unordered_set<std::size_t> pick_subset(std::vector<std::size_t> pool, std::size_t keep,
                                            Xoshiro256& rng) {
    std::unordered_set<std::size_t> kept;
    kept.reserve(keep * 2);
    for (std::size_t k = 0; k < keep; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.bounded(pool.size() - k));
        std::swap(pool[k], pool[j]);
        kept.insert(pool[k]);
    }
    return kept;
}

}  // namespace

LabeledDataset undersample(const LabeledDataset& dataset, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < dataset.pairs.size(); ++i)
        (dataset.pairs[i].label == 1 ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
        throw GenerError(errc::single_class, fail_class::data,
                         "undersampling needs both classes present");
    if (pos.size() == neg.size()) return dataset;

    auto& majority = pos.size() > neg.size() ? pos : neg;
    const std::size_t target = std::min(pos.size(), neg.size());

    Xoshiro256 rng(seed);
    auto kept_majority = pick_subset(majority, target, rng);

    LabeledDataset out;
    out.matrix_ref = dataset.matrix_ref;
    out.pairs.reserve(2 * target);
    const int majority_label = pos.size() > neg.size() ? 1 : 0;
    for (std::size_t i = 0; i < dataset.pairs.size(); ++i) {
        if (dataset.pairs[i].label == majority_label && !kept_majority.count(i)) continue;
        out.pairs.push_back(dataset.pairs[i]);
    }
    return out;
}

LabeledDataset subsample_both(const LabeledDataset& dataset, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw GenerError(errc::config_invalid, fail_class::config,
                         "subsample fraction must lie in (0,1]");
    if (fraction == 1.0) return dataset;

    Xoshiro256 rng(seed);
    std::unordered_set<std::size_t> kept;
    for (int label : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < dataset.pairs.size(); ++i)
            if (dataset.pairs[i].label == label) members.push_back(i);
        if (members.empty()) continue;
        const auto keep = static_cast<std::size_t>(
            std::llround(static_cast<double>(members.size()) * fraction));
        auto chosen = pick_subset(std::move(members), keep, rng);
        kept.merge(chosen);
    }

    LabeledDataset out;
    out.matrix_ref = dataset.matrix_ref;
    out.pairs.reserve(kept.size());
    for (std::size_t i = 0; i < dataset.pairs.size(); ++i)
        if (kept.count(i)) out.pairs.push_back(dataset.pairs[i]);
    return out;
}

LabeledDataset stratified_split(const LabeledDataset& dataset, const SplitFractions& fractions,
                                std::uint64_t seed) {
    fractions.validate();
    if (dataset.pairs.empty())
        throw GenerError(errc::empty_split, fail_class::data, "cannot split an empty dataset");

    LabeledDataset out = dataset;
    Xoshiro256 rng(seed);
    for (int label : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < out.pairs.size(); ++i)
            if (out.pairs[i].label == label) members.push_back(i);
        if (members.empty())
            throw GenerError(errc::empty_split, fail_class::data,
                             "class " + std::to_string(label) + " has no examples to split");
        rng.shuffle(members);

        const auto n = static_cast<double>(members.size());
        const auto n_train = static_cast<std::size_t>(std::llround(n * fractions.train));
        const auto n_val = static_cast<std::size_t>(std::llround(n * fractions.val));
        if (n_train + n_val > members.size() || n_train == 0 || n_val == 0 ||
            members.size() - n_train - n_val == 0)
            throw GenerError(errc::empty_split, fail_class::data,
                             "class " + std::to_string(label) +
                                 " is too small for the requested split fractions");

        for (std::size_t k = 0; k < members.size(); ++k) {
            Split s = k < n_train ? Split::train : k < n_train + n_val ? Split::val : Split::test;
            out.pairs[members[k]].split = s;
        }
    }
    return out;
}

PairFeatures featurize(const PairExample& pair, const ExpressionMatrix& matrix) {
    const auto a = matrix.row(matrix.index_of(pair.a));
    const auto b = matrix.row(matrix.index_of(pair.b));
    PairFeatures f;
    f.length = matrix.length();
    f.stacked.resize(2 * f.length);
    f.product.resize(f.length);
    for (std::size_t c = 0; c < f.length; ++c) {
        f.stacked[c] = a[c];
        f.stacked[f.length + c] = b[c];
        f.product[c] = a[c] * b[c];
    }
    return f;
}

std::string render_manifest_tsv(const LabeledDataset& dataset) {
    std::string out = "gene_a\tgene_b\tlabel\tsplit\n";
    for (const auto& p : dataset.pairs) {
        out += p.a.name;
        out += '\t';
        out += p.b.name;
        out += '\t';
        out += std::to_string(p.label);
        out += '\t';
        out += split_name(p.split);
        out += '\n';
    }
    return out;
}

LabeledDataset parse_manifest_tsv(std::string_view text, const ExpressionMatrix& matrix) {
    auto lines = split_lines(text);
    if (lines.size() < 2)
        throw GenerError(errc::empty_file, fail_class::data, "manifest has no data rows");

    LabeledDataset dataset;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        auto cells = split_tabs(lines[li]);
        if (cells.size() != 4)
            throw GenerError(errc::malformed_row, fail_class::data,
                             "manifest row on line " + std::to_string(li + 1) +
                                 " needs 4 columns");
        int label;
        if (cells[2] == "0")
            label = 0;
        else if (cells[2] == "1")
            label = 1;
        else
            throw GenerError(errc::invalid_label, fail_class::data,
                             "manifest label must be 0 or 1 on line " + std::to_string(li + 1));
        dataset.pairs.push_back(PairExample{GeneId{std::string(cells[0])},
                                            GeneId{std::string(cells[1])}, label,
                                            split_from_name(std::string(cells[3]))});
    }
    dataset.validate_against(matrix);
    return dataset;
}

}  // namespace gener::prep
