#pragma once

#include <cstdint>
#include <string>

#include "gener/core.hpp"

namespace gener::prep {

struct SplitFractions {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;

    void validate() const;  // each in (0,1), sum to 1 within 1e-12
};

enum class NormalizationKind { standardize, quantile, none };

NormalizationKind normalization_from_name(const std::string& name);
const char* normalization_name(NormalizationKind kind);

// Per-gene z-score: every row ends up with mean 0 and population standard
// deviation 1; zero-variance rows map to all zeros.
ExpressionMatrix standardize_rows(const ExpressionMatrix& matrix);

// Rank-mean quantile normalization across conditions: after it, every
// column holds the same multiset of values (up to tie averaging). Ties
// within a column receive the average of the rank means they span.
ExpressionMatrix quantile_normalize_columns(const ExpressionMatrix& matrix);

// Random undersampling: the majority class is cut to the minority count by
// uniform sampling without replacement. Already balanced input is returned
// unchanged and consumes no random draws.
LabeledDataset undersample(const LabeledDataset& dataset, std::uint64_t seed);

// Reduce both classes to round(n * fraction) kept examples each, uniformly
// without replacement (tables-style halving of the whole dataset).
LabeledDataset subsample_both(const LabeledDataset& dataset, double fraction, std::uint64_t seed);

// Within each class (ascending label order): deterministic shuffle, then
// round(n*train) to train, round(n*val) to val, remainder to test. Rounding
// is half away from zero.
LabeledDataset stratified_split(const LabeledDataset& dataset, const SplitFractions& fractions,
                                std::uint64_t seed);

PairFeatures featurize(const PairExample& pair, const ExpressionMatrix& matrix);

// Prepared-dataset manifest TSV (gene_a, gene_b, label, split).
std::string render_manifest_tsv(const LabeledDataset& dataset);
LabeledDataset parse_manifest_tsv(std::string_view text, const ExpressionMatrix& matrix);

}  // namespace gener::prep
