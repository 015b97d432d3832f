#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "gener/core.hpp"

namespace gener::ingest {

struct ParseOptions {
    bool uppercase_genes = false;  // ASCII-uppercase all gene names on ingest
    bool skip_header = false;      // interactions file: drop the first row
};

struct IngestStats {
    std::uint64_t raw = 0;
    std::uint64_t dropped_self = 0;
    std::uint64_t dropped_unknown = 0;
    std::uint64_t dropped_duplicate = 0;
    std::uint64_t kept = 0;
};

// Expression TSV: header row (first cell ignored, remaining cells condition
// labels), then one row per gene: name followed by L decimal numbers.
ExpressionMatrix parse_expression_tsv(std::string_view text, const ParseOptions& opts = {});

// Interactions TSV: two gene-name columns, extra columns ignored. Output is
// canonicalized, deduplicated, with self loops and unknown genes dropped.
// Drop precedence per row: self loop, then unknown gene, then duplicate.
std::pair<std::vector<std::pair<GeneId, GeneId>>, IngestStats> parse_interactions_tsv(
    std::string_view text, const ExpressionMatrix& matrix, const ParseOptions& opts = {});

// Uniform sample of `count` distinct canonical pairs absent from `positives`.
// Rejection sampling with a visited set; switches to full enumeration plus a
// partial shuffle when positives cover more than half the pair universe or
// the request exceeds half of what remains.
std::vector<std::pair<GeneId, GeneId>> sample_negatives(
    const ExpressionMatrix& matrix, const std::vector<std::pair<GeneId, GeneId>>& positives,
    std::uint64_t count, std::uint64_t seed);

// Desk-scale data with known ground truth: K module signals of length L,
// each gene is its module signal plus sigma-scaled white noise. Positives
// are all same-module pairs, negatives sampled to the same count.
struct SynthSpec {
    std::size_t n_modules = 10;
    std::size_t genes_per_module = 10;
    std::size_t length = 64;
    double noise_sigma = 0.5;
    std::uint64_t seed = 42;

    void validate() const;
};

std::pair<ExpressionMatrix, LabeledDataset> generate_synthetic(const SynthSpec& spec);

// File renderers for the ingest formats (used by the synth command).
std::string render_expression_tsv(const ExpressionMatrix& matrix);
std::string render_interactions_tsv(const std::vector<PairExample>& pairs, int label);

}  // namespace gener::ingest
