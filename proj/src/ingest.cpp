#include "gener/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "gener/io_util.hpp"
#include "gener/rng.hpp"

namespace gener::ingest {

namespace {

std::string normalize_name(std::string_view raw, bool uppercase) {
    std::string name(raw);
    if (uppercase)
        for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return name;
}

void check_gene_name(const std::string& name, std::size_t line_no) {
    if (name.empty())
        throw GenerError(errc::malformed_row, fail_class::data,
                         "empty gene name on line " + std::to_string(line_no));
    for (char c : name)
        if (std::isspace(static_cast<unsigned char>(c)))
            throw GenerError(errc::malformed_row, fail_class::data,
                             "gene name contains whitespace on line " + std::to_string(line_no));
}

// Canonical pair of row indices, ordered by gene name byte order.
std::pair<std::uint32_t, std::uint32_t> canonical_indices(const ExpressionMatrix& m,
                                                          std::size_t i, std::size_t j) {
    if (m.genes()[i] < m.genes()[j])
        return {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
    return {static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i)};
}

std::uint64_t pack(std::pair<std::uint32_t, std::uint32_t> p) {
    return (static_cast<std::uint64_t>(p.first) << 32) | p.second;
}

}  // namespace

ExpressionMatrix parse_expression_tsv(std::string_view text, const ParseOptions& opts) {
    auto lines = split_lines(text);
    if (lines.empty())
        throw GenerError(errc::empty_file, fail_class::data, "expression file is empty");

    auto header = split_tabs(lines[0]);
    if (header.size() < 2)
        throw GenerError(errc::empty_file, fail_class::data,
                         "expression header has no condition columns");
    const std::size_t L = header.size() - 1;

    std::vector<std::string> conditions;
    conditions.reserve(L);
    for (std::size_t c = 1; c < header.size(); ++c) conditions.emplace_back(header[c]);

    std::vector<std::string> genes;
    std::vector<double> values;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        auto cells = split_tabs(lines[li]);
        if (cells.size() != L + 1)
            throw GenerError(errc::ragged_row, fail_class::data,
                             "row on line " + std::to_string(li + 1) + " has " +
                                 std::to_string(cells.size() - 1) + " values, expected " +
                                 std::to_string(L));
        std::string name = normalize_name(cells[0], opts.uppercase_genes);
        check_gene_name(name, li + 1);
        genes.push_back(std::move(name));
        for (std::size_t c = 1; c < cells.size(); ++c)
            values.push_back(parse_double(cells[c], li + 1));
    }

    return ExpressionMatrix(std::move(genes), std::move(conditions), std::move(values));
}

std::pair<std::vector<std::pair<GeneId, GeneId>>, IngestStats> parse_interactions_tsv(
    std::string_view text, const ExpressionMatrix& matrix, const ParseOptions& opts) {
    auto lines = split_lines(text);
    std::size_t first = opts.skip_header && !lines.empty() ? 1 : 0;

    std::vector<std::pair<GeneId, GeneId>> kept;
    IngestStats stats;
    std::set<std::pair<std::string, std::string>> seen;

    bool any_row = false;
    for (std::size_t li = first; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        any_row = true;
        auto cells = split_tabs(lines[li]);
        if (cells.size() < 2)
            throw GenerError(errc::malformed_row, fail_class::data,
                             "interaction row on line " + std::to_string(li + 1) +
                                 " has fewer than 2 columns");
        ++stats.raw;
        std::string a = normalize_name(cells[0], opts.uppercase_genes);
        std::string b = normalize_name(cells[1], opts.uppercase_genes);
        check_gene_name(a, li + 1);
        check_gene_name(b, li + 1);
        if (a == b) {
            ++stats.dropped_self;
            continue;
        }
        if (!matrix.contains(a) || !matrix.contains(b)) {
            ++stats.dropped_unknown;
            continue;
        }
        if (b < a) std::swap(a, b);
        if (!seen.emplace(a, b).second) {
            ++stats.dropped_duplicate;
            continue;
        }
        kept.emplace_back(GeneId{std::move(a)}, GeneId{std::move(b)});
        ++stats.kept;
    }

    if (!any_row)
        throw GenerError(errc::empty_file, fail_class::data, "interactions file has no rows");
    return {std::move(kept), stats};
}

std::vector<std::pair<GeneId, GeneId>> sample_negatives(
    const ExpressionMatrix& matrix, const std::vector<std::pair<GeneId, GeneId>>& positives,
    std::uint64_t count, std::uint64_t seed) {
    const std::uint64_t n = matrix.n_genes();
    const std::uint64_t universe = n < 2 ? 0 : n * (n - 1) / 2;

    std::unordered_set<std::uint64_t> positive_keys;
    positive_keys.reserve(positives.size() * 2);
    for (const auto& [a, b] : positives) {
        auto key = canonical_indices(matrix, matrix.index_of(a), matrix.index_of(b));
        positive_keys.insert(pack(key));
    }

    const std::uint64_t available = universe - positive_keys.size();
    if (count > available)
        throw GenerError(errc::insufficient_universe, fail_class::data,
                         "requested " + std::to_string(count) + " negatives but only " +
                             std::to_string(available) + " non-positive pairs exist");

    Xoshiro256 rng(seed);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> picked;
    picked.reserve(count);

    const bool dense = positive_keys.size() > universe / 2 || count > available / 2;
    if (dense) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates;
        candidates.reserve(available);
        for (std::uint64_t i = 0; i < n; ++i)
            for (std::uint64_t j = i + 1; j < n; ++j) {
                auto key = canonical_indices(matrix, i, j);
                if (!positive_keys.count(pack(key))) candidates.push_back(key);
            }
        for (std::uint64_t k = 0; k < count; ++k) {
            const std::uint64_t j = k + rng.bounded(candidates.size() - k);
            std::swap(candidates[k], candidates[j]);
            picked.push_back(candidates[k]);
        }
    } else {
        std::unordered_set<std::uint64_t> visited;
        visited.reserve(count * 2);
        while (picked.size() < count) {
            const std::uint64_t i = rng.bounded(n);
            const std::uint64_t j = rng.bounded(n);
            if (i == j) continue;
            auto key = canonical_indices(matrix, i, j);
            const std::uint64_t packed = pack(key);
            if (positive_keys.count(packed) || !visited.insert(packed).second) continue;
            picked.push_back(key);
        }
    }

    std::vector<std::pair<GeneId, GeneId>> out;
    out.reserve(picked.size());
    for (auto [i, j] : picked)
        out.emplace_back(GeneId{matrix.genes()[i]}, GeneId{matrix.genes()[j]});
    return out;
}

void SynthSpec::validate() const {
    if (n_modules < 1 || genes_per_module < 1 || n_modules * genes_per_module < 4)
        throw GenerError(errc::config_invalid, fail_class::config,
                         "synthetic spec needs at least 4 genes total");
    if (length < 2)
        throw GenerError(errc::config_invalid, fail_class::config,
                         "synthetic spec needs length >= 2");
    if (noise_sigma < 0.0)
        throw GenerError(errc::config_invalid, fail_class::config,
                         "noise sigma must be non-negative");
}

std::pair<ExpressionMatrix, LabeledDataset> generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_modules * spec.genes_per_module;

    std::vector<std::string> genes;
    genes.reserve(n);
    char buf[32];
    for (std::size_t m = 0; m < spec.n_modules; ++m)
        for (std::size_t g = 0; g < spec.genes_per_module; ++g) {
            std::snprintf(buf, sizeof(buf), "M%04zuG%04zu", m, g);
            genes.emplace_back(buf);
        }

    std::vector<std::string> conditions;
    conditions.reserve(spec.length);
    for (std::size_t c = 0; c < spec.length; ++c) {
        std::snprintf(buf, sizeof(buf), "C%04zu", c);
        conditions.emplace_back(buf);
    }

    // Draw order: per module, the latent signal first, then each member
    // gene's noise vector, all element by element.
    Xoshiro256 rng(derive_seed(spec.seed, "synthetic-expression"));
    std::vector<double> values(n * spec.length);
    std::vector<double> signal(spec.length);
    for (std::size_t m = 0; m < spec.n_modules; ++m) {
        for (std::size_t c = 0; c < spec.length; ++c) signal[c] = rng.normal();
        for (std::size_t g = 0; g < spec.genes_per_module; ++g) {
            const std::size_t row = m * spec.genes_per_module + g;
            for (std::size_t c = 0; c < spec.length; ++c)
                values[row * spec.length + c] = signal[c] + spec.noise_sigma * rng.normal();
        }
    }

    ExpressionMatrix matrix(std::move(genes), std::move(conditions), std::move(values));

    std::vector<std::pair<GeneId, GeneId>> positives;
    for (std::size_t m = 0; m < spec.n_modules; ++m)
        for (std::size_t g1 = 0; g1 < spec.genes_per_module; ++g1)
            for (std::size_t g2 = g1 + 1; g2 < spec.genes_per_module; ++g2) {
                const std::size_t i = m * spec.genes_per_module + g1;
                const std::size_t j = m * spec.genes_per_module + g2;
                positives.emplace_back(GeneId{matrix.genes()[i]}, GeneId{matrix.genes()[j]});
            }

    auto negatives = sample_negatives(matrix, positives, positives.size(),
                                      derive_seed(spec.seed, "synthetic-negatives"));

    LabeledDataset dataset;
    dataset.matrix_ref = "synthetic";
    dataset.pairs.reserve(positives.size() + negatives.size());
    for (auto& [a, b] : positives) dataset.pairs.push_back(PairExample{a, b, 1});
    for (auto& [a, b] : negatives) dataset.pairs.push_back(PairExample{a, b, 0});
    return {std::move(matrix), std::move(dataset)};
}

std::string render_expression_tsv(const ExpressionMatrix& matrix) {
    std::string out = "gene";
    for (const auto& c : matrix.conditions()) {
        out += '\t';
        out += c;
    }
    out += '\n';
    for (std::size_t i = 0; i < matrix.n_genes(); ++i) {
        out += matrix.genes()[i];
        for (double v : matrix.row(i)) {
            out += '\t';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string render_interactions_tsv(const std::vector<PairExample>& pairs, int label) {
    std::string out;
    for (const auto& p : pairs) {
        if (p.label != label) continue;
        out += p.a.name;
        out += '\t';
        out += p.b.name;
        out += '\n';
    }
    return out;
}

}  // namespace gener::ingest
