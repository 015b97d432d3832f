#include "gener/core.hpp"

#include <cmath>
#include <set>

namespace gener {

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
        case Split::unassigned: return "unassigned";
    }
    return "unassigned";
}

Split split_from_name(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    if (s == "unassigned") return Split::unassigned;
    throw GenerError(errc::malformed_row, fail_class::data, "unknown split name: " + s);
}

std::pair<GeneId, GeneId> canonicalize_pair(const GeneId& a, const GeneId& b) {
    if (a.name == b.name)
        throw GenerError(errc::self_pair, fail_class::data,
                         "self pair not allowed: " + a.name);
    if (a.name < b.name) return {a, b};
    return {b, a};
}

PairExample make_pair_example(GeneId a, GeneId b, int label, Split split) {
    auto [lo, hi] = canonicalize_pair(a, b);
    return PairExample{std::move(lo), std::move(hi), label, split};
}

ExpressionMatrix::ExpressionMatrix(std::vector<std::string> genes,
                                   std::vector<std::string> conditions,
                                   std::vector<double> values)
    : genes_(std::move(genes)), conditions_(std::move(conditions)), values_(std::move(values)) {
    if (conditions_.empty())
        throw GenerError(errc::empty_file, fail_class::data, "expression matrix has no conditions");
    if (values_.size() != genes_.size() * conditions_.size())
        throw GenerError(errc::shape_mismatch, fail_class::data,
                         "expression matrix value count does not match genes x conditions");
    for (double v : values_)
        if (!std::isfinite(v))
            throw GenerError(errc::non_numeric, fail_class::data,
                             "expression matrix contains a non-finite value");
    index_.reserve(genes_.size());
    for (std::size_t i = 0; i < genes_.size(); ++i) {
        auto [it, inserted] = index_.emplace(genes_[i], i);
        if (!inserted)
            throw GenerError(errc::duplicate_gene, fail_class::data,
                             "duplicate gene name: " + genes_[i]);
    }
}

std::size_t ExpressionMatrix::index_of(const GeneId& gene) const {
    auto it = index_.find(gene.name);
    if (it == index_.end())
        throw GenerError(errc::unknown_gene, fail_class::data, "unknown gene: " + gene.name);
    return it->second;
}

std::vector<double> get_expression(const ExpressionMatrix& matrix, const GeneId& gene) {
    auto r = matrix.row(matrix.index_of(gene));
    return {r.begin(), r.end()};
}

void LabeledDataset::validate_against(const ExpressionMatrix& matrix) const {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : pairs) {
        matrix.index_of(p.a);
        matrix.index_of(p.b);
        if (!(p.a.name < p.b.name))
            throw GenerError(errc::malformed_row, fail_class::data,
                             "pair not in canonical order: " + p.a.name + "," + p.b.name);
        if (!seen.emplace(p.a.name, p.b.name).second)
            throw GenerError(errc::malformed_row, fail_class::data,
                             "duplicate canonical pair: " + p.a.name + "," + p.b.name);
    }
}

std::size_t LabeledDataset::count_label(int label) const {
    std::size_t n = 0;
    for (const auto& p : pairs) n += (p.label == label);
    return n;
}

std::size_t LabeledDataset::count_split(Split split) const {
    std::size_t n = 0;
    for (const auto& p : pairs) n += (p.split == split);
    return n;
}

}  // namespace gener
