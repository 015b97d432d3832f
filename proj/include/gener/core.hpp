#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gener/errors.hpp"

namespace gener {

struct GeneId {
    std::string name;

    auto operator<=>(const GeneId&) const = default;
};

enum class Split { train, val, test, unassigned };

const char* split_name(Split s);
Split split_from_name(const std::string& s);

// Gene pairs are unordered; storage is canonical (a.name < b.name by byte
// order) so (x,y) and (y,x) collapse to one record.
std::pair<GeneId, GeneId> canonicalize_pair(const GeneId& a, const GeneId& b);

struct PairExample {
    GeneId a;
    GeneId b;
    int label = 0;  // 1 = interaction, 0 = no interaction
    Split split = Split::unassigned;
};

PairExample make_pair_example(GeneId a, GeneId b, int label, Split split = Split::unassigned);

// Dense genes x conditions table. Immutable after construction; row lookup
// by gene name is O(1).
class ExpressionMatrix {
public:
    ExpressionMatrix() = default;
    ExpressionMatrix(std::vector<std::string> genes, std::vector<std::string> conditions,
                     std::vector<double> values);

    std::size_t n_genes() const { return genes_.size(); }
    std::size_t length() const { return conditions_.size(); }  // L

    const std::vector<std::string>& genes() const { return genes_; }
    const std::vector<std::string>& conditions() const { return conditions_; }
    const std::vector<double>& values() const { return values_; }

    bool contains(const std::string& gene) const { return index_.count(gene) != 0; }
    std::size_t index_of(const GeneId& gene) const;  // throws UnknownGene

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * length(), length()};
    }

private:
    std::vector<std::string> genes_;
    std::vector<std::string> conditions_;
    std::vector<double> values_;  // row-major, n_genes x L
    std::unordered_map<std::string, std::size_t> index_;
};

std::vector<double> get_expression(const ExpressionMatrix& matrix, const GeneId& gene);

// The two network inputs for one pair: the (2,L) stacked matrix (row-major)
// and the length-L element product of its rows.
struct PairFeatures {
    std::size_t length = 0;
    std::vector<double> stacked;  // 2*L
    std::vector<double> product;  // L
};

struct LabeledDataset {
    std::vector<PairExample> pairs;
    std::string matrix_ref;

    // Checks the dataset invariants: genes exist in `matrix`, pairs are
    // canonical, no duplicate canonical pairs.
    void validate_against(const ExpressionMatrix& matrix) const;

    std::size_t count_label(int label) const;
    std::size_t count_split(Split split) const;
};

}  // namespace gener
