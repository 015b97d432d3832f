#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gener/model.hpp"
#include "gener/trainer.hpp"

namespace gener::model {

struct LeaderboardRow {
    std::size_t point_index = 0;
    GenerConfig config;
    double val_auroc_micro = 0.0;
    double val_loss = 0.0;
};

struct GridSearchResult {
    GenerConfig best;
    train::Checkpoint best_checkpoint;
    train::TrainHistory best_history;
    std::vector<LeaderboardRow> leaderboard;  // sorted best first
};

// One training run per grid point, each with run seed = seed XOR point
// index. Ranking: validation micro-AUROC descending, ties by lower
// validation loss, then lexicographic config order. Points are independent;
// `jobs` workers execute them with at-most-once dispatch and the result is
// identical for any job count.
GridSearchResult grid_search(const GridSpec& grid, const LabeledDataset& dataset,
                             const ExpressionMatrix& matrix, const GenerConfig& base,
                             const train::TrainOptions& base_opts,
                             const std::string& architecture, std::uint64_t seed,
                             std::size_t jobs = 1);

std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows);

}  // namespace gener::model
