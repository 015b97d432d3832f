#include "gener/grid.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "gener/io_util.hpp"

namespace gener::model {

namespace {

struct PointResult {
    LeaderboardRow row;
    train::TrainRun run;
};

}  // namespace

GridSearchResult grid_search(const GridSpec& grid, const LabeledDataset& dataset,
                             const ExpressionMatrix& matrix, const GenerConfig& base,
                             const train::TrainOptions& base_opts,
                             const std::string& architecture, std::uint64_t seed,
                             std::size_t jobs) {
    const std::size_t n = grid.cardinality();
    if (n == 0)
        throw GenerError(errc::empty_grid, fail_class::config, "grid has no points");

    std::vector<PointResult> results(n);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                GenerConfig config = grid.point(base, i);
                train::TrainOptions opts = base_opts;
                opts.lr = config.lr;
                opts.batch_size = config.batch_size;
                auto run = train::run_training_dispatch(architecture, config, dataset, matrix,
                                                        opts, seed ^ i);
                const auto& best = run.history.best();
                results[i] = PointResult{
                    LeaderboardRow{i, config, best.val_auroc_micro, best.val_loss},
                    std::move(run)};
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = results[a].row;
        const auto& rb = results[b].row;
        if (ra.val_auroc_micro != rb.val_auroc_micro)
            return ra.val_auroc_micro > rb.val_auroc_micro;
        if (ra.val_loss != rb.val_loss) return ra.val_loss < rb.val_loss;
        return ra.config.canonical_string() < rb.config.canonical_string();
    });

    GridSearchResult out;
    out.leaderboard.reserve(n);
    for (std::size_t i : order) out.leaderboard.push_back(results[i].row);
    PointResult& best = results[order.front()];
    out.best = best.row.config;
    out.best_checkpoint = std::move(best.run.checkpoint);
    out.best_history = std::move(best.run.history);
    return out;
}

std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows) {
    std::string out =
        "rank,config_hash,lr,dropout_rate,conv_filters,dense_units,val_auroc_micro,val_loss\n";
    std::size_t rank = 1;
    for (const auto& r : rows) {
        out += std::to_string(rank++);
        out += ',';
        out += r.config.hash_hex();
        out += ',';
        out += format_double(r.config.lr);
        out += ',';
        out += format_double(r.config.dropout_rate);
        out += ',';
        for (std::size_t i = 0; i < 3; ++i) {
            if (i) out += ';';
            out += std::to_string(r.config.conv_filters[i]);
        }
        out += ',';
        out += std::to_string(r.config.dense_units);
        out += ',';
        out += format_double(r.val_auroc_micro);
        out += ',';
        out += format_double(r.val_loss);
        out += '\n';
    }
    return out;
}

}  // namespace gener::model
