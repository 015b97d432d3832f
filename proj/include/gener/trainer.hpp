#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gener/core.hpp"
#include "gener/metrics.hpp"
#include "gener/model.hpp"
#include "gener/network.hpp"
#include "gener/preprocess.hpp"

namespace gener::train {

// fast32 is the default engine; check64 exists for gradient checking and
// numeric debugging. Checkpoint payloads are 32-bit either way.
enum class Precision { fast32, check64 };

Precision precision_from_name(const std::string& name);
const char* precision_name(Precision p);

struct TrainOptions {
    int max_epochs = 100;
    int patience = 10;
    std::size_t batch_size = 64;
    double lr = 1e-3;
    std::uint64_t seed = 42;
    Precision precision = Precision::fast32;
    bool shuffle_each_epoch = true;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_auroc_micro = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;  // 1-based

    const EpochRecord& best() const { return epochs.at(static_cast<std::size_t>(best_epoch - 1)); }
};

std::string history_csv(const TrainHistory& history);

// Serialized model: magic GENR, u32 LE version (=1), u64 LE header length,
// UTF-8 JSON header (architecture, config, seed, tensor manifest), then the
// tensors as 32-bit LE floats in manifest order. The manifest covers
// trainable parameters and batchnorm running statistics.
struct Checkpoint {
    std::string architecture;
    model::GenerConfig config;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::vector<std::size_t>>> manifest;
    std::vector<float> payload;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_bytes(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint_bytes(std::string_view bytes);

template <class Real>
Checkpoint snapshot_network(net::Network<Real>& network, const model::GenerConfig& config,
                            std::uint64_t seed) {
    Checkpoint cp;
    cp.architecture = network.architecture;
    cp.config = config;
    cp.seed = seed;
    auto push = [&](const std::string& name, const net::Tensor<Real>& t) {
        cp.manifest.emplace_back(name, t.shape);
        for (Real v : t.data) cp.payload.push_back(static_cast<float>(v));
    };
    for (auto* p : network.parameters()) push(p->name, p->value);
    for (auto& [name, t] : network.state_tensors()) push(name, *t);
    return cp;
}

template <class Real>
net::Network<Real> restore_network(const Checkpoint& checkpoint) {
    net::Network<Real> network =
        model::build_architecture<Real>(checkpoint.architecture, checkpoint.config);
    std::vector<std::pair<std::string, net::Tensor<Real>*>> slots;
    for (auto* p : network.parameters()) slots.emplace_back(p->name, &p->value);
    for (auto& [name, t] : network.state_tensors()) slots.emplace_back(name, t);

    if (slots.size() != checkpoint.manifest.size())
        throw GenerError(errc::manifest_mismatch, fail_class::data,
                         "checkpoint manifest does not match the architecture");
    std::size_t offset = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& [name, shape] = checkpoint.manifest[i];
        auto& [slot_name, tensor] = slots[i];
        if (name != slot_name || shape != tensor->shape)
            throw GenerError(errc::manifest_mismatch, fail_class::data,
                             "checkpoint tensor mismatch at " + name);
        for (std::size_t k = 0; k < tensor->size(); ++k)
            tensor->data[k] = static_cast<Real>(checkpoint.payload[offset + k]);
        offset += tensor->size();
    }
    return network;
}

// Batch assembly: featurize each pair at matrix precision and cast into the
// engine's scalar type.
template <class Real>
struct Batch {
    net::Tensor<Real> stacked;  // [batch, 2, L]
    net::Tensor<Real> product;  // [batch, L]
    std::vector<int> labels;
};

template <class Real>
Batch<Real> assemble_batch(std::span<const PairExample* const> pairs,
                           const ExpressionMatrix& matrix) {
    const std::size_t batch = pairs.size();
    const std::size_t L = matrix.length();
    Batch<Real> out{net::Tensor<Real>({batch, 2, L}), net::Tensor<Real>({batch, L}), {}};
    out.labels.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const PairFeatures f = prep::featurize(*pairs[b], matrix);
        for (std::size_t c = 0; c < L; ++c) {
            out.stacked.at(b, 0, c) = static_cast<Real>(f.stacked[c]);
            out.stacked.at(b, 1, c) = static_cast<Real>(f.stacked[L + c]);
            out.product.at(b, c) = static_cast<Real>(f.product[c]);
        }
        out.labels.push_back(pairs[b]->label);
    }
    return out;
}

template <class Real>
std::vector<std::array<double, 2>> softmax_probs(const net::Tensor<Real>& logits) {
    std::vector<std::array<double, 2>> probs(logits.dim(0));
    for (std::size_t b = 0; b < logits.dim(0); ++b) {
        const double z0 = static_cast<double>(logits.at(b, 0));
        const double z1 = static_cast<double>(logits.at(b, 1));
        const double zmax = std::max(z0, z1);
        const double e0 = std::exp(z0 - zmax);
        const double e1 = std::exp(z1 - zmax);
        probs[b] = {e0 / (e0 + e1), e1 / (e0 + e1)};
    }
    return probs;
}

namespace detail {

inline std::vector<const PairExample*> select_split(const LabeledDataset& dataset, Split split) {
    std::vector<const PairExample*> out;
    for (const auto& p : dataset.pairs)
        if (p.split == split) out.push_back(&p);
    return out;
}

constexpr std::size_t kInferBatch = 256;

// Inference-mode probabilities for a pair list; output is independent of
// the chunking because inference is a per-example function.
template <class Real>
std::vector<std::array<double, 2>> infer_probabilities(net::Network<Real>& network,
                                                       std::span<const PairExample* const> pairs,
                                                       const ExpressionMatrix& matrix) {
    std::vector<std::array<double, 2>> probs;
    probs.reserve(pairs.size());
    for (std::size_t start = 0; start < pairs.size(); start += kInferBatch) {
        const std::size_t n = std::min(kInferBatch, pairs.size() - start);
        Batch<Real> batch = assemble_batch<Real>(pairs.subspan(start, n), matrix);
        net::Tensor<Real> logits =
            network.forward(batch.stacked, batch.product, net::Phase::infer, nullptr);
        auto chunk = softmax_probs(logits);
        probs.insert(probs.end(), chunk.begin(), chunk.end());
    }
    return probs;
}

inline double mean_cross_entropy(const std::vector<std::array<double, 2>>& probs,
                                 const std::vector<int>& labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
        total += -std::log(std::max(probs[i][static_cast<std::size_t>(labels[i])], 1e-300));
    return total / static_cast<double>(probs.size());
}

}  // namespace detail

// Mini-batch Adam with per-epoch validation. Model selection maximizes
// validation micro-AUROC (earliest epoch on ties); training stops after
// `patience` epochs without improvement. The returned checkpoint is the
// best epoch's parameter and running-stat snapshot.
//
// Per-run stream draw order, epoch by epoch: the train-split shuffle (when
// enabled), then every dropout mask of that epoch's batches in execution
// order. Trailing batches of size 1 are dropped (batchnorm train minimum).
template <class Real>
std::pair<Checkpoint, TrainHistory> train_network(net::Network<Real>& network,
                                                  const LabeledDataset& dataset,
                                                  const ExpressionMatrix& matrix,
                                                  const model::GenerConfig& config,
                                                  const TrainOptions& opts) {
    opts.validate();
    auto train_pairs = detail::select_split(dataset, Split::train);
    auto val_pairs = detail::select_split(dataset, Split::val);
    if (train_pairs.empty() || val_pairs.empty())
        throw GenerError(errc::empty_split, fail_class::training,
                         "training needs non-empty train and val splits");
    std::vector<int> val_labels;
    val_labels.reserve(val_pairs.size());
    for (auto* p : val_pairs) val_labels.push_back(p->label);
    const std::size_t val_pos = static_cast<std::size_t>(
        std::count(val_labels.begin(), val_labels.end(), 1));
    if (val_pos == 0 || val_pos == val_labels.size())
        throw GenerError(errc::single_class, fail_class::training,
                         "validation split needs both classes for model selection");

    Xoshiro256 run_rng(opts.seed);
    std::vector<const PairExample*> order = train_pairs;

    Checkpoint best_checkpoint;
    TrainHistory history;
    double best_auroc = -1.0;
    int epochs_since_best = 0;

    for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        if (opts.shuffle_each_epoch) run_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
            const std::size_t n = std::min(opts.batch_size, order.size() - start);
            if (n < 2) break;
            Batch<Real> batch =
                assemble_batch<Real>(std::span(order).subspan(start, n), matrix);
            net::Tensor<Real> logits =
                network.forward(batch.stacked, batch.product, net::Phase::train, &run_rng);
            auto loss = net::softmax_cross_entropy(logits, batch.labels);
            if (!std::isfinite(loss.loss))
                throw GenerError(errc::diverged_loss, fail_class::training,
                                 "training loss diverged at epoch " + std::to_string(epoch));
            network.backward(loss.grad_logits);
            for (auto* p : network.parameters()) net::adam_step(*p, opts.lr);
            loss_sum += loss.loss * static_cast<double>(n);
            seen += n;
        }
        if (seen == 0)
            throw GenerError(errc::empty_split, fail_class::training,
                             "train split yields no usable batches");

        auto val_probs = detail::infer_probabilities(network, std::span(val_pairs), matrix);
        metrics::MetricsReport val = metrics::score_probabilities(val_probs, val_labels);
        const double val_loss = detail::mean_cross_entropy(val_probs, val_labels);

        history.epochs.push_back(
            {epoch, loss_sum / static_cast<double>(seen), val_loss, val.auroc_micro});

        if (val.auroc_micro > best_auroc) {
            best_auroc = val.auroc_micro;
            history.best_epoch = epoch;
            best_checkpoint = snapshot_network(network, config, opts.seed);
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }
        if (epochs_since_best >= opts.patience) break;
    }
    return {std::move(best_checkpoint), std::move(history)};
}

template <class Real>
metrics::MetricsReport evaluate_network(net::Network<Real>& network, const LabeledDataset& dataset,
                                        Split split, const ExpressionMatrix& matrix) {
    auto pairs = detail::select_split(dataset, split);
    if (pairs.empty())
        throw GenerError(errc::empty_split, fail_class::data,
                         std::string("no pairs in split ") + split_name(split));
    std::vector<int> labels;
    labels.reserve(pairs.size());
    for (auto* p : pairs) labels.push_back(p->label);

    auto probs = detail::infer_probabilities(network, std::span(pairs), matrix);
    metrics::MetricsReport report = metrics::score_probabilities(probs, labels);
    report.n_train = dataset.count_split(Split::train);
    report.n_val = dataset.count_split(Split::val);
    report.n_test = dataset.count_split(Split::test);
    return report;
}

// Interaction-class probability per input pair, in input order. Pairs may
// be given in either orientation; featurization canonicalizes.
template <class Real>
std::vector<double> predict_network(net::Network<Real>& network,
                                    const std::vector<std::pair<GeneId, GeneId>>& pairs,
                                    const ExpressionMatrix& matrix) {
    std::vector<PairExample> examples;
    examples.reserve(pairs.size());
    for (const auto& [a, b] : pairs) examples.push_back(make_pair_example(a, b, 0));
    std::vector<const PairExample*> ptrs;
    ptrs.reserve(examples.size());
    for (const auto& e : examples) ptrs.push_back(&e);

    auto probs = detail::infer_probabilities(network, std::span(ptrs), matrix);
    std::vector<double> out;
    out.reserve(probs.size());
    for (const auto& p : probs) out.push_back(p[1]);
    return out;
}

// Convenience wrapper used by the CLI and the grid driver: build the
// requested architecture, seed the weights, and train. Stream derivation
// from the run seed: "init" for the weight draw, "train" for the run stream.
struct TrainRun {
    Checkpoint checkpoint;
    TrainHistory history;
};

template <class Real>
TrainRun run_training(const std::string& architecture, const model::GenerConfig& config,
                      const LabeledDataset& dataset, const ExpressionMatrix& matrix,
                      TrainOptions opts, std::uint64_t run_seed) {
    net::Network<Real> network = model::build_architecture<Real>(architecture, config);
    net::init_params(network, derive_seed(run_seed, "init"));
    opts.seed = derive_seed(run_seed, "train");
    auto [checkpoint, history] = train_network(network, dataset, matrix, config, opts);
    checkpoint.seed = run_seed;
    return {std::move(checkpoint), std::move(history)};
}

TrainRun run_training_dispatch(const std::string& architecture, const model::GenerConfig& config,
                               const LabeledDataset& dataset, const ExpressionMatrix& matrix,
                               const TrainOptions& opts, std::uint64_t run_seed);

metrics::MetricsReport evaluate_checkpoint(const Checkpoint& checkpoint,
                                           const LabeledDataset& dataset, Split split,
                                           const ExpressionMatrix& matrix, Precision precision);

std::vector<double> predict(const Checkpoint& checkpoint,
                            const std::vector<std::pair<GeneId, GeneId>>& pairs,
                            const ExpressionMatrix& matrix, Precision precision);

// |Pearson correlation| of two expression rows; 0 when either row is
// constant.
double abs_pearson(std::span<const double> a, std::span<const double> b);

// Scores every pair in the split by |Pearson r| of its expression rows and
// reports the same schema as model evaluation.
metrics::MetricsReport correlation_baseline(const LabeledDataset& dataset, Split split,
                                            const ExpressionMatrix& matrix);

}  // namespace gener::train
