#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gener/layers.hpp"

namespace gener::net {

// Numerically stable (max-shifted) softmax over [batch,2] logits with mean
// cross-entropy; grad_logits = (softmax - onehot) / batch.
template <class Real>
struct LossResult {
    double loss = 0.0;
    Tensor<Real> grad_logits;
    std::vector<std::array<double, 2>> probabilities;
};

template <class Real>
LossResult<Real> softmax_cross_entropy(const Tensor<Real>& logits, const std::vector<int>& labels) {
    if (logits.rank() != 2 || logits.dim(1) != 2 || logits.dim(0) != labels.size())
        throw GenerError(errc::shape_mismatch, fail_class::data,
                         "softmax cross entropy expects [batch,2] logits");
    const std::size_t batch = logits.dim(0);
    LossResult<Real> result;
    result.grad_logits = Tensor<Real>(logits.shape);
    result.probabilities.resize(batch);
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        const int label = labels[b];
        if (label != 0 && label != 1)
            throw GenerError(errc::invalid_label, fail_class::data,
                             "labels must be 0 or 1");
        const double z0 = static_cast<double>(logits.at(b, 0));
        const double z1 = static_cast<double>(logits.at(b, 1));
        const double zmax = std::max(z0, z1);
        const double e0 = std::exp(z0 - zmax);
        const double e1 = std::exp(z1 - zmax);
        const double denom = e0 + e1;
        const double p0 = e0 / denom;
        const double p1 = e1 / denom;
        result.probabilities[b] = {p0, p1};
        const double p_true = label == 0 ? p0 : p1;
        total += -std::log(std::max(p_true, 1e-300));
        result.grad_logits.at(b, 0) =
            static_cast<Real>((p0 - (label == 0 ? 1.0 : 0.0)) / static_cast<double>(batch));
        result.grad_logits.at(b, 1) =
            static_cast<Real>((p1 - (label == 1 ? 1.0 : 0.0)) / static_cast<double>(batch));
    }
    result.loss = total / static_cast<double>(batch);
    return result;
}

// Two parallel branches fused by concatenation ahead of the classifier
// head. branch_a consumes the stacked (batch,2,L) signal; branch_b, when
// present, consumes the (batch,L) element-product vector. With an empty
// branch_b the head runs on branch_a's features alone; with an empty head
// the branch_a output is the network output.
template <class Real>
class Network {
public:
    std::string architecture = "custom";
    std::vector<LayerPtr<Real>> branch_a;
    std::vector<LayerPtr<Real>> branch_b;
    std::vector<LayerPtr<Real>> head;

    Tensor<Real> forward(const Tensor<Real>& stacked, const Tensor<Real>& product, Phase phase,
                         Xoshiro256* rng) {
        Tensor<Real> fa = run(branch_a, stacked, phase, rng);
        if (branch_b.empty() && head.empty()) return fa;
        if (branch_b.empty()) return run(head, fa, phase, rng);

        Tensor<Real> fb = run(branch_b, product, phase, rng);
        feat_a_ = fa.dim(1);
        feat_b_ = fb.dim(1);
        const std::size_t batch = fa.dim(0);
        Tensor<Real> fused({batch, feat_a_ + feat_b_});
        for (std::size_t b = 0; b < batch; ++b) {
            std::copy_n(&fa.data[b * feat_a_], feat_a_, &fused.data[b * (feat_a_ + feat_b_)]);
            std::copy_n(&fb.data[b * feat_b_], feat_b_,
                        &fused.data[b * (feat_a_ + feat_b_) + feat_a_]);
        }
        return run(head, fused, phase, rng);
    }

    void backward(const Tensor<Real>& grad_logits) {
        if (branch_b.empty() && head.empty()) {
            run_backward(branch_a, grad_logits);
            return;
        }
        if (branch_b.empty()) {
            Tensor<Real> g = run_backward_ret(head, grad_logits);
            run_backward(branch_a, g);
            return;
        }
        Tensor<Real> g = run_backward_ret(head, grad_logits);
        const std::size_t batch = g.dim(0);
        Tensor<Real> ga({batch, feat_a_});
        Tensor<Real> gb({batch, feat_b_});
        for (std::size_t b = 0; b < batch; ++b) {
            std::copy_n(&g.data[b * (feat_a_ + feat_b_)], feat_a_, &ga.data[b * feat_a_]);
            std::copy_n(&g.data[b * (feat_a_ + feat_b_) + feat_a_], feat_b_,
                        &gb.data[b * feat_b_]);
        }
        run_backward(branch_a, ga);
        run_backward(branch_b, gb);
    }

    std::vector<Parameter<Real>*> parameters() {
        std::vector<Parameter<Real>*> out;
        for (auto* stage : {&branch_a, &branch_b, &head})
            for (auto& layer : *stage) layer->collect_parameters(out);
        return out;
    }

    std::vector<std::pair<std::string, Tensor<Real>*>> state_tensors() {
        std::vector<std::pair<std::string, Tensor<Real>*>> out;
        for (auto* stage : {&branch_a, &branch_b, &head})
            for (auto& layer : *stage) layer->collect_state(out);
        return out;
    }

    void set_dropout_frozen(bool frozen) {
        for (auto* stage : {&branch_a, &branch_b, &head})
            for (auto& layer : *stage)
                if (auto* d = dynamic_cast<DropoutLayer<Real>*>(layer.get()))
                    d->set_frozen(frozen);
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        for (auto* p : parameters()) n += p->value.size();
        return n;
    }

private:
    static Tensor<Real> run(std::vector<LayerPtr<Real>>& layers, const Tensor<Real>& x,
                            Phase phase, Xoshiro256* rng) {
        Tensor<Real> cur = x;
        for (auto& layer : layers) cur = layer->forward(cur, phase, rng);
        return cur;
    }

    static void run_backward(std::vector<LayerPtr<Real>>& layers, const Tensor<Real>& g) {
        Tensor<Real> cur = g;
        for (auto it = layers.rbegin(); it != layers.rend(); ++it) cur = (*it)->backward(cur);
    }

    static Tensor<Real> run_backward_ret(std::vector<LayerPtr<Real>>& layers,
                                         const Tensor<Real>& g) {
        Tensor<Real> cur = g;
        for (auto it = layers.rbegin(); it != layers.rend(); ++it) cur = (*it)->backward(cur);
        return cur;
    }

    std::size_t feat_a_ = 0;
    std::size_t feat_b_ = 0;
};

// He-normal weights (std = sqrt(2/fan_in)), zero biases, gamma 1 / beta 0.
// Parameters are visited in network order, elements in row-major order, all
// normal draws from one stream, so a seed pins every weight.
template <class Real>
void init_params(Network<Real>& network, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    for (auto* p : network.parameters()) {
        switch (p->init) {
            case InitKind::he_weight: {
                const double std_dev = std::sqrt(2.0 / static_cast<double>(p->fan_in));
                for (std::size_t i = 0; i < p->value.size(); ++i)
                    p->value[i] = static_cast<Real>(std_dev * rng.normal());
                break;
            }
            case InitKind::zero:
                p->value.fill(Real(0));
                break;
            case InitKind::one:
                p->value.fill(Real(1));
                break;
        }
        p->grad.fill(Real(0));
        p->m.fill(Real(0));
        p->v.fill(Real(0));
        p->step_count = 0;
    }
}

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_err = 0.0;
    bool pass = true;
};

// Central-difference check (h=1e-5) of every parameter tensor against the
// analytic backward pass. Exhaustive per-element probing of the full model
// is quadratic-cost in practice, so each tensor is probed at up to
// `max_checks_per_param` seeded element positions (all of them when the
// tensor is small); every parameter tensor appears in the report.
// Requires Real=double and frozen dropout masks for exactness.
template <class Real>
GradCheckReport gradient_check(Network<Real>& network, const Tensor<Real>& stacked,
                               const Tensor<Real>& product, const std::vector<int>& labels,
                               double tolerance, std::size_t max_checks_per_param = 128,
                               std::uint64_t seed = 0x6772616463686bULL, double h = 1e-5);

template <class Real>
GradCheckReport gradient_check_impl(Network<Real>& network, const Tensor<Real>& stacked,
                                    const Tensor<Real>& product, const std::vector<int>& labels,
                                    double tolerance, std::size_t max_checks_per_param,
                                    std::uint64_t seed, double h) {
    auto loss_at = [&]() {
        Tensor<Real> logits = network.forward(stacked, product, Phase::train, nullptr);
        return softmax_cross_entropy(logits, labels).loss;
    };

    // Analytic gradients once.
    {
        Tensor<Real> logits = network.forward(stacked, product, Phase::train, nullptr);
        auto loss = softmax_cross_entropy(logits, labels);
        network.backward(loss.grad_logits);
    }
    std::vector<std::vector<Real>> analytic;
    auto params = network.parameters();
    analytic.reserve(params.size());
    for (auto* p : params) analytic.push_back(p->grad.data);

    GradCheckReport report;
    Xoshiro256 rng(seed);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto* p = params[pi];
        GradCheckEntry entry;
        entry.name = p->name;

        std::vector<std::size_t> positions;
        if (p->value.size() <= max_checks_per_param) {
            positions.resize(p->value.size());
            for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
        } else {
            positions.reserve(max_checks_per_param);
            for (std::size_t k = 0; k < max_checks_per_param; ++k)
                positions.push_back(static_cast<std::size_t>(rng.bounded(p->value.size())));
        }

        for (std::size_t at : positions) {
            const Real saved = p->value[at];
            p->value[at] = saved + static_cast<Real>(h);
            const double lp = loss_at();
            p->value[at] = saved - static_cast<Real>(h);
            const double lm = loss_at();
            p->value[at] = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            const double a = static_cast<double>(analytic[pi][at]);
            const double scale = std::max(std::abs(a), std::abs(numeric));
            const double err = scale < 1e-8 ? std::abs(a - numeric) : std::abs(a - numeric) / scale;
            entry.max_rel_err = std::max(entry.max_rel_err, err);
            ++entry.checked;
        }
        entry.pass = entry.max_rel_err < tolerance;
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.pass = report.pass && entry.pass;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

template <class Real>
GradCheckReport gradient_check(Network<Real>& network, const Tensor<Real>& stacked,
                               const Tensor<Real>& product, const std::vector<int>& labels,
                               double tolerance, std::size_t max_checks_per_param,
                               std::uint64_t seed, double h) {
    static_assert(sizeof(Real) == 8, "gradient_check requires the 64-bit engine");
    return gradient_check_impl(network, stacked, product, labels, tolerance, max_checks_per_param,
                               seed, h);
}

}  // namespace gener::net
