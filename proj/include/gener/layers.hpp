#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gener/rng.hpp"
#include "gener/tensor.hpp"

namespace gener::net {

enum class Phase { train, infer };

enum class InitKind { he_weight, zero, one };

template <class Real>
struct Parameter {
    std::string name;
    InitKind init = InitKind::zero;
    std::size_t fan_in = 0;  // used by he_weight
    Tensor<Real> value;
    Tensor<Real> grad;
    Tensor<Real> m;
    Tensor<Real> v;
    std::uint64_t step_count = 0;

    Parameter(std::string n, std::vector<std::size_t> shape, InitKind kind, std::size_t fan)
        : name(std::move(n)), init(kind), fan_in(fan), value(shape), grad(shape), m(shape),
          v(shape) {}
};

// Standard bias-corrected Adam step; consumes the parameter's current grad.
template <class Real>
void adam_step(Parameter<Real>& p, double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8) {
    p.step_count += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(p.step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(p.step_count));
    for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = static_cast<double>(p.grad[i]);
        const double m = beta1 * static_cast<double>(p.m[i]) + (1.0 - beta1) * g;
        const double v = beta2 * static_cast<double>(p.v[i]) + (1.0 - beta2) * g * g;
        p.m[i] = static_cast<Real>(m);
        p.v[i] = static_cast<Real>(v);
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        p.value[i] = static_cast<Real>(static_cast<double>(p.value[i]) -
                                       lr * m_hat / (std::sqrt(v_hat) + eps));
    }
}

template <class Real>
class Layer {
public:
    virtual ~Layer() = default;

    virtual Tensor<Real> forward(const Tensor<Real>& x, Phase phase, Xoshiro256* rng) = 0;
    virtual Tensor<Real> backward(const Tensor<Real>& grad_out) = 0;

    virtual void collect_parameters(std::vector<Parameter<Real>*>& out) { (void)out; }
    // Non-trainable tensors that belong in a checkpoint (batchnorm running stats).
    virtual void collect_state(std::vector<std::pair<std::string, Tensor<Real>*>>& out) {
        (void)out;
    }
};

template <class Real>
using LayerPtr = std::unique_ptr<Layer<Real>>;

// y = x W + b for x [batch, in], W [in, out].
template <class Real>
class DenseLayer : public Layer<Real> {
public:
    DenseLayer(const std::string& name, std::size_t in, std::size_t out)
        : in_(in), out_(out),
          weight_(name + ".weight", {in, out}, InitKind::he_weight, in),
          bias_(name + ".bias", {out}, InitKind::zero, 0) {}

    Tensor<Real> forward(const Tensor<Real>& x, Phase, Xoshiro256*) override {
        if (x.rank() != 2 || x.dim(1) != in_)
            throw GenerError(errc::shape_mismatch, fail_class::data,
                             weight_.name + ": dense input shape mismatch");
        x_ = x;
        const std::size_t batch = x.dim(0);
        Tensor<Real> y({batch, out_});
        for (std::size_t b = 0; b < batch; ++b) {
            Real* yrow = &y.data[b * out_];
            for (std::size_t o = 0; o < out_; ++o) yrow[o] = bias_.value[o];
            const Real* xrow = &x.data[b * in_];
            for (std::size_t k = 0; k < in_; ++k) {
                const Real xv = xrow[k];
                const Real* wrow = &weight_.value.data[k * out_];
                for (std::size_t o = 0; o < out_; ++o) yrow[o] += xv * wrow[o];
            }
        }
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& g) override {
        const std::size_t batch = x_.dim(0);
        weight_.grad.fill(Real(0));
        bias_.grad.fill(Real(0));
        Tensor<Real> gx({batch, in_});
        for (std::size_t b = 0; b < batch; ++b) {
            const Real* grow = &g.data[b * out_];
            const Real* xrow = &x_.data[b * in_];
            Real* gxrow = &gx.data[b * in_];
            for (std::size_t o = 0; o < out_; ++o) bias_.grad[o] += grow[o];
            for (std::size_t k = 0; k < in_; ++k) {
                const Real* wrow = &weight_.value.data[k * out_];
                Real* gwrow = &weight_.grad.data[k * out_];
                Real acc = 0;
                const Real xv = xrow[k];
                for (std::size_t o = 0; o < out_; ++o) {
                    acc += grow[o] * wrow[o];
                    gwrow[o] += xv * grow[o];
                }
                gxrow[k] = acc;
            }
        }
        return gx;
    }

    void collect_parameters(std::vector<Parameter<Real>*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

    Parameter<Real>& weight() { return weight_; }
    Parameter<Real>& bias() { return bias_; }

protected:
    std::size_t in_;
    std::size_t out_;
    Parameter<Real> weight_;
    Parameter<Real> bias_;
    Tensor<Real> x_;
};

// 1-D cross-correlation, stride 1, zero same-padding (odd kernel):
// y[b,oc,i] = bias[oc] + sum_{ic,j} K[oc,ic,j] * x[b,ic,i+j-p].
template <class Real>
class Conv1dLayer : public Layer<Real> {
public:
    Conv1dLayer(const std::string& name, std::size_t in_ch, std::size_t out_ch, std::size_t kernel)
        : in_ch_(in_ch), out_ch_(out_ch), kernel_size_(kernel),
          kernel_(name + ".weight", {out_ch, in_ch, kernel}, InitKind::he_weight, in_ch * kernel),
          bias_(name + ".bias", {out_ch}, InitKind::zero, 0) {
        if (kernel % 2 == 0)
            throw GenerError(errc::config_invalid, fail_class::config,
                             name + ": same-padding conv needs an odd kernel");
    }

    Tensor<Real> forward(const Tensor<Real>& x, Phase, Xoshiro256*) override {
        if (x.rank() != 3 || x.dim(1) != in_ch_)
            throw GenerError(errc::shape_mismatch, fail_class::data,
                             kernel_.name + ": conv input shape mismatch");
        x_ = x;
        const std::size_t batch = x.dim(0);
        const std::size_t L = x.dim(2);
        const std::size_t pad = (kernel_size_ - 1) / 2;
        Tensor<Real> y({batch, out_ch_, L});
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t oc = 0; oc < out_ch_; ++oc) {
                Real* yrow = &y.data[(b * out_ch_ + oc) * L];
                for (std::size_t i = 0; i < L; ++i) yrow[i] = bias_.value[oc];
                for (std::size_t ic = 0; ic < in_ch_; ++ic) {
                    const Real* xrow = &x.data[(b * in_ch_ + ic) * L];
                    const Real* krow = &kernel_.value.data[(oc * in_ch_ + ic) * kernel_size_];
                    for (std::size_t j = 0; j < kernel_size_; ++j) {
                        const Real kv = krow[j];
                        // i + j - pad in [0, L): i in [lo, hi)
                        const std::size_t lo = pad > j ? pad - j : 0;
                        const std::size_t hi = std::min(L, L + pad - j);
                        for (std::size_t i = lo; i < hi; ++i) yrow[i] += kv * xrow[i + j - pad];
                    }
                }
            }
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& g) override {
        const std::size_t batch = x_.dim(0);
        const std::size_t L = x_.dim(2);
        const std::size_t pad = (kernel_size_ - 1) / 2;
        kernel_.grad.fill(Real(0));
        bias_.grad.fill(Real(0));
        Tensor<Real> gx({batch, in_ch_, L});
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t oc = 0; oc < out_ch_; ++oc) {
                const Real* grow = &g.data[(b * out_ch_ + oc) * L];
                for (std::size_t i = 0; i < L; ++i) bias_.grad[oc] += grow[i];
                for (std::size_t ic = 0; ic < in_ch_; ++ic) {
                    const Real* xrow = &x_.data[(b * in_ch_ + ic) * L];
                    Real* gxrow = &gx.data[(b * in_ch_ + ic) * L];
                    const Real* krow = &kernel_.value.data[(oc * in_ch_ + ic) * kernel_size_];
                    Real* gkrow = &kernel_.grad.data[(oc * in_ch_ + ic) * kernel_size_];
                    for (std::size_t j = 0; j < kernel_size_; ++j) {
                        const std::size_t lo = pad > j ? pad - j : 0;
                        const std::size_t hi = std::min(L, L + pad - j);
                        const Real kv = krow[j];
                        Real gk = 0;
                        for (std::size_t i = lo; i < hi; ++i) {
                            gk += grow[i] * xrow[i + j - pad];
                            gxrow[i + j - pad] += kv * grow[i];
                        }
                        gkrow[j] += gk;
                    }
                }
            }
        return gx;
    }

    void collect_parameters(std::vector<Parameter<Real>*>& out) override {
        out.push_back(&kernel_);
        out.push_back(&bias_);
    }

private:
    std::size_t in_ch_;
    std::size_t out_ch_;
    std::size_t kernel_size_;
    Parameter<Real> kernel_;
    Parameter<Real> bias_;
    Tensor<Real> x_;
};

// Per-feature batch normalization; features are dim 1 (dense [batch,F] or
// conv [batch,C,L], normalized over batch respectively batch*L).
template <class Real>
class BatchNormLayer : public Layer<Real> {
public:
    BatchNormLayer(const std::string& name, std::size_t features, double momentum = 0.9,
                   double epsilon = 1e-5)
        : name_(name), features_(features), momentum_(momentum), epsilon_(epsilon),
          gamma_(name + ".gamma", {features}, InitKind::one, 0),
          beta_(name + ".beta", {features}, InitKind::zero, 0),
          running_mean_({features}), running_var_({features}) {
        if (epsilon <= 0.0)
            throw GenerError(errc::config_invalid, fail_class::config,
                             name + ": batchnorm epsilon must be positive");
        gamma_.value.fill(Real(1));
        running_var_.fill(Real(1));
    }

    Tensor<Real> forward(const Tensor<Real>& x, Phase phase, Xoshiro256*) override {
        if ((x.rank() != 2 && x.rank() != 3) || x.dim(1) != features_)
            throw GenerError(errc::shape_mismatch, fail_class::data,
                             name_ + ": batchnorm input shape mismatch");
        const std::size_t batch = x.dim(0);
        const std::size_t inner = x.rank() == 3 ? x.dim(2) : 1;
        Tensor<Real> y(x.shape);

        if (phase == Phase::train) {
            if (batch < 2)
                throw GenerError(errc::batch_too_small, fail_class::training,
                                 name_ + ": batchnorm needs batch >= 2 in train mode");
            const double n = static_cast<double>(batch * inner);
            x_hat_ = Tensor<Real>(x.shape);
            inv_std_.assign(features_, 0.0);
            for (std::size_t f = 0; f < features_; ++f) {
                double mean = 0.0;
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t i = 0; i < inner; ++i)
                        mean += static_cast<double>(x.data[(b * features_ + f) * inner + i]);
                mean /= n;
                double var = 0.0;
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t i = 0; i < inner; ++i) {
                        const double d =
                            static_cast<double>(x.data[(b * features_ + f) * inner + i]) - mean;
                        var += d * d;
                    }
                var /= n;
                const double inv = 1.0 / std::sqrt(var + epsilon_);
                inv_std_[f] = inv;
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t i = 0; i < inner; ++i) {
                        const std::size_t at = (b * features_ + f) * inner + i;
                        const double xh = (static_cast<double>(x.data[at]) - mean) * inv;
                        x_hat_.data[at] = static_cast<Real>(xh);
                        y.data[at] = static_cast<Real>(
                            static_cast<double>(gamma_.value[f]) * xh +
                            static_cast<double>(beta_.value[f]));
                    }
                running_mean_[f] = static_cast<Real>(
                    momentum_ * static_cast<double>(running_mean_[f]) + (1.0 - momentum_) * mean);
                running_var_[f] = static_cast<Real>(
                    momentum_ * static_cast<double>(running_var_[f]) + (1.0 - momentum_) * var);
            }
        } else {
            for (std::size_t f = 0; f < features_; ++f) {
                const double inv =
                    1.0 / std::sqrt(static_cast<double>(running_var_[f]) + epsilon_);
                const double mean = static_cast<double>(running_mean_[f]);
                const double g = static_cast<double>(gamma_.value[f]);
                const double be = static_cast<double>(beta_.value[f]);
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t i = 0; i < inner; ++i) {
                        const std::size_t at = (b * features_ + f) * inner + i;
                        y.data[at] = static_cast<Real>(
                            g * ((static_cast<double>(x.data[at]) - mean) * inv) + be);
                    }
            }
        }
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& g) override {
        const std::size_t batch = g.dim(0);
        const std::size_t inner = g.rank() == 3 ? g.dim(2) : 1;
        const double n = static_cast<double>(batch * inner);
        gamma_.grad.fill(Real(0));
        beta_.grad.fill(Real(0));
        Tensor<Real> gx(g.shape);
        for (std::size_t f = 0; f < features_; ++f) {
            double sum_g = 0.0;
            double sum_gx = 0.0;
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < inner; ++i) {
                    const std::size_t at = (b * features_ + f) * inner + i;
                    const double gv = static_cast<double>(g.data[at]);
                    sum_g += gv;
                    sum_gx += gv * static_cast<double>(x_hat_.data[at]);
                }
            beta_.grad[f] = static_cast<Real>(sum_g);
            gamma_.grad[f] = static_cast<Real>(sum_gx);
            const double scale = static_cast<double>(gamma_.value[f]) * inv_std_[f];
            const double mean_g = sum_g / n;
            const double mean_gx = sum_gx / n;
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < inner; ++i) {
                    const std::size_t at = (b * features_ + f) * inner + i;
                    gx.data[at] = static_cast<Real>(
                        scale * (static_cast<double>(g.data[at]) - mean_g -
                                 static_cast<double>(x_hat_.data[at]) * mean_gx));
                }
        }
        return gx;
    }

    void collect_parameters(std::vector<Parameter<Real>*>& out) override {
        out.push_back(&gamma_);
        out.push_back(&beta_);
    }

    void collect_state(std::vector<std::pair<std::string, Tensor<Real>*>>& out) override {
        out.emplace_back(name_ + ".running_mean", &running_mean_);
        out.emplace_back(name_ + ".running_var", &running_var_);
    }

private:
    std::string name_;
    std::size_t features_;
    double momentum_;
    double epsilon_;
    Parameter<Real> gamma_;
    Parameter<Real> beta_;
    Tensor<Real> running_mean_;
    Tensor<Real> running_var_;
    Tensor<Real> x_hat_;
    std::vector<double> inv_std_;
};

template <class Real>
class ReluLayer : public Layer<Real> {
public:
    Tensor<Real> forward(const Tensor<Real>& x, Phase, Xoshiro256*) override {
        x_ = x;
        Tensor<Real> y(x.shape);
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > Real(0) ? x[i] : Real(0);
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& g) override {
        Tensor<Real> gx(g.shape);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] = x_[i] > Real(0) ? g[i] : Real(0);
        return gx;
    }

private:
    Tensor<Real> x_;
};

// Inverted dropout: elements are zeroed with probability `rate` in train
// mode and survivors scaled by 1/(1-rate); inference is the exact identity.
// Masks draw from the shared per-run stream in element order; a frozen layer
// reuses its last mask (gradient checking).
template <class Real>
class DropoutLayer : public Layer<Real> {
public:
    explicit DropoutLayer(double rate) : rate_(rate) {
        if (rate < 0.0 || rate >= 1.0)
            throw GenerError(errc::config_invalid, fail_class::config,
                             "dropout rate must lie in [0,1)");
    }

    Tensor<Real> forward(const Tensor<Real>& x, Phase phase, Xoshiro256* rng) override {
        if (phase == Phase::infer || rate_ == 0.0) {
            mask_.shape.clear();
            mask_.data.clear();
            identity_ = true;
            return x;
        }
        identity_ = false;
        if (!(frozen_ && mask_.same_shape(x))) {
            mask_ = Tensor<Real>(x.shape);
            const Real scale = static_cast<Real>(1.0 / (1.0 - rate_));
            for (std::size_t i = 0; i < mask_.size(); ++i)
                mask_[i] = rng->next_double() < rate_ ? Real(0) : scale;
        }
        Tensor<Real> y(x.shape);
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * mask_[i];
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& g) override {
        if (identity_) return g;
        Tensor<Real> gx(g.shape);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] = g[i] * mask_[i];
        return gx;
    }

    void set_frozen(bool frozen) { frozen_ = frozen; }

private:
    double rate_;
    bool frozen_ = false;
    bool identity_ = true;
    Tensor<Real> mask_;
};

template <class Real>
class FlattenLayer : public Layer<Real> {
public:
    Tensor<Real> forward(const Tensor<Real>& x, Phase, Xoshiro256*) override {
        in_shape_ = x.shape;
        const std::size_t batch = x.dim(0);
        return Tensor<Real>({batch, x.size() / batch}, x.data);
    }

    Tensor<Real> backward(const Tensor<Real>& g) override {
        return Tensor<Real>(in_shape_, g.data);
    }

private:
    std::vector<std::size_t> in_shape_;
};

}  // namespace gener::net
