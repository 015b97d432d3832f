#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gener/network.hpp"
#include "gener/rng.hpp"

namespace gener::model {

// Defaults are starting points for the grid, not reported constants: the
// architecture fixes three conv layers and two 128-node dense layers, the
// rest is searchable.
struct GenerConfig {
    std::array<std::size_t, 3> conv_filters{32, 64, 64};
    std::array<std::size_t, 3> conv_kernels{7, 5, 3};
    std::size_t branch_feature_dim = 128;
    std::size_t dense_units = 128;
    double dropout_rate = 0.3;
    double lr = 1e-3;
    std::size_t batch_size = 64;
    std::size_t length = 0;  // L, the expression vector length; filled from data

    void validate() const;

    nlohmann::json to_json() const;
    static GenerConfig from_json(const nlohmann::json& j);

    // Stable key-sorted serialization; used for hashing and tie ordering.
    std::string canonical_string() const;
    std::string hash_hex() const;
};

// Branch A: the (2,L) stacked pair as a 2-channel 1-D signal through three
// conv->batchnorm->relu->dropout blocks (no pooling), flattened and
// projected to branch_feature_dim. Branch B: the length-L element product
// through two dense->batchnorm->relu->dropout blocks. Late fusion
// concatenates both feature vectors into a 2-way linear classifier head.
template <class Real>
net::Network<Real> build_gener(const GenerConfig& config);

// Branch A alone feeding the classifier head; the ablation reference.
template <class Real>
net::Network<Real> build_cnn_only(const GenerConfig& config);

template <class Real>
net::Network<Real> build_architecture(const std::string& architecture, const GenerConfig& config);

std::string resolve_architecture_name(const std::string& cli_name);  // gener|cnn -> canonical

// Candidate lists per searchable hyperparameter; absent keys fall back to a
// singleton holding the base config's value.
struct GridSpec {
    std::vector<double> lr;
    std::vector<double> dropout_rate;
    std::vector<std::array<std::size_t, 3>> conv_filters;
    std::vector<std::size_t> dense_units;

    static GridSpec from_json(const nlohmann::json& j, const GenerConfig& base);

    std::size_t cardinality() const;
    // Point enumeration is row-major over (lr, dropout_rate, conv_filters,
    // dense_units), lr slowest.
    GenerConfig point(const GenerConfig& base, std::size_t index) const;
};

template <class Real>
net::Network<Real> build_gener(const GenerConfig& config) {
    config.validate();
    if (config.length == 0)
        throw GenerError(errc::config_invalid, fail_class::config,
                         "input length L must be set before building");
    net::Network<Real> network;
    network.architecture = "gener";

    std::size_t in_ch = 2;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string tag = std::to_string(i + 1);
        network.branch_a.push_back(std::make_unique<net::Conv1dLayer<Real>>(
            "branch_a.conv" + tag, in_ch, config.conv_filters[i], config.conv_kernels[i]));
        network.branch_a.push_back(std::make_unique<net::BatchNormLayer<Real>>(
            "branch_a.bn" + tag, config.conv_filters[i]));
        network.branch_a.push_back(std::make_unique<net::ReluLayer<Real>>());
        network.branch_a.push_back(std::make_unique<net::DropoutLayer<Real>>(config.dropout_rate));
        in_ch = config.conv_filters[i];
    }
    network.branch_a.push_back(std::make_unique<net::FlattenLayer<Real>>());
    network.branch_a.push_back(std::make_unique<net::DenseLayer<Real>>(
        "branch_a.proj", config.conv_filters[2] * config.length, config.branch_feature_dim));
    network.branch_a.push_back(std::make_unique<net::ReluLayer<Real>>());

    std::size_t in = config.length;
    for (std::size_t i = 0; i < 2; ++i) {
        const std::string tag = std::to_string(i + 1);
        network.branch_b.push_back(std::make_unique<net::DenseLayer<Real>>(
            "branch_b.dense" + tag, in, config.dense_units));
        network.branch_b.push_back(std::make_unique<net::BatchNormLayer<Real>>(
            "branch_b.bn" + tag, config.dense_units));
        network.branch_b.push_back(std::make_unique<net::ReluLayer<Real>>());
        network.branch_b.push_back(std::make_unique<net::DropoutLayer<Real>>(config.dropout_rate));
        in = config.dense_units;
    }

    network.head.push_back(std::make_unique<net::DenseLayer<Real>>(
        "head.out", config.branch_feature_dim + config.dense_units, 2));
    return network;
}

template <class Real>
net::Network<Real> build_cnn_only(const GenerConfig& config) {
    net::Network<Real> network = build_gener<Real>(config);
    network.architecture = "cnn_only";
    network.branch_b.clear();
    network.head.clear();
    network.head.push_back(
        std::make_unique<net::DenseLayer<Real>>("head.out", config.branch_feature_dim, 2));
    return network;
}

template <class Real>
net::Network<Real> build_architecture(const std::string& architecture, const GenerConfig& config) {
    if (architecture == "gener") return build_gener<Real>(config);
    if (architecture == "cnn_only") return build_cnn_only<Real>(config);
    throw GenerError(errc::config_invalid, fail_class::config,
                     "unknown architecture: " + architecture);
}

}  // namespace gener::model
