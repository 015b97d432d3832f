#include "gener/model.hpp"

#include <cstdio>

namespace gener::model {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw GenerError(errc::config_invalid, fail_class::config, what);
}

}  // namespace

void GenerConfig::validate() const {
    for (std::size_t f : conv_filters) require(f >= 1, "conv filter counts must be positive");
    for (std::size_t k : conv_kernels)
        require(k >= 1 && k % 2 == 1, "conv kernels must be odd and positive");
    require(branch_feature_dim >= 1, "branch_feature_dim must be positive");
    require(dense_units >= 1, "dense_units must be positive");
    require(dropout_rate >= 0.0 && dropout_rate < 1.0, "dropout_rate must lie in [0,1)");
    require(lr > 0.0, "lr must be positive");
    require(batch_size >= 2, "batch_size must be at least 2");
}

nlohmann::json GenerConfig::to_json() const {
    return nlohmann::json{
        {"conv_filters", conv_filters},
        {"conv_kernels", conv_kernels},
        {"branch_feature_dim", branch_feature_dim},
        {"dense_units", dense_units},
        {"dropout_rate", dropout_rate},
        {"lr", lr},
        {"batch_size", batch_size},
        {"L", length},
    };
}

GenerConfig GenerConfig::from_json(const nlohmann::json& j) {
    GenerConfig c;
    try {
        if (j.contains("conv_filters")) c.conv_filters = j.at("conv_filters");
        if (j.contains("conv_kernels")) c.conv_kernels = j.at("conv_kernels");
        if (j.contains("branch_feature_dim")) c.branch_feature_dim = j.at("branch_feature_dim");
        if (j.contains("dense_units")) c.dense_units = j.at("dense_units");
        if (j.contains("dropout_rate")) c.dropout_rate = j.at("dropout_rate");
        if (j.contains("lr")) c.lr = j.at("lr");
        if (j.contains("batch_size")) c.batch_size = j.at("batch_size");
        if (j.contains("L")) c.length = j.at("L");
    } catch (const nlohmann::json::exception& e) {
        throw GenerError(errc::config_invalid, fail_class::config,
                         std::string("bad model config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string GenerConfig::canonical_string() const { return to_json().dump(); }

std::string GenerConfig::hash_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_string())));
    return buf;
}

std::string resolve_architecture_name(const std::string& cli_name) {
    if (cli_name == "gener") return "gener";
    if (cli_name == "cnn" || cli_name == "cnn_only") return "cnn_only";
    throw GenerError(errc::config_invalid, fail_class::config,
                     "unknown architecture: " + cli_name);
}

GridSpec GridSpec::from_json(const nlohmann::json& j, const GenerConfig& base) {
    GridSpec g;
    try {
        g.lr = j.contains("lr") ? j.at("lr").get<std::vector<double>>()
                                : std::vector<double>{base.lr};
        g.dropout_rate = j.contains("dropout_rate")
                             ? j.at("dropout_rate").get<std::vector<double>>()
                             : std::vector<double>{base.dropout_rate};
        g.conv_filters =
            j.contains("conv_filters")
                ? j.at("conv_filters").get<std::vector<std::array<std::size_t, 3>>>()
                : std::vector<std::array<std::size_t, 3>>{base.conv_filters};
        g.dense_units = j.contains("dense_units")
                            ? j.at("dense_units").get<std::vector<std::size_t>>()
                            : std::vector<std::size_t>{base.dense_units};
    } catch (const nlohmann::json::exception& e) {
        throw GenerError(errc::config_invalid, fail_class::config,
                         std::string("bad grid spec: ") + e.what());
    }
    if (g.lr.empty() || g.dropout_rate.empty() || g.conv_filters.empty() || g.dense_units.empty())
        throw GenerError(errc::empty_grid, fail_class::config,
                         "grid candidate lists must be non-empty");
    return g;
}

std::size_t GridSpec::cardinality() const {
    return lr.size() * dropout_rate.size() * conv_filters.size() * dense_units.size();
}

GenerConfig GridSpec::point(const GenerConfig& base, std::size_t index) const {
    GenerConfig c = base;
    std::size_t rest = index;
    const std::size_t i_du = rest % dense_units.size();
    rest /= dense_units.size();
    const std::size_t i_cf = rest % conv_filters.size();
    rest /= conv_filters.size();
    const std::size_t i_dr = rest % dropout_rate.size();
    rest /= dropout_rate.size();
    const std::size_t i_lr = rest;
    c.dense_units = dense_units[i_du];
    c.conv_filters = conv_filters[i_cf];
    c.dropout_rate = dropout_rate[i_dr];
    c.lr = lr[i_lr];
    c.validate();
    return c;
}

}  // namespace gener::model
