#include "gener/trainer.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "gener/io_util.hpp"

namespace gener::train {

namespace {

constexpr char kMagic[4] = {'G', 'E', 'N', 'R'};
constexpr std::uint32_t kVersion = 1;

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t read_u32(std::string_view bytes, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | static_cast<unsigned char>(bytes[at + static_cast<std::size_t>(i)]);
    return v;
}

std::uint64_t read_u64(std::string_view bytes, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | static_cast<unsigned char>(bytes[at + static_cast<std::size_t>(i)]);
    return v;
}

}  // namespace

Precision precision_from_name(const std::string& name) {
    if (name == "fast32") return Precision::fast32;
    if (name == "check64") return Precision::check64;
    throw GenerError(errc::config_invalid, fail_class::config, "unknown precision: " + name);
}

const char* precision_name(Precision p) {
    return p == Precision::fast32 ? "fast32" : "check64";
}

void TrainOptions::validate() const {
    if (max_epochs < 1)
        throw GenerError(errc::config_invalid, fail_class::config, "max_epochs must be >= 1");
    if (patience < 1 || patience > max_epochs)
        throw GenerError(errc::config_invalid, fail_class::config,
                         "patience must lie in [1, max_epochs]");
    if (batch_size < 2)
        throw GenerError(errc::config_invalid, fail_class::config,
                         "batch_size must be >= 2 (batchnorm train minimum)");
    if (lr < 0.0 || !std::isfinite(lr))
        throw GenerError(errc::config_invalid, fail_class::config, "lr must be non-negative");
}

std::string history_csv(const TrainHistory& history) {
    std::string out = "epoch,train_loss,val_loss,val_auroc_micro\n";
    for (const auto& r : history.epochs) {
        out += std::to_string(r.epoch);
        out += ',';
        out += format_double(r.train_loss);
        out += ',';
        out += format_double(r.val_loss);
        out += ',';
        out += format_double(r.val_auroc_micro);
        out += '\n';
    }
    return out;
}

std::string checkpoint_bytes(const Checkpoint& checkpoint) {
    nlohmann::json manifest = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, shape] : checkpoint.manifest) {
        std::uint64_t count = 1;
        for (std::size_t d : shape) count *= d;
        manifest.push_back({{"name", name}, {"shape", shape}, {"offset", offset}});
        offset += count * 4;
    }
    const nlohmann::json header{
        {"architecture", checkpoint.architecture},
        {"config", checkpoint.config.to_json()},
        {"seed", checkpoint.seed},
        {"manifest", manifest},
    };
    const std::string header_str = header.dump();

    std::string out;
    out.reserve(16 + header_str.size() + checkpoint.payload.size() * 4);
    out.append(kMagic, 4);
    append_u32(out, kVersion);
    append_u64(out, header_str.size());
    out += header_str;
    for (float f : checkpoint.payload) append_u32(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    StagedWriter writer;
    writer.write(path, checkpoint_bytes(checkpoint));
    writer.commit();
}

Checkpoint parse_checkpoint_bytes(std::string_view bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw GenerError(errc::bad_magic, fail_class::data,
                         "not a GENR checkpoint (bad magic)");
    const std::uint32_t version = read_u32(bytes, 4);
    if (version != kVersion)
        throw GenerError(errc::version_unsupported, fail_class::data,
                         "unsupported checkpoint version " + std::to_string(version));
    const std::uint64_t header_len = read_u64(bytes, 8);
    if (16 + header_len > bytes.size())
        throw GenerError(errc::payload_length_mismatch, fail_class::data,
                         "checkpoint truncated inside the header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(16, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw GenerError(errc::manifest_mismatch, fail_class::data,
                         std::string("bad checkpoint header: ") + e.what());
    }

    Checkpoint cp;
    std::uint64_t expected_payload = 0;
    try {
        cp.architecture = header.at("architecture");
        cp.config = model::GenerConfig::from_json(header.at("config"));
        cp.seed = header.at("seed");
        for (const auto& entry : header.at("manifest")) {
            std::vector<std::size_t> shape = entry.at("shape");
            const std::uint64_t offset = entry.at("offset");
            if (offset != expected_payload)
                throw GenerError(errc::manifest_mismatch, fail_class::data,
                                 "checkpoint manifest offsets are not contiguous");
            std::uint64_t count = 1;
            for (std::size_t d : shape) count *= d;
            expected_payload += count * 4;
            cp.manifest.emplace_back(entry.at("name").get<std::string>(), std::move(shape));
        }
    } catch (const nlohmann::json::exception& e) {
        throw GenerError(errc::manifest_mismatch, fail_class::data,
                         std::string("bad checkpoint header: ") + e.what());
    }

    const std::size_t payload_at = 16 + header_len;
    if (bytes.size() - payload_at != expected_payload)
        throw GenerError(errc::payload_length_mismatch, fail_class::data,
                         "checkpoint payload is " + std::to_string(bytes.size() - payload_at) +
                             " bytes, manifest expects " + std::to_string(expected_payload));

    cp.payload.reserve(expected_payload / 4);
    for (std::size_t at = payload_at; at < bytes.size(); at += 4)
        cp.payload.push_back(std::bit_cast<float>(read_u32(bytes, at)));
    return cp;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return parse_checkpoint_bytes(read_file(path));
}

TrainRun run_training_dispatch(const std::string& architecture, const model::GenerConfig& config,
                               const LabeledDataset& dataset, const ExpressionMatrix& matrix,
                               const TrainOptions& opts, std::uint64_t run_seed) {
    if (opts.precision == Precision::check64)
        return run_training<double>(architecture, config, dataset, matrix, opts, run_seed);
    return run_training<float>(architecture, config, dataset, matrix, opts, run_seed);
}

metrics::MetricsReport evaluate_checkpoint(const Checkpoint& checkpoint,
                                           const LabeledDataset& dataset, Split split,
                                           const ExpressionMatrix& matrix, Precision precision) {
    if (checkpoint.config.length != matrix.length())
        throw GenerError(errc::length_mismatch, fail_class::compat,
                         "checkpoint expects L=" + std::to_string(checkpoint.config.length) +
                             " but the matrix has L=" + std::to_string(matrix.length()));
    if (precision == Precision::check64) {
        auto network = restore_network<double>(checkpoint);
        return evaluate_network(network, dataset, split, matrix);
    }
    auto network = restore_network<float>(checkpoint);
    return evaluate_network(network, dataset, split, matrix);
}

std::vector<double> predict(const Checkpoint& checkpoint,
                            const std::vector<std::pair<GeneId, GeneId>>& pairs,
                            const ExpressionMatrix& matrix, Precision precision) {
    if (checkpoint.config.length != matrix.length())
        throw GenerError(errc::length_mismatch, fail_class::compat,
                         "checkpoint expects L=" + std::to_string(checkpoint.config.length) +
                             " but the matrix has L=" + std::to_string(matrix.length()));
    if (precision == Precision::check64) {
        auto network = restore_network<double>(checkpoint);
        return predict_network(network, pairs, matrix);
    }
    auto network = restore_network<float>(checkpoint);
    return predict_network(network, pairs, matrix);
}

double abs_pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) return 0.0;
    return std::abs(cov / std::sqrt(var_a * var_b));
}

metrics::MetricsReport correlation_baseline(const LabeledDataset& dataset, Split split,
                                            const ExpressionMatrix& matrix) {
    auto pairs = detail::select_split(dataset, split);
    if (pairs.empty())
        throw GenerError(errc::empty_split, fail_class::data,
                         std::string("no pairs in split ") + split_name(split));
    std::vector<std::array<double, 2>> probs;
    std::vector<int> labels;
    probs.reserve(pairs.size());
    labels.reserve(pairs.size());
    for (auto* p : pairs) {
        const double s = abs_pearson(matrix.row(matrix.index_of(p->a)),
                                     matrix.row(matrix.index_of(p->b)));
        probs.push_back({1.0 - s, s});
        labels.push_back(p->label);
    }
    metrics::MetricsReport report = metrics::score_probabilities(probs, labels);
    report.n_train = dataset.count_split(Split::train);
    report.n_val = dataset.count_split(Split::val);
    report.n_test = dataset.count_split(Split::test);
    return report;
}

}  // namespace gener::train
