#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gener/grid.hpp"
#include "gener/ingest.hpp"
#include "gener/io_util.hpp"
#include "gener/metrics.hpp"
#include "gener/model.hpp"
#include "gener/preprocess.hpp"
#include "gener/rng.hpp"
#include "gener/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

void log_line(const char* level, const char* event, json fields = json::object()) {
    fields["level"] = level;
    fields["event"] = event;
    std::cerr << fields.dump() << "\n";
}

void emit_stdout(const json& j) { std::cout << j.dump() << std::endl; }

struct RunConfig {
    // data section
    fs::path expression_path;
    fs::path interactions_path;
    std::optional<fs::path> negatives_path;
    gener::prep::NormalizationKind normalization = gener::prep::NormalizationKind::standardize;
    std::string negatives = "sampled";  // sampled | from_file
    gener::prep::SplitFractions fractions;
    std::optional<double> subsample_both;
    bool uppercase_genes = false;
    bool header = false;

    gener::model::GenerConfig model;
    gener::train::TrainOptions train;
    json grid = json::object();
    std::uint64_t seed = kDefaultSeed;
};

RunConfig load_run_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(gener::read_file(path));
    } catch (const json::exception& e) {
        throw gener::GenerError(gener::errc::config_invalid, gener::fail_class::config,
                                "config is not valid JSON: " + std::string(e.what()));
    }

    RunConfig cfg;
    try {
        if (j.contains("seed")) cfg.seed = j.at("seed");
        if (j.contains("model")) cfg.model = gener::model::GenerConfig::from_json(j.at("model"));
        if (j.contains("grid")) cfg.grid = j.at("grid");

        if (j.contains("data")) {
            const json& d = j.at("data");
            if (d.contains("expression_path"))
                cfg.expression_path = d.at("expression_path").get<std::string>();
            if (d.contains("interactions_path"))
                cfg.interactions_path = d.at("interactions_path").get<std::string>();
            if (d.contains("negatives_path"))
                cfg.negatives_path = fs::path(d.at("negatives_path").get<std::string>());
            if (d.contains("normalization"))
                cfg.normalization =
                    gener::prep::normalization_from_name(d.at("normalization").get<std::string>());
            if (d.contains("negatives")) cfg.negatives = d.at("negatives").get<std::string>();
            if (d.contains("split_fractions")) {
                const json& f = d.at("split_fractions");
                cfg.fractions.train = f.at("train");
                cfg.fractions.val = f.at("val");
                cfg.fractions.test = f.at("test");
            }
            if (d.contains("subsample_both")) cfg.subsample_both = d.at("subsample_both");
            if (d.contains("uppercase_genes")) cfg.uppercase_genes = d.at("uppercase_genes");
            if (d.contains("header")) cfg.header = d.at("header");
        }

        cfg.train.batch_size = cfg.model.batch_size;
        cfg.train.lr = cfg.model.lr;
        if (j.contains("train")) {
            const json& t = j.at("train");
            if (t.contains("max_epochs")) cfg.train.max_epochs = t.at("max_epochs");
            if (t.contains("patience")) cfg.train.patience = t.at("patience");
            if (t.contains("batch_size")) cfg.train.batch_size = t.at("batch_size");
            if (t.contains("lr")) cfg.train.lr = t.at("lr");
            if (t.contains("shuffle_each_epoch"))
                cfg.train.shuffle_each_epoch = t.at("shuffle_each_epoch");
            if (t.contains("precision"))
                cfg.train.precision =
                    gener::train::precision_from_name(t.at("precision").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw gener::GenerError(gener::errc::config_invalid, gener::fail_class::config,
                                "bad config: " + std::string(e.what()));
    }

    if (cfg.negatives != "sampled" && cfg.negatives != "from_file")
        throw gener::GenerError(gener::errc::config_invalid, gener::fail_class::config,
                                "data.negatives must be 'sampled' or 'from_file'");
    if (cfg.negatives == "from_file" && !cfg.negatives_path)
        throw gener::GenerError(gener::errc::config_invalid, gener::fail_class::config,
                                "data.negatives_path is required when negatives=from_file");
    cfg.fractions.validate();
    return cfg;
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> precision;
};

std::uint64_t effective_seed(const RunConfig& cfg, const CommonFlags& flags) {
    return flags.seed ? *flags.seed : cfg.seed;
}

void ensure_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir))
        throw gener::GenerError(gener::errc::io_failure, gener::fail_class::data,
                                "cannot create output directory: " + dir.string());
}

gener::ExpressionMatrix load_prepared_matrix(const fs::path& out_dir) {
    return gener::ingest::parse_expression_tsv(gener::read_file(out_dir / "matrix.norm.tsv"));
}

gener::LabeledDataset load_prepared_manifest(const fs::path& out_dir,
                                             const gener::ExpressionMatrix& matrix) {
    return gener::prep::parse_manifest_tsv(gener::read_file(out_dir / "manifest.tsv"), matrix);
}

json split_counts_json(const gener::LabeledDataset& dataset) {
    json counts = json::object();
    for (gener::Split s : {gener::Split::train, gener::Split::val, gener::Split::test}) {
        std::size_t pos = 0, neg = 0;
        for (const auto& p : dataset.pairs)
            if (p.split == s) (p.label == 1 ? pos : neg) += 1;
        counts[gener::split_name(s)] = {{"interaction", pos}, {"no_interaction", neg}};
    }
    return counts;
}

void write_report_artifacts(gener::StagedWriter& writer, const fs::path& out_dir,
                            const gener::metrics::MetricsReport& report) {
    writer.write(out_dir / "report.json", report.to_json().dump(2) + "\n");
    writer.write(out_dir / "roc.csv", gener::metrics::curve_csv(report.roc, "fpr", "tpr"));
    writer.write(out_dir / "pr.csv", gener::metrics::curve_csv(report.pr, "recall", "precision"));
    char annotation[64];
    std::snprintf(annotation, sizeof(annotation), "AUROC = %.4f", report.auroc_micro);
    writer.write(out_dir / "roc.svg",
                 gener::metrics::curve_svg(report.roc, "False positive rate",
                                           "True positive rate", annotation));
    std::snprintf(annotation, sizeof(annotation), "AUPR = %.4f", report.aupr_micro);
    writer.write(out_dir / "pr.svg",
                 gener::metrics::curve_svg(report.pr, "Recall", "Precision", annotation));
}

int cmd_synth(const gener::ingest::SynthSpec& spec, const fs::path& out_dir) {
    ensure_out_dir(out_dir);
    auto [matrix, dataset] = gener::ingest::generate_synthetic(spec);

    std::map<std::vector<double>, std::size_t> row_counts;
    for (std::size_t i = 0; i < matrix.n_genes(); ++i) {
        auto row = matrix.row(i);
        ++row_counts[std::vector<double>(row.begin(), row.end())];
    }
    std::size_t duplicate_rows = 0;
    for (const auto& [row, count] : row_counts)
        if (count > 1) duplicate_rows += count;
    if (duplicate_rows > 0)
        log_line("info", "synth.duplicate_rows",
                 {{"rows_sharing_values", duplicate_rows}, {"sigma", spec.noise_sigma}});

    gener::StagedWriter writer;
    writer.write(out_dir / "expression.tsv", gener::ingest::render_expression_tsv(matrix));
    writer.write(out_dir / "interactions.tsv",
                 gener::ingest::render_interactions_tsv(dataset.pairs, 1));
    writer.commit();

    emit_stdout(json{{"expression", (out_dir / "expression.tsv").string()},
                     {"interactions", (out_dir / "interactions.tsv").string()},
                     {"genes", matrix.n_genes()},
                     {"L", matrix.length()},
                     {"positive_pairs", dataset.count_label(1)}});
    return 0;
}

int cmd_prepare(const RunConfig& cfg, const fs::path& out_dir, std::uint64_t seed) {
    ensure_out_dir(out_dir);
    gener::ingest::ParseOptions parse_opts{cfg.uppercase_genes, cfg.header};

    log_line("info", "prepare.ingest", {{"expression", cfg.expression_path.string()}});
    auto matrix =
        gener::ingest::parse_expression_tsv(gener::read_file(cfg.expression_path), parse_opts);

    switch (cfg.normalization) {
        case gener::prep::NormalizationKind::standardize:
            matrix = gener::prep::standardize_rows(matrix);
            break;
        case gener::prep::NormalizationKind::quantile:
            matrix = gener::prep::quantile_normalize_columns(matrix);
            break;
        case gener::prep::NormalizationKind::none:
            break;
    }

    auto [positives, stats] = gener::ingest::parse_interactions_tsv(
        gener::read_file(cfg.interactions_path), matrix, parse_opts);

    gener::LabeledDataset dataset;
    dataset.matrix_ref = cfg.expression_path.filename().string();
    for (auto& [a, b] : positives) dataset.pairs.push_back(gener::PairExample{a, b, 1});

    std::size_t negatives_added = 0;
    if (cfg.negatives == "from_file") {
        auto [file_negatives, neg_stats] = gener::ingest::parse_interactions_tsv(
            gener::read_file(*cfg.negatives_path), matrix, parse_opts);
        std::set<std::pair<std::string, std::string>> positive_keys;
        for (const auto& [a, b] : positives) positive_keys.emplace(a.name, b.name);
        for (auto& [a, b] : file_negatives) {
            if (positive_keys.count({a.name, b.name})) continue;  // positive label wins
            dataset.pairs.push_back(gener::PairExample{a, b, 0});
            ++negatives_added;
        }
        log_line("info", "prepare.negatives_from_file",
                 {{"raw", neg_stats.raw}, {"added", negatives_added}});
    } else {
        auto sampled = gener::ingest::sample_negatives(matrix, positives, positives.size(),
                                                       gener::derive_seed(seed, "negatives"));
        for (auto& [a, b] : sampled) dataset.pairs.push_back(gener::PairExample{a, b, 0});
        negatives_added = sampled.size();
    }

    dataset = gener::prep::undersample(dataset, gener::derive_seed(seed, "undersample"));
    if (cfg.subsample_both)
        dataset = gener::prep::subsample_both(dataset, *cfg.subsample_both,
                                              gener::derive_seed(seed, "subsample"));
    dataset = gener::prep::stratified_split(dataset, cfg.fractions,
                                            gener::derive_seed(seed, "split"));

    gener::StagedWriter writer;
    writer.write(out_dir / "manifest.tsv", gener::prep::render_manifest_tsv(dataset));
    writer.write(out_dir / "matrix.norm.tsv", gener::ingest::render_expression_tsv(matrix));
    writer.commit();

    emit_stdout(json{{"raw", stats.raw},
                     {"dropped_self", stats.dropped_self},
                     {"dropped_unknown", stats.dropped_unknown},
                     {"dropped_duplicate", stats.dropped_duplicate},
                     {"kept", stats.kept},
                     {"negatives_added", negatives_added},
                     {"pairs_total", dataset.pairs.size()},
                     {"split_counts", split_counts_json(dataset)}});
    return 0;
}

int cmd_train(const RunConfig& cfg, const fs::path& out_dir, std::uint64_t seed,
              const std::string& arch_flag) {
    const std::string architecture = gener::model::resolve_architecture_name(arch_flag);
    auto matrix = load_prepared_matrix(out_dir);
    auto dataset = load_prepared_manifest(out_dir, matrix);

    gener::model::GenerConfig config = cfg.model;
    config.length = matrix.length();
    config.validate();

    log_line("info", "train.start",
             {{"architecture", architecture},
              {"pairs", dataset.pairs.size()},
              {"L", matrix.length()},
              {"precision", gener::train::precision_name(cfg.train.precision)}});

    auto run = gener::train::run_training_dispatch(architecture, config, dataset, matrix,
                                                   cfg.train, seed);
    log_line("info", "train.done",
             {{"best_epoch", run.history.best_epoch},
              {"epochs_run", run.history.epochs.size()},
              {"best_val_auroc", run.history.best().val_auroc_micro}});

    auto report = gener::train::evaluate_checkpoint(run.checkpoint, dataset, gener::Split::val,
                                                    matrix, cfg.train.precision);

    gener::StagedWriter writer;
    writer.write(out_dir / "model.genr", gener::train::checkpoint_bytes(run.checkpoint));
    writer.write(out_dir / "history.csv", gener::train::history_csv(run.history));
    writer.write(out_dir / "report.json", report.to_json().dump(2) + "\n");
    writer.commit();

    json out = report.to_json();
    out["architecture"] = architecture;
    out["best_epoch"] = run.history.best_epoch;
    out["split"] = "val";
    emit_stdout(out);
    return 0;
}

int cmd_evaluate(const fs::path& checkpoint_path, const fs::path& out_dir,
                 const std::string& split_name_arg, gener::train::Precision precision) {
    auto matrix = load_prepared_matrix(out_dir);
    auto dataset = load_prepared_manifest(out_dir, matrix);
    auto checkpoint = gener::train::load_checkpoint(checkpoint_path);

    const gener::Split split = gener::split_from_name(split_name_arg);
    auto report = gener::train::evaluate_checkpoint(checkpoint, dataset, split, matrix, precision);

    gener::StagedWriter writer;
    write_report_artifacts(writer, out_dir, report);
    writer.commit();

    json out = report.to_json();
    out["split"] = split_name_arg;
    out["architecture"] = checkpoint.architecture;
    emit_stdout(out);
    return 0;
}

int cmd_gridsearch(const RunConfig& cfg, const fs::path& out_dir, std::uint64_t seed,
                   const std::string& arch_flag, std::size_t jobs) {
    const std::string architecture = gener::model::resolve_architecture_name(arch_flag);
    auto matrix = load_prepared_matrix(out_dir);
    auto dataset = load_prepared_manifest(out_dir, matrix);

    gener::model::GenerConfig base = cfg.model;
    base.length = matrix.length();
    base.validate();

    auto grid = gener::model::GridSpec::from_json(cfg.grid, base);
    log_line("info", "gridsearch.start",
             {{"points", grid.cardinality()}, {"jobs", jobs}, {"architecture", architecture}});

    auto result = gener::model::grid_search(grid, dataset, matrix, base, cfg.train, architecture,
                                            seed, jobs);

    gener::StagedWriter writer;
    writer.write(out_dir / "leaderboard.csv", gener::model::leaderboard_csv(result.leaderboard));
    writer.write(out_dir / "model.genr", gener::train::checkpoint_bytes(result.best_checkpoint));
    writer.write(out_dir / "history.csv", gener::train::history_csv(result.best_history));
    writer.commit();

    emit_stdout(json{{"best_config", result.best.to_json()},
                     {"best_config_hash", result.best.hash_hex()},
                     {"val_auroc_micro", result.leaderboard.front().val_auroc_micro},
                     {"val_loss", result.leaderboard.front().val_loss},
                     {"points", result.leaderboard.size()}});
    return 0;
}

int cmd_baseline(const fs::path& out_dir, const std::string& split_name_arg) {
    auto matrix = load_prepared_matrix(out_dir);
    auto dataset = load_prepared_manifest(out_dir, matrix);
    const gener::Split split = gener::split_from_name(split_name_arg);

    auto report = gener::train::correlation_baseline(dataset, split, matrix);

    gener::StagedWriter writer;
    writer.write(out_dir / "report.json", report.to_json().dump(2) + "\n");
    writer.commit();

    json out = report.to_json();
    out["split"] = split_name_arg;
    out["method"] = "correlation";
    emit_stdout(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GENER: gene-gene interaction prediction from expression data"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string arch = "gener";
    std::string split = "test";
    std::string checkpoint_path;
    std::size_t jobs = 1;
    double subsample_both_flag = -1.0;
    bool uppercase_flag = false;
    bool header_flag = false;

    gener::ingest::SynthSpec synth_spec;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic expression/interaction pair");
    synth->add_option("--out", flags.out_dir, "Output directory")->required();
    synth->add_option("--modules", synth_spec.n_modules, "Number of latent modules");
    synth->add_option("--genes-per-module", synth_spec.genes_per_module, "Genes per module");
    synth->add_option("--length", synth_spec.length, "Expression vector length L");
    synth->add_option("--sigma", synth_spec.noise_sigma, "Per-gene noise sigma");
    synth->add_option("--seed", synth_spec.seed, "Generator seed");

    auto add_common = [&](CLI::App* cmd, bool with_config) {
        if (with_config)
            cmd->add_option("--config", flags.config_path, "Run config JSON")->required();
        cmd->add_option("--out", flags.out_dir, "Run directory")->required();
        cmd->add_option("--seed", flags.seed, "Master seed (overrides config)");
    };

    auto* prepare = app.add_subcommand("prepare", "Ingest, normalize, balance and split");
    add_common(prepare, true);
    prepare->add_flag("--uppercase-genes", uppercase_flag, "Uppercase gene names on ingest");
    prepare->add_flag("--header", header_flag, "Interactions file has a header row");
    prepare->add_option("--subsample-both", subsample_both_flag,
                        "Keep this fraction of each class after balancing");

    auto* train = app.add_subcommand("train", "Train on a prepared run directory");
    add_common(train, true);
    train->add_option("--arch", arch, "Architecture: gener or cnn")
        ->check(CLI::IsMember({"gener", "cnn"}));
    train->add_option("--precision", flags.precision, "fast32 or check64")
        ->check(CLI::IsMember({"fast32", "check64"}));

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on a split");
    evaluate->add_option("--out", flags.out_dir, "Run directory")->required();
    evaluate->add_option("--checkpoint", checkpoint_path, "Checkpoint path (default out/model.genr)");
    evaluate->add_option("--split", split, "train, val or test")
        ->check(CLI::IsMember({"train", "val", "test"}));
    evaluate->add_option("--precision", flags.precision, "fast32 or check64")
        ->check(CLI::IsMember({"fast32", "check64"}));

    auto* gridsearch = app.add_subcommand("gridsearch", "Grid search over hyperparameters");
    add_common(gridsearch, true);
    gridsearch->add_option("--arch", arch, "Architecture: gener or cnn")
        ->check(CLI::IsMember({"gener", "cnn"}));
    gridsearch->add_option("--jobs", jobs, "Parallel grid workers");
    gridsearch->add_option("--precision", flags.precision, "fast32 or check64")
        ->check(CLI::IsMember({"fast32", "check64"}));

    auto* baseline = app.add_subcommand("baseline", "Pearson-correlation baseline on a split");
    baseline->add_option("--out", flags.out_dir, "Run directory")->required();
    baseline->add_option("--split", split, "train, val or test")
        ->check(CLI::IsMember({"train", "val", "test"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << json{{"level", "error"}, {"event", "cli.parse"}, {"message", e.what()}}.dump()
                  << "\n";
        return 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_spec, flags.out_dir);

        if (prepare->parsed()) {
            RunConfig cfg = load_run_config(flags.config_path);
            if (uppercase_flag) cfg.uppercase_genes = true;
            if (header_flag) cfg.header = true;
            if (subsample_both_flag >= 0.0) cfg.subsample_both = subsample_both_flag;
            return cmd_prepare(cfg, flags.out_dir, effective_seed(cfg, flags));
        }
        if (train->parsed()) {
            RunConfig cfg = load_run_config(flags.config_path);
            if (flags.precision)
                cfg.train.precision = gener::train::precision_from_name(*flags.precision);
            return cmd_train(cfg, flags.out_dir, effective_seed(cfg, flags), arch);
        }
        if (evaluate->parsed()) {
            const fs::path cp = checkpoint_path.empty()
                                    ? fs::path(flags.out_dir) / "model.genr"
                                    : fs::path(checkpoint_path);
            const auto precision = flags.precision
                                       ? gener::train::precision_from_name(*flags.precision)
                                       : gener::train::Precision::fast32;
            return cmd_evaluate(cp, flags.out_dir, split, precision);
        }
        if (gridsearch->parsed()) {
            RunConfig cfg = load_run_config(flags.config_path);
            if (flags.precision)
                cfg.train.precision = gener::train::precision_from_name(*flags.precision);
            return cmd_gridsearch(cfg, flags.out_dir, effective_seed(cfg, flags), arch, jobs);
        }
        if (baseline->parsed()) return cmd_baseline(flags.out_dir, split);
    } catch (const gener::GenerError& e) {
        log_line("error", "command.failed",
                 {{"errc", gener::errc_name(e.code())}, {"message", e.what()}});
        return gener::exit_code_for(e.cls());
    } catch (const std::exception& e) {
        log_line("error", "command.failed", {{"message", e.what()}});
        return 1;
    }
    return 0;
}
