#pragma once

#include <stdexcept>
#include <string>

namespace gener {

enum class errc {
    self_pair,
    unknown_gene,
    ragged_row,
    non_numeric,
    duplicate_gene,
    empty_file,
    malformed_row,
    insufficient_universe,
    single_class,
    no_positives,
    empty_split,
    shape_mismatch,
    batch_too_small,
    invalid_label,
    config_invalid,
    empty_grid,
    diverged_loss,
    io_failure,
    bad_magic,
    version_unsupported,
    payload_length_mismatch,
    manifest_mismatch,
    length_mismatch,
};

// Failure class decides the process exit code: 2 config, 3 data, 4 training,
// 5 compatibility. The same errc may surface under different classes
// depending on which pipeline stage raises it.
enum class fail_class { config, data, training, compat };

class GenerError : public std::runtime_error {
public:
    GenerError(errc code, fail_class cls, std::string message)
        : std::runtime_error(std::move(message)), code_(code), cls_(cls) {}

    errc code() const noexcept { return code_; }
    fail_class cls() const noexcept { return cls_; }

private:
    errc code_;
    fail_class cls_;
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::self_pair: return "SelfPair";
        case errc::unknown_gene: return "UnknownGene";
        case errc::ragged_row: return "RaggedRow";
        case errc::non_numeric: return "NonNumeric";
        case errc::duplicate_gene: return "DuplicateGene";
        case errc::empty_file: return "EmptyFile";
        case errc::malformed_row: return "MalformedRow";
        case errc::insufficient_universe: return "InsufficientUniverse";
        case errc::single_class: return "SingleClass";
        case errc::no_positives: return "NoPositives";
        case errc::empty_split: return "EmptySplit";
        case errc::shape_mismatch: return "ShapeMismatch";
        case errc::batch_too_small: return "BatchTooSmall";
        case errc::invalid_label: return "InvalidLabel";
        case errc::config_invalid: return "ConfigInvalid";
        case errc::empty_grid: return "EmptyGrid";
        case errc::diverged_loss: return "DivergedLoss";
        case errc::io_failure: return "IoFailure";
        case errc::bad_magic: return "BadMagic";
        case errc::version_unsupported: return "VersionUnsupported";
        case errc::payload_length_mismatch: return "PayloadLengthMismatch";
        case errc::manifest_mismatch: return "ManifestMismatch";
        case errc::length_mismatch: return "LengthMismatch";
    }
    return "Unknown";
}

inline int exit_code_for(fail_class cls) {
    switch (cls) {
        case fail_class::config: return 2;
        case fail_class::data: return 3;
        case fail_class::training: return 4;
        case fail_class::compat: return 5;
    }
    return 1;
}

}  // namespace gener
