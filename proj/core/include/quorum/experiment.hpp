#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quorum/dataset.hpp"

namespace quorum {

enum class ExperimentKind {
    TrainCohort,
    Sweep,
    Decompose,
    Histogram,
    Trace,
    Interpolate,
    ScaleDemo,
    Compare,
};

std::string kind_name(ExperimentKind kind);
std::optional<ExperimentKind> kind_from_name(const std::string& name);

struct DatasetSpec {
    std::string kind = "digits";  // digits | blobs | mnist
    std::string data_dir;         // mnist IDX directory; falls back to $QUORUM_DATA_DIR
    std::size_t n_train = 1000;
    std::size_t n_val = 1500;
    bool stratified = true;
    std::uint64_t subsample_seed = 1;
    std::size_t blob_classes = 3;
    std::size_t blob_dim = 8;
    double blob_separation = 3.0;
};

struct CohortEntry {
    std::string arch;  // preset name (cnn, mlp256, mlp128x128) or full layer string
    std::uint64_t seed = 0;
};

// Fully resolved experiment description. validate_config() fills defaults;
// run() executes and writes artifacts plus a manifest.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::TrainCohort;
    DatasetSpec dataset;
    std::vector<CohortEntry> cohort;
    int epochs = 20;
    std::size_t batch = 32;
    double learning_rate = 0.05;
    std::optional<double> dropout_override;  // replaces every dropout rate in the cohort
    std::vector<double> thresholds;
    double decision_threshold = 0.5;
    std::size_t consensus_k = 0;  // 0 means k = n
    std::vector<double> alphas;
    std::size_t sample_id = 0;
    std::string run_dir;  // analysis kinds read a stored train-cohort output
    std::size_t model_index = 0;           // decompose / histogram
    std::size_t model_a = 0, model_b = 1;  // interpolate
    int epoch = -1;                        // which snapshot feeds analyses; -1 = final
    bool histogram_all_epochs = false;
    std::size_t histogram_bins = 50;
    double histogram_lo = 0.0, histogram_hi = 10.0;
    double scale_factor = 1.25;
    std::string out_dir = "out";
    std::uint64_t seed = 7;
    unsigned threads = 1;
};

struct ConfigResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;  // complete list, not first-failure

    bool ok() const { return errors.empty(); }
};

// Parses "key = value" config text, applies overrides (flag values win), and
// validates everything it can, accumulating violations instead of stopping
// at the first one.
ConfigResult validate_config(const std::string& text,
                             const std::map<std::string, std::string>& overrides = {});

// Stable rendering of every resolved field; its CRC-32 is the config hash
// recorded in the manifest.
std::string canonical_config_text(const ExperimentConfig& config);

// Expands a cohort entry ("cnn", "mlp256", "mlp128x128", or a raw layer
// string) against the dataset's sample shape and class count.
ArchitectureSpec resolve_architecture(const std::string& name,
                                      const std::vector<std::size_t>& sample_shape,
                                      std::size_t classes);

struct RunResult {
    std::vector<std::string> artifacts;  // paths relative to out_dir
    std::string manifest_path;
};

// Executes the experiment. All artifacts are written atomically and listed
// in <out_dir>/manifest.txt as (key, value, checksum) lines.
RunResult run(const ExperimentConfig& config);

}  // namespace quorum
