#pragma once

#include <string>
#include <vector>

#include "quorum/trainer.hpp"

namespace quorum {

// Versioned binary snapshot: magic, format version, architecture descriptor,
// seed, epoch index, little-endian float64 payload in layout order, trailing
// CRC-32 of everything before it.
struct LoadedCheckpoint {
    ArchitectureSpec arch;
    std::uint64_t seed = 0;
    int epoch = 0;  // 1-based
    ParameterVector params;
};

void save_checkpoint(const std::string& path, const ArchitectureSpec& arch, std::uint64_t seed,
                     int epoch, const ParameterVector& params);
LoadedCheckpoint load_checkpoint(const std::string& path);

// Per-epoch metric table as CSV (epoch, train_loss, train_acc, val_loss, val_acc).
std::string metrics_to_csv(const std::vector<EpochMetrics>& metrics);
std::vector<EpochMetrics> metrics_from_csv(const std::string& text);

// A training run on disk: epoch_####.ckpt snapshots plus metrics.csv.
void save_run(const std::string& dir, const CheckpointSet& run);
CheckpointSet load_run(const std::string& dir);

// A cohort is a directory of runs named model_0, model_1, ...
void save_cohort(const std::string& dir, const std::vector<CheckpointSet>& cohort);
std::vector<CheckpointSet> load_cohort(const std::string& dir);

}  // namespace quorum
