#pragma once

#include <cstdint>
#include <vector>

#include "quorum/dataset.hpp"
#include "quorum/network.hpp"

namespace quorum {

struct TrainConfig {
    ArchitectureSpec arch;
    std::uint64_t seed = 0;
    int epochs = 20;
    std::size_t batch_size = 32;
    double learning_rate = 0.05;
    const LabeledDataset* train_data = nullptr;
    const LabeledDataset* val_data = nullptr;
};

struct EpochMetrics {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

// One parameter snapshot per completed epoch plus eval-mode metrics on both
// splits, aligned index-for-index.
struct CheckpointSet {
    ArchitectureSpec arch;
    std::uint64_t seed = 0;
    std::vector<ParameterVector> snapshots;
    std::vector<EpochMetrics> metrics;

    int epochs() const { return static_cast<int>(snapshots.size()); }
    const ParameterVector& final_params() const { return snapshots.back(); }
};

struct SampleRecord {
    ProbVector probs;
    double loss = 0.0;
    int predicted = 0;
    bool correct = false;
};

struct Evaluation {
    double mean_loss = 0.0;
    double accuracy = 0.0;
    std::vector<SampleRecord> records;
};

// Eval-mode pass over a dataset: per-sample probabilities, losses, argmax
// predictions (lowest index on ties) and correctness flags.
Evaluation evaluate(const ArchitectureSpec& arch, const ParameterVector& params,
                    const LabeledDataset& data);

// Plain minibatch SGD. Batch order is reshuffled every epoch from the run
// seed; snapshot e is the parameter state after e+1 full passes. Bitwise
// deterministic given the config. Throws TrainingDivergedError (naming the
// epoch) when a non-finite loss shows up.
CheckpointSet train(const TrainConfig& config);

// Maps train over configs. Runs are independent; with threads > 1 they
// execute concurrently but the result is identical to the sequential map.
std::vector<CheckpointSet> train_cohort(const std::vector<TrainConfig>& configs,
                                        unsigned threads = 1);

}  // namespace quorum
