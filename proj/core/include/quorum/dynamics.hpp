#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quorum/trainer.hpp"

namespace quorum {

// Dense (model x epoch) grid of evaluation results for one validation sample.
struct TraceCell {
    ProbVector probs;
    double loss = 0.0;
    int predicted = 0;
    bool correct = false;
};

struct SampleTrace {
    std::size_t sample_id = 0;
    std::size_t models = 0;
    std::size_t epochs = 0;
    std::vector<TraceCell> cells;  // model-major

    const TraceCell& cell(std::size_t model, std::size_t epoch) const {
        return cells[model * epochs + epoch];
    }
};

// Per-epoch mean validation loss split by that epoch's correctness.
// An empty partition is absent (nullopt), never zero.
struct DecompositionSeries {
    std::vector<std::optional<double>> mean_loss_correct;
    std::vector<std::optional<double>> mean_loss_incorrect;
    std::vector<std::size_t> n_correct;
    std::vector<std::size_t> n_incorrect;

    std::size_t epochs() const { return n_correct.size(); }
};

DecompositionSeries decompose_loss(const CheckpointSet& checkpoints, const LabeledDataset& data);

// Normalized loss-mass histograms for the correct / incorrect partitions of
// one evaluation. Losses outside [lo, hi) clamp into the edge bins. Each
// density sums to 1 when its partition is nonempty.
struct LossHistogram {
    std::vector<double> bin_low;
    std::vector<double> bin_high;
    std::vector<double> density_correct;
    std::vector<double> density_incorrect;
    std::size_t n_correct = 0;
    std::size_t n_incorrect = 0;
};

LossHistogram loss_histogram(const std::vector<SampleRecord>& records, std::size_t bins,
                             double lo, double hi);

// Overlap between the two densities: sum over bins of min(correct, incorrect).
double histogram_intersection(const LossHistogram& h);

// Fills the full (model x epoch) grid by evaluating every snapshot on the
// chosen sample. All runs must cover the same epoch count.
SampleTrace trace_sample(const std::vector<CheckpointSet>& cohort, std::size_t sample_id,
                         const LabeledDataset& data);

// Stable when every model gives the same predicted class at the final epoch.
bool classify_stability(const SampleTrace& trace);

// Ordinary least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

// CSV renderings of the three analyses.
std::string decomposition_to_csv(const DecompositionSeries& series);
std::string histogram_to_csv(const LossHistogram& h);
std::string trace_to_csv(const SampleTrace& trace);

}  // namespace quorum
