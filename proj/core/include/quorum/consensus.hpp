#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quorum/ops.hpp"

namespace quorum {

// Outcome of consensus classification for one sample: either a class with
// its consensus score, or a rejection. score is always the maximum consensus
// score over classes, so a rejection carries how close the sample came.
struct ConsensusDecision {
    std::optional<int> label;
    double score = 0.0;

    bool classified() const { return label.has_value(); }
};

// Per-class minimum over models. Entries live in [0,1] but the result is not
// a probability vector (its sum is <= 1).
std::vector<double> classwise_min(const std::vector<ProbVector>& model_probs);

// Classifies when the best class-wise minimum strictly exceeds the
// threshold; equality rejects. Ties in the argmax break to the lowest class.
// threshold must be in [0,1).
ConsensusDecision consensus_classify(const std::vector<ProbVector>& model_probs,
                                     double threshold);

// Relaxed consensus: a class scores the k-th largest probability over
// models, so at least k models back it at that level. k = n recovers
// consensus_classify.
ConsensusDecision consensus_classify_k_of_n(const std::vector<ProbVector>& model_probs,
                                            double threshold, std::size_t k);

struct SweepPoint {
    double threshold = 0.0;
    std::size_t n_classified = 0;
    std::size_t n_correct = 0;  // among classified
    double coverage = 0.0;
    std::optional<double> conditional_accuracy;  // absent when nothing is classified
};

// prob_tables[m][s] is model m's probability vector for sample s.
// One SweepPoint per threshold by applying consensus_classify per sample.
std::vector<SweepPoint> threshold_sweep(const std::vector<std::vector<ProbVector>>& prob_tables,
                                        const std::vector<int>& labels,
                                        const std::vector<double>& thresholds);

// Single-model thresholding (consensus with n = 1) for every model, plus the
// all-model consensus, over a shared threshold grid.
struct LabeledSweep {
    std::string id;  // "0", "1", ... or "combined"
    std::vector<SweepPoint> points;
};

std::vector<LabeledSweep> compare_individual_vs_combined(
    const std::vector<std::vector<ProbVector>>& prob_tables, const std::vector<int>& labels,
    const std::vector<double>& thresholds);

// CSV renderings (external formats).
std::string sweep_to_csv(const std::vector<LabeledSweep>& sweeps);
std::string decisions_to_csv(const std::vector<ConsensusDecision>& decisions);

}  // namespace quorum
