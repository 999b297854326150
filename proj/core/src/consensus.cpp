#include "quorum/consensus.hpp"

#include <algorithm>

#include "quorum/error.hpp"
#include "quorum/io.hpp"

namespace quorum {

namespace {

void check_table(const std::vector<ProbVector>& model_probs) {
    if (model_probs.empty()) {
        throw DimensionError("consensus: need at least one model");
    }
    const std::size_t classes = model_probs.front().size();
    if (classes == 0) throw DimensionError("consensus: empty probability vector");
    for (const ProbVector& p : model_probs) {
        if (p.size() != classes) {
            throw DimensionError("consensus: probability vectors disagree on class count");
        }
    }
}

void check_threshold(double threshold) {
    if (!(threshold >= 0.0 && threshold < 1.0)) {
        throw InvalidArgumentError("consensus: threshold must be in [0, 1)");
    }
}

ConsensusDecision decide(const std::vector<double>& scores, double threshold) {
    const std::size_t best = argmax(scores);
    ConsensusDecision d;
    d.score = scores[best];
    if (d.score > threshold) {
        d.label = static_cast<int>(best);
    }
    return d;
}

}  // namespace

std::vector<double> classwise_min(const std::vector<ProbVector>& model_probs) {
    check_table(model_probs);
    std::vector<double> out = model_probs.front();
    for (std::size_t m = 1; m < model_probs.size(); ++m) {
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] = std::min(out[c], model_probs[m][c]);
        }
    }
    return out;
}

ConsensusDecision consensus_classify(const std::vector<ProbVector>& model_probs,
                                     double threshold) {
    check_threshold(threshold);
    return decide(classwise_min(model_probs), threshold);
}

ConsensusDecision consensus_classify_k_of_n(const std::vector<ProbVector>& model_probs,
                                            double threshold, std::size_t k) {
    check_table(model_probs);
    check_threshold(threshold);
    const std::size_t n = model_probs.size();
    if (k < 1 || k > n) {
        throw InvalidArgumentError("consensus: k must be in [1, n]");
    }
    const std::size_t classes = model_probs.front().size();
    std::vector<double> scores(classes);
    std::vector<double> column(n);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t m = 0; m < n; ++m) column[m] = model_probs[m][c];
        // k-th largest: at least k models give this class >= scores[c].
        std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(k - 1),
                         column.end(), std::greater<double>());
        scores[c] = column[k - 1];
    }
    return decide(scores, threshold);
}

namespace {

void check_sweep_inputs(const std::vector<std::vector<ProbVector>>& prob_tables,
                        const std::vector<int>& labels,
                        const std::vector<double>& thresholds) {
    if (prob_tables.empty()) throw DimensionError("sweep: need at least one model");
    for (const auto& table : prob_tables) {
        if (table.size() != labels.size()) {
            throw DimensionError("sweep: per-model sample count does not match labels");
        }
    }
    for (double t : thresholds) check_threshold(t);
}

SweepPoint sweep_point(const std::vector<std::vector<ProbVector>>& prob_tables,
                       const std::vector<int>& labels, double threshold) {
    SweepPoint pt;
    pt.threshold = threshold;
    std::vector<ProbVector> sample_probs(prob_tables.size());
    for (std::size_t s = 0; s < labels.size(); ++s) {
        for (std::size_t m = 0; m < prob_tables.size(); ++m) {
            sample_probs[m] = prob_tables[m][s];
        }
        const ConsensusDecision d = consensus_classify(sample_probs, threshold);
        if (d.classified()) {
            ++pt.n_classified;
            if (*d.label == labels[s]) ++pt.n_correct;
        }
    }
    pt.coverage = labels.empty()
                      ? 0.0
                      : static_cast<double>(pt.n_classified) / static_cast<double>(labels.size());
    if (pt.n_classified > 0) {
        pt.conditional_accuracy =
            static_cast<double>(pt.n_correct) / static_cast<double>(pt.n_classified);
    }
    return pt;
}

}  // namespace

std::vector<SweepPoint> threshold_sweep(const std::vector<std::vector<ProbVector>>& prob_tables,
                                        const std::vector<int>& labels,
                                        const std::vector<double>& thresholds) {
    check_sweep_inputs(prob_tables, labels, thresholds);
    std::vector<SweepPoint> points;
    points.reserve(thresholds.size());
    for (double t : thresholds) {
        points.push_back(sweep_point(prob_tables, labels, t));
    }
    return points;
}

std::vector<LabeledSweep> compare_individual_vs_combined(
    const std::vector<std::vector<ProbVector>>& prob_tables, const std::vector<int>& labels,
    const std::vector<double>& thresholds) {
    check_sweep_inputs(prob_tables, labels, thresholds);
    std::vector<LabeledSweep> out;
    for (std::size_t m = 0; m < prob_tables.size(); ++m) {
        out.push_back({std::to_string(m), threshold_sweep({prob_tables[m]}, labels, thresholds)});
    }
    out.push_back({"combined", threshold_sweep(prob_tables, labels, thresholds)});
    return out;
}

std::string sweep_to_csv(const std::vector<LabeledSweep>& sweeps) {
    CsvWriter csv({"p_t", "model_id", "n_classified", "n_correct", "coverage",
                   "conditional_accuracy"});
    for (const LabeledSweep& sweep : sweeps) {
        for (const SweepPoint& pt : sweep.points) {
            csv.add_row({format_double(pt.threshold), sweep.id, std::to_string(pt.n_classified),
                         std::to_string(pt.n_correct), format_double(pt.coverage),
                         pt.conditional_accuracy ? format_double(*pt.conditional_accuracy) : ""});
        }
    }
    return csv.text();
}

std::string decisions_to_csv(const std::vector<ConsensusDecision>& decisions) {
    CsvWriter csv({"sample_id", "outcome", "class", "score"});
    for (std::size_t s = 0; s < decisions.size(); ++s) {
        const ConsensusDecision& d = decisions[s];
        csv.add_row({std::to_string(s), d.classified() ? "classified" : "rejected",
                     d.classified() ? std::to_string(*d.label) : "",
                     format_double(d.score)});
    }
    return csv.text();
}

}  // namespace quorum
