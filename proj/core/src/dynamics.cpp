#include "quorum/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "quorum/error.hpp"
#include "quorum/io.hpp"

namespace quorum {

DecompositionSeries decompose_loss(const CheckpointSet& checkpoints, const LabeledDataset& data) {
    if (checkpoints.epochs() < 1) {
        throw InvalidArgumentError("decompose_loss: need at least one epoch");
    }
    DecompositionSeries series;
    for (int e = 0; e < checkpoints.epochs(); ++e) {
        const Evaluation ev =
            evaluate(checkpoints.arch, checkpoints.snapshots[static_cast<std::size_t>(e)], data);
        double sum_c = 0.0, sum_i = 0.0;
        std::size_t n_c = 0, n_i = 0;
        for (const SampleRecord& rec : ev.records) {
            if (rec.correct) {
                sum_c += rec.loss;
                ++n_c;
            } else {
                sum_i += rec.loss;
                ++n_i;
            }
        }
        series.n_correct.push_back(n_c);
        series.n_incorrect.push_back(n_i);
        series.mean_loss_correct.push_back(
            n_c ? std::optional<double>(sum_c / static_cast<double>(n_c)) : std::nullopt);
        series.mean_loss_incorrect.push_back(
            n_i ? std::optional<double>(sum_i / static_cast<double>(n_i)) : std::nullopt);
    }
    return series;
}

LossHistogram loss_histogram(const std::vector<SampleRecord>& records, std::size_t bins,
                             double lo, double hi) {
    if (records.empty()) throw EmptyInputError("loss_histogram: no records");
    if (bins < 1) throw InvalidArgumentError("loss_histogram: need at least one bin");
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw InvalidArgumentError("loss_histogram: range must be finite with low < high");
    }

    LossHistogram h;
    h.bin_low.resize(bins);
    h.bin_high.resize(bins);
    h.density_correct.assign(bins, 0.0);
    h.density_incorrect.assign(bins, 0.0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        h.bin_low[b] = lo + width * static_cast<double>(b);
        h.bin_high[b] = lo + width * static_cast<double>(b + 1);
    }
    for (const SampleRecord& rec : records) {
        auto bin = static_cast<std::ptrdiff_t>(std::floor((rec.loss - lo) / width));
        const std::size_t clamped =
            static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(bins) - 1));
        if (rec.correct) {
            h.density_correct[clamped] += 1.0;
            ++h.n_correct;
        } else {
            h.density_incorrect[clamped] += 1.0;
            ++h.n_incorrect;
        }
    }
    if (h.n_correct > 0) {
        for (double& v : h.density_correct) v /= static_cast<double>(h.n_correct);
    }
    if (h.n_incorrect > 0) {
        for (double& v : h.density_incorrect) v /= static_cast<double>(h.n_incorrect);
    }
    return h;
}

double histogram_intersection(const LossHistogram& h) {
    double overlap = 0.0;
    for (std::size_t b = 0; b < h.density_correct.size(); ++b) {
        overlap += std::min(h.density_correct[b], h.density_incorrect[b]);
    }
    return overlap;
}

SampleTrace trace_sample(const std::vector<CheckpointSet>& cohort, std::size_t sample_id,
                         const LabeledDataset& data) {
    if (cohort.empty()) throw IncompleteCohortError("trace_sample: empty cohort");
    if (sample_id >= data.size()) {
        throw InvalidArgumentError("trace_sample: sample id out of range");
    }
    const std::size_t epochs = static_cast<std::size_t>(cohort.front().epochs());
    for (const CheckpointSet& run : cohort) {
        if (static_cast<std::size_t>(run.epochs()) != epochs || epochs == 0) {
            throw IncompleteCohortError("trace_sample: runs do not cover the same epochs");
        }
    }

    // Single-sample dataset; evaluate() does the rest.
    LabeledDataset one;
    std::vector<std::size_t> shape = data.images.shape;
    shape[0] = 1;
    one.images = Tensor(shape);
    const std::size_t stride = data.sample_numel();
    std::copy_n(data.images.values.begin() + sample_id * stride, stride,
                one.images.values.begin());
    one.labels = {data.labels[sample_id]};
    one.num_classes = data.num_classes;

    SampleTrace trace;
    trace.sample_id = sample_id;
    trace.models = cohort.size();
    trace.epochs = epochs;
    trace.cells.resize(trace.models * trace.epochs);
    for (std::size_t m = 0; m < cohort.size(); ++m) {
        for (std::size_t e = 0; e < epochs; ++e) {
            const Evaluation ev = evaluate(cohort[m].arch, cohort[m].snapshots[e], one);
            TraceCell& cell = trace.cells[m * epochs + e];
            cell.probs = ev.records[0].probs;
            cell.loss = ev.records[0].loss;
            cell.predicted = ev.records[0].predicted;
            cell.correct = ev.records[0].correct;
        }
    }
    return trace;
}

bool classify_stability(const SampleTrace& trace) {
    if (trace.models == 0 || trace.epochs == 0) {
        throw InvalidArgumentError("classify_stability: empty trace");
    }
    const int first = trace.cell(0, trace.epochs - 1).predicted;
    for (std::size_t m = 1; m < trace.models; ++m) {
        if (trace.cell(m, trace.epochs - 1).predicted != first) return false;
    }
    return true;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidArgumentError("least_squares_slope: need two aligned points");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string decomposition_to_csv(const DecompositionSeries& series) {
    CsvWriter csv({"epoch", "mean_loss_correct", "mean_loss_incorrect", "n_correct",
                   "n_incorrect"});
    for (std::size_t e = 0; e < series.epochs(); ++e) {
        csv.add_row({std::to_string(e + 1),
                     series.mean_loss_correct[e] ? format_double(*series.mean_loss_correct[e]) : "",
                     series.mean_loss_incorrect[e] ? format_double(*series.mean_loss_incorrect[e])
                                                   : "",
                     std::to_string(series.n_correct[e]), std::to_string(series.n_incorrect[e])});
    }
    return csv.text();
}

std::string histogram_to_csv(const LossHistogram& h) {
    CsvWriter csv({"bin_low", "bin_high", "density_correct", "density_incorrect"});
    for (std::size_t b = 0; b < h.bin_low.size(); ++b) {
        csv.add_row({format_double(h.bin_low[b]), format_double(h.bin_high[b]),
                     format_double(h.density_correct[b]), format_double(h.density_incorrect[b])});
    }
    return csv.text();
}

std::string trace_to_csv(const SampleTrace& trace) {
    const std::size_t classes = trace.cells.empty() ? 0 : trace.cells.front().probs.size();
    std::vector<std::string> header = {"model", "epoch"};
    for (std::size_t c = 0; c < classes; ++c) header.push_back("class_" + std::to_string(c));
    header.insert(header.end(), {"loss", "predicted", "correct"});
    CsvWriter csv(header);
    for (std::size_t m = 0; m < trace.models; ++m) {
        for (std::size_t e = 0; e < trace.epochs; ++e) {
            const TraceCell& cell = trace.cell(m, e);
            std::vector<std::string> row = {std::to_string(m), std::to_string(e + 1)};
            for (double p : cell.probs) row.push_back(format_double(p));
            row.push_back(format_double(cell.loss));
            row.push_back(std::to_string(cell.predicted));
            row.push_back(cell.correct ? "1" : "0");
            csv.add_row(row);
        }
    }
    return csv.text();
}

}  // namespace quorum
