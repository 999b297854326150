#include "quorum/trainer.hpp"

#include <cmath>
#include <future>
#include <string>

#include "quorum/error.hpp"

namespace quorum {

namespace {

Tensor gather_batch(const LabeledDataset& data, const std::vector<std::size_t>& order,
                    std::size_t begin, std::size_t end, std::vector<int>* labels) {
    const std::size_t stride = data.sample_numel();
    std::vector<std::size_t> shape = data.images.shape;
    shape[0] = end - begin;
    Tensor batch(shape);
    labels->resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        std::copy_n(data.images.values.begin() + order[i] * stride, stride,
                    batch.values.begin() + (i - begin) * stride);
        (*labels)[i - begin] = data.labels[order[i]];
    }
    return batch;
}

}  // namespace

Evaluation evaluate(const ArchitectureSpec& arch, const ParameterVector& params,
                    const LabeledDataset& data) {
    if (data.size() == 0) throw ShapeError("evaluate: empty dataset");
    Rng rng(0);  // eval mode draws nothing; fixed engine keeps the call pure
    ForwardResult fwd = forward(arch, params, data.images, Mode::Eval, rng);

    Evaluation ev;
    ev.records.resize(data.size());
    std::size_t correct = 0;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        SampleRecord& rec = ev.records[i];
        rec.probs = std::move(fwd.probs[i]);
        rec.predicted = static_cast<int>(argmax(rec.probs));
        rec.loss = cross_entropy(rec.probs, data.labels[i]);
        rec.correct = rec.predicted == data.labels[i];
        loss_sum += rec.loss;
        correct += rec.correct ? 1 : 0;
    }
    ev.mean_loss = loss_sum / static_cast<double>(data.size());
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return ev;
}

CheckpointSet train(const TrainConfig& config) {
    if (config.train_data == nullptr || config.val_data == nullptr) {
        throw InvalidArgumentError("train: config must reference train and validation data");
    }
    if (config.epochs < 1) throw InvalidArgumentError("train: epochs must be >= 1");
    if (config.batch_size < 1) throw InvalidArgumentError("train: batch size must be >= 1");
    if (!(config.learning_rate > 0.0)) {
        throw InvalidArgumentError("train: learning rate must be > 0");
    }
    const LabeledDataset& train_data = *config.train_data;
    const LabeledDataset& val_data = *config.val_data;
    if (train_data.num_classes != config.arch.num_classes()) {
        throw ShapeError("train: dataset class count does not match architecture output");
    }

    CheckpointSet out;
    out.arch = config.arch;
    out.seed = config.seed;

    ParameterVector params = init_params(config.arch, config.seed);
    // Separate stream for batch order and dropout so adding epochs never
    // perturbs earlier ones.
    Rng train_rng(config.seed ^ 0x9E3779B97F4A7C15ull);

    std::vector<std::size_t> order(train_data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[uniform_index(train_rng, i)]);
        }
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, order.size());
            std::vector<int> labels;
            Tensor batch = gather_batch(train_data, order, begin, end, &labels);
            BackwardResult back =
                backward(config.arch, params, batch, labels, Mode::Train, train_rng);
            if (!std::isfinite(back.loss)) {
                throw TrainingDivergedError(
                    "train: non-finite loss at epoch " + std::to_string(epoch + 1), epoch + 1);
            }
            params = sgd_step(params, back.gradient, config.learning_rate);
        }
        EpochMetrics m;
        const Evaluation train_ev = evaluate(config.arch, params, train_data);
        const Evaluation val_ev = evaluate(config.arch, params, val_data);
        m.train_loss = train_ev.mean_loss;
        m.train_accuracy = train_ev.accuracy;
        m.val_loss = val_ev.mean_loss;
        m.val_accuracy = val_ev.accuracy;
        out.snapshots.push_back(params);
        out.metrics.push_back(m);
    }
    return out;
}

namespace {

// Re-throws a per-run failure tagged with the run index, keeping the
// divergence type (and epoch) intact.
[[noreturn]] void rethrow_tagged(std::size_t run) {
    const std::string tag = "run " + std::to_string(run) + ": ";
    try {
        throw;
    } catch (const TrainingDivergedError& e) {
        throw TrainingDivergedError(tag + e.what(), e.epoch);
    } catch (const Error& e) {
        throw Error(tag + e.what());
    }
}

}  // namespace

std::vector<CheckpointSet> train_cohort(const std::vector<TrainConfig>& configs,
                                        unsigned threads) {
    std::vector<CheckpointSet> results(configs.size());
    if (threads <= 1 || configs.size() <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) {
            try {
                results[i] = train(configs[i]);
            } catch (const Error&) {
                rethrow_tagged(i);
            }
        }
        return results;
    }
    std::vector<std::future<CheckpointSet>> futures;
    futures.reserve(configs.size());
    for (const TrainConfig& c : configs) {
        futures.push_back(std::async(std::launch::async, [&c] { return train(c); }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) {
        try {
            results[i] = futures[i].get();
        } catch (const Error&) {
            rethrow_tagged(i);
        }
    }
    return results;
}

}  // namespace quorum
