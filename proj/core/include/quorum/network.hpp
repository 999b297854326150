#pragma once

#include <vector>

#include "quorum/arch.hpp"
#include "quorum/ops.hpp"
#include "quorum/params.hpp"
#include "quorum/rng.hpp"
#include "quorum/tensor.hpp"

namespace quorum {

enum class Mode { Train, Eval };

struct ForwardResult {
    Tensor logits;                  // (batch, classes)
    std::vector<ProbVector> probs;  // one per sample
};

struct BackwardResult {
    double loss = 0.0;  // mean cross-entropy over the batch
    ParameterVector gradient;
};

// Runs the layer stack over a batch. batch shape is (N, ...) where ... must
// match the architecture input shape. Dropout uses inverted scaling: in Train
// mode retained activations are divided by the retain probability and Eval
// mode is a plain pass-through, so evaluation never consumes randomness.
// Deterministic given (params, batch, mode, rng state).
ForwardResult forward(const ArchitectureSpec& arch, const ParameterVector& params,
                      const Tensor& batch, Mode mode, Rng& rng);

// Forward plus backpropagation. The gradient has the same layout as params
// and is the gradient of the batch-mean cross-entropy.
BackwardResult backward(const ArchitectureSpec& arch, const ParameterVector& params,
                        const Tensor& batch, const std::vector<int>& labels, Mode mode,
                        Rng& rng);

// params - learning_rate * gradient. Throws LayoutError on layout mismatch.
ParameterVector sgd_step(const ParameterVector& params, const ParameterVector& gradient,
                         double learning_rate);

}  // namespace quorum
