#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace quorum {

// Output of a softmax layer: nonnegative, sums to 1 within tolerance.
using ProbVector = std::vector<double>;

// Floor applied inside cross_entropy so a fully saturated wrong prediction
// yields -log(kLossFloor) instead of infinity.
inline constexpr double kLossFloor = 1e-12;

// Numerically stable softmax (max-subtracted). Throws InvalidArgumentError on
// non-finite input or fewer than two logits.
ProbVector softmax(std::span<const double> logits);

// -log(prob[label]), clamped below by -log(kLossFloor).
// Throws InvalidArgumentError when label is out of range.
double cross_entropy(const ProbVector& prob, int label);

// Element-wise multiplication by factor > 0. Softmax argmax is invariant
// under this operation; the output sharpness is not.
std::vector<double> scale_logits(std::span<const double> logits, double factor);

// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> v);

// True when every entry is in [0,1] and the sum is within tol of 1.
bool is_prob_vector(const ProbVector& p, double tol = 1e-6);

}  // namespace quorum
