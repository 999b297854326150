#pragma once

// Finite-difference gradient oracle, independent of the backprop path it
// checks: loss is recomputed through forward() + cross_entropy only.

#include <algorithm>
#include <cmath>
#include <vector>

#include "quorum/network.hpp"

namespace quorum::testing {

inline double loss_via_forward(const ArchitectureSpec& arch, const ParameterVector& params,
                               const Tensor& batch, const std::vector<int>& labels, Mode mode,
                               std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    const ForwardResult fwd = forward(arch, params, batch, mode, rng);
    double loss = 0.0;
    for (std::size_t s = 0; s < labels.size(); ++s) {
        loss += cross_entropy(fwd.probs[s], labels[s]);
    }
    return loss / static_cast<double>(labels.size());
}

struct GradCheckResult {
    double worst_error = 0.0;   // max over coordinates of scaled difference
    std::size_t worst_index = 0;
};

// Central differences with per-coordinate step; the error is
// |analytic - numeric| / max(1, |analytic|, |numeric|).
inline GradCheckResult gradient_check(const ArchitectureSpec& arch,
                                      const ParameterVector& params, const Tensor& batch,
                                      const std::vector<int>& labels, Mode mode,
                                      std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    const BackwardResult back = backward(arch, params, batch, labels, mode, rng);

    GradCheckResult result;
    ParameterVector probe = params;
    for (std::size_t i = 0; i < params.values.size(); ++i) {
        const double saved = probe.values[i];
        const double h = 1e-5 * std::max(1.0, std::abs(saved));
        probe.values[i] = saved + h;
        const double up = loss_via_forward(arch, probe, batch, labels, mode, rng_seed);
        probe.values[i] = saved - h;
        const double down = loss_via_forward(arch, probe, batch, labels, mode, rng_seed);
        probe.values[i] = saved;

        const double numeric = (up - down) / (2.0 * h);
        const double analytic = back.gradient.values[i];
        const double err = std::abs(analytic - numeric) /
                           std::max({1.0, std::abs(analytic), std::abs(numeric)});
        if (err > result.worst_error) {
            result.worst_error = err;
            result.worst_index = i;
        }
    }
    return result;
}

}  // namespace quorum::testing
