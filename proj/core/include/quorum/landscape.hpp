#pragma once

#include <string>
#include <vector>

#include "quorum/dataset.hpp"
#include "quorum/network.hpp"

namespace quorum {

struct InterpolationPoint {
    double alpha = 0.0;
    double test_loss = 0.0;
    double test_accuracy = 0.0;
};

// alpha * a + (1 - alpha) * b, element-wise. Both vectors must share a
// layout (same architecture); alpha may lie outside [0, 1].
ParameterVector interpolate_params(const ParameterVector& a, const ParameterVector& b,
                                   double alpha);

// Evaluates the interpolated parameters at every grid point, in eval mode.
// alpha = 1 reproduces a, alpha = 0 reproduces b, bit for bit.
std::vector<InterpolationPoint> interpolation_sweep(const ParameterVector& a,
                                                    const ParameterVector& b,
                                                    const std::vector<double>& alphas,
                                                    const ArchitectureSpec& arch,
                                                    const LabeledDataset& test_data,
                                                    unsigned threads = 1);

// 61 evenly spaced points over [-1.5, 1.5]: wide enough to show the flat
// region around each endpoint and the behavior well beyond both.
std::vector<double> default_alpha_grid();

std::string interpolation_to_csv(const std::vector<InterpolationPoint>& points);

}  // namespace quorum
