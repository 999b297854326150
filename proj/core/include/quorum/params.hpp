#pragma once

#include <cstdint>
#include <vector>

#include "quorum/arch.hpp"

namespace quorum {

// Flat vector of every weight and bias in a network, with a layout table
// mapping segments back to layers. All parameter-space arithmetic
// (SGD steps, interpolation) happens on this representation.
struct ParameterVector {
    std::vector<double> values;
    std::vector<SegmentLayout> layout;

    bool same_layout(const ParameterVector& other) const { return layout == other.layout; }

    static ParameterVector zeros(const ArchitectureSpec& arch) {
        const NetworkPlan plan = plan_network(arch);
        ParameterVector p;
        p.values.assign(plan.param_count, 0.0);
        p.layout = plan.layout;
        return p;
    }
};

// Fan-in-scaled uniform initialization: weights drawn from
// U(-sqrt(1/fan_in), sqrt(1/fan_in)), biases zero. Deterministic in seed.
ParameterVector init_params(const ArchitectureSpec& arch, std::uint64_t seed);

}  // namespace quorum
