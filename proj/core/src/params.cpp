#include "quorum/params.hpp"

#include <cmath>

#include "quorum/rng.hpp"

namespace quorum {

ParameterVector init_params(const ArchitectureSpec& arch, std::uint64_t seed) {
    ParameterVector p = ParameterVector::zeros(arch);
    Rng rng(seed);
    for (const SegmentLayout& seg : p.layout) {
        if (seg.shape.size() < 2) continue;  // bias segments stay zero
        std::size_t fan_in = 1;
        for (std::size_t i = 1; i < seg.shape.size(); ++i) fan_in *= seg.shape[i];
        const double limit = std::sqrt(1.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < seg.length; ++i) {
            p.values[seg.offset + i] = uniform_double(rng, -limit, limit);
        }
    }
    return p;
}

}  // namespace quorum
