#include "quorum/landscape.hpp"

#include <future>

#include "quorum/error.hpp"
#include "quorum/io.hpp"
#include "quorum/trainer.hpp"

namespace quorum {

ParameterVector interpolate_params(const ParameterVector& a, const ParameterVector& b,
                                   double alpha) {
    if (!a.same_layout(b) || a.values.size() != b.values.size()) {
        throw LayoutError("interpolate_params: parameter layouts differ");
    }
    ParameterVector out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = alpha * a.values[i] + (1.0 - alpha) * b.values[i];
    }
    return out;
}

std::vector<InterpolationPoint> interpolation_sweep(const ParameterVector& a,
                                                    const ParameterVector& b,
                                                    const std::vector<double>& alphas,
                                                    const ArchitectureSpec& arch,
                                                    const LabeledDataset& test_data,
                                                    unsigned threads) {
    if (alphas.empty()) {
        throw InvalidArgumentError("interpolation_sweep: empty alpha grid");
    }
    const NetworkPlan plan = plan_network(arch);
    if (a.layout != plan.layout) {
        throw LayoutError("interpolation_sweep: parameters do not belong to this architecture");
    }
    std::vector<InterpolationPoint> points(alphas.size());
    auto eval_at = [&](std::size_t i) {
        // Endpoints skip the arithmetic so they reproduce a / b exactly.
        const ParameterVector params = alphas[i] == 1.0   ? a
                                       : alphas[i] == 0.0 ? b
                                                          : interpolate_params(a, b, alphas[i]);
        const Evaluation ev = evaluate(arch, params, test_data);
        points[i] = {alphas[i], ev.mean_loss, ev.accuracy};
    };
    if (threads <= 1 || alphas.size() <= 1) {
        for (std::size_t i = 0; i < alphas.size(); ++i) eval_at(i);
    } else {
        std::vector<std::future<void>> futures;
        std::size_t next = 0;
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            futures.push_back(std::async(std::launch::async, eval_at, i));
            if (futures.size() >= threads) {
                futures[next++].get();
            }
        }
        for (; next < futures.size(); ++next) futures[next].get();
    }
    return points;
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    grid.reserve(61);
    for (int i = 0; i <= 60; ++i) {
        grid.push_back(-1.5 + 0.05 * static_cast<double>(i));
    }
    return grid;
}

std::string interpolation_to_csv(const std::vector<InterpolationPoint>& points) {
    CsvWriter csv({"alpha", "test_loss", "test_accuracy"});
    for (const InterpolationPoint& pt : points) {
        csv.add_row({format_double(pt.alpha), format_double(pt.test_loss),
                     format_double(pt.test_accuracy)});
    }
    return csv.text();
}

}  // namespace quorum
