#include "quorum/ops.hpp"

#include <algorithm>
#include <cmath>

#include "quorum/error.hpp"

namespace quorum {

ProbVector softmax(std::span<const double> logits) {
    if (logits.size() < 2) {
        throw InvalidArgumentError("softmax: need at least two logits");
    }
    for (double v : logits) {
        if (!std::isfinite(v)) {
            throw InvalidArgumentError("softmax: non-finite logit");
        }
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    ProbVector out(logits.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        denom += out[i];
    }
    for (double& v : out) v /= denom;
    return out;
}

double cross_entropy(const ProbVector& prob, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= prob.size()) {
        throw InvalidArgumentError("cross_entropy: label out of range");
    }
    return -std::log(std::max(prob[static_cast<std::size_t>(label)], kLossFloor));
}

std::vector<double> scale_logits(std::span<const double> logits, double factor) {
    if (!(factor > 0.0)) {
        throw InvalidArgumentError("scale_logits: factor must be > 0");
    }
    std::vector<double> out(logits.begin(), logits.end());
    for (double& v : out) v *= factor;
    return out;
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

bool is_prob_vector(const ProbVector& p, double tol) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

}  // namespace quorum
