#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "quorum/error.hpp"

namespace quorum {

enum class LayerKind { Conv2D, MaxPool, Dense, ReLU, Dropout, SoftmaxOutput };

struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    std::size_t filters = 0;              // Conv2D
    std::size_t kernel_h = 0, kernel_w = 0;
    std::size_t pool_h = 0, pool_w = 0;   // MaxPool
    std::size_t units = 0;                // Dense, SoftmaxOutput (= classes)
    double drop_rate = 0.0;               // Dropout: probability of dropping a unit

    static LayerSpec conv2d(std::size_t filters, std::size_t kh, std::size_t kw) {
        LayerSpec l;
        l.kind = LayerKind::Conv2D;
        l.filters = filters;
        l.kernel_h = kh;
        l.kernel_w = kw;
        return l;
    }
    static LayerSpec maxpool(std::size_t h, std::size_t w) {
        LayerSpec l;
        l.kind = LayerKind::MaxPool;
        l.pool_h = h;
        l.pool_w = w;
        return l;
    }
    static LayerSpec dense(std::size_t units) {
        LayerSpec l;
        l.kind = LayerKind::Dense;
        l.units = units;
        return l;
    }
    static LayerSpec relu() {
        LayerSpec l;
        l.kind = LayerKind::ReLU;
        return l;
    }
    static LayerSpec dropout(double rate) {
        LayerSpec l;
        l.kind = LayerKind::Dropout;
        l.drop_rate = rate;
        return l;
    }
    static LayerSpec softmax_output(std::size_t classes) {
        LayerSpec l;
        l.kind = LayerKind::SoftmaxOutput;
        l.units = classes;
        return l;
    }

    bool operator==(const LayerSpec&) const = default;
};

// Ordered layer stack with a declared input shape. Input shape is either
// (height, width) for single-channel images or (dim) for flat vectors.
struct ArchitectureSpec {
    std::vector<std::size_t> input_shape;
    std::vector<LayerSpec> layers;

    std::size_t num_classes() const;

    bool operator==(const ArchitectureSpec&) const = default;
};

// One contiguous segment of the flat parameter vector (a weight or bias
// tensor of one layer).
struct SegmentLayout {
    std::size_t layer_index = 0;
    std::size_t offset = 0;
    std::size_t length = 0;
    std::vector<std::size_t> shape;

    bool operator==(const SegmentLayout&) const = default;
};

// Per-layer shape chain and parameter segment placement, resolved once from
// an ArchitectureSpec. Throws ShapeError / InvalidArgumentError when the
// stack is inconsistent (shapes do not chain, missing softmax head, bad
// dropout rate).
struct LayerPlan {
    std::vector<std::size_t> in_shape;
    std::vector<std::size_t> out_shape;
    std::size_t weight_offset = 0, weight_len = 0;
    std::vector<std::size_t> weight_shape;
    std::size_t bias_offset = 0, bias_len = 0;
};

struct NetworkPlan {
    std::vector<LayerPlan> layers;
    std::size_t param_count = 0;
    std::vector<SegmentLayout> layout;
};

NetworkPlan plan_network(const ArchitectureSpec& arch);

// Canonical text form, e.g.
//   "28x28 | conv 32 3x3 | maxpool 2x2 | relu | dropout 0.25 | dense 128 | relu | dropout 0.5 | softmax 10"
// parse_architecture accepts exactly what format_architecture emits (plus
// flexible whitespace) and throws FormatError with the offending token.
std::string format_architecture(const ArchitectureSpec& arch);
ArchitectureSpec parse_architecture(const std::string& text);

}  // namespace quorum
