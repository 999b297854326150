#include "quorum/arch.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace quorum {

namespace {

std::size_t flat_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace

std::size_t ArchitectureSpec::num_classes() const {
    if (layers.empty() || layers.back().kind != LayerKind::SoftmaxOutput) {
        throw InvalidArgumentError("architecture: last layer must be a softmax output");
    }
    return layers.back().units;
}

NetworkPlan plan_network(const ArchitectureSpec& arch) {
    if (arch.input_shape.empty() || arch.input_shape.size() > 2) {
        throw ShapeError("architecture: input shape must be (dim) or (height, width)");
    }
    for (std::size_t d : arch.input_shape) {
        if (d == 0) throw ShapeError("architecture: zero input dimension");
    }
    if (arch.layers.empty() || arch.layers.back().kind != LayerKind::SoftmaxOutput) {
        throw InvalidArgumentError("architecture: last layer must be a softmax output");
    }

    NetworkPlan plan;
    // Single-channel images become (1, H, W) activations; flat input stays (D).
    std::vector<std::size_t> shape = arch.input_shape;
    if (shape.size() == 2) shape = {1, shape[0], shape[1]};

    std::size_t offset = 0;
    for (std::size_t li = 0; li < arch.layers.size(); ++li) {
        const LayerSpec& l = arch.layers[li];
        if (l.kind == LayerKind::SoftmaxOutput && li + 1 != arch.layers.size()) {
            throw InvalidArgumentError("architecture: softmax output must be the last layer");
        }
        LayerPlan lp;
        lp.in_shape = shape;
        switch (l.kind) {
            case LayerKind::Conv2D: {
                if (shape.size() != 3) {
                    throw ShapeError("conv: requires a (channels, height, width) input");
                }
                if (l.filters == 0 || l.kernel_h == 0 || l.kernel_w == 0) {
                    throw InvalidArgumentError("conv: filters and kernel dims must be positive");
                }
                if (l.kernel_h > shape[1] || l.kernel_w > shape[2]) {
                    throw ShapeError("conv: kernel larger than input");
                }
                // Valid padding, stride 1.
                lp.out_shape = {l.filters, shape[1] - l.kernel_h + 1, shape[2] - l.kernel_w + 1};
                lp.weight_shape = {l.filters, shape[0], l.kernel_h, l.kernel_w};
                lp.weight_len = flat_size(lp.weight_shape);
                lp.bias_len = l.filters;
                break;
            }
            case LayerKind::MaxPool: {
                if (shape.size() != 3) {
                    throw ShapeError("maxpool: requires a (channels, height, width) input");
                }
                if (l.pool_h == 0 || l.pool_w == 0) {
                    throw InvalidArgumentError("maxpool: window dims must be positive");
                }
                const std::size_t oh = shape[1] / l.pool_h;
                const std::size_t ow = shape[2] / l.pool_w;
                if (oh == 0 || ow == 0) {
                    throw ShapeError("maxpool: window larger than input");
                }
                lp.out_shape = {shape[0], oh, ow};
                break;
            }
            case LayerKind::Dense:
            case LayerKind::SoftmaxOutput: {
                if (l.units == 0) {
                    throw InvalidArgumentError("dense: units must be positive");
                }
                const std::size_t in_dim = flat_size(shape);
                lp.out_shape = {l.units};
                lp.weight_shape = {l.units, in_dim};
                lp.weight_len = l.units * in_dim;
                lp.bias_len = l.units;
                break;
            }
            case LayerKind::ReLU: {
                lp.out_shape = shape;
                break;
            }
            case LayerKind::Dropout: {
                if (!(l.drop_rate >= 0.0 && l.drop_rate < 1.0)) {
                    throw InvalidArgumentError("dropout: rate must be in [0, 1)");
                }
                lp.out_shape = shape;
                break;
            }
        }
        if (lp.weight_len > 0) {
            lp.weight_offset = offset;
            plan.layout.push_back({li, offset, lp.weight_len, lp.weight_shape});
            offset += lp.weight_len;
            lp.bias_offset = offset;
            plan.layout.push_back({li, offset, lp.bias_len, {lp.bias_len}});
            offset += lp.bias_len;
        }
        shape = lp.out_shape;
        plan.layers.push_back(std::move(lp));
    }
    if (arch.layers.back().units < 2) {
        throw InvalidArgumentError("architecture: softmax output needs at least 2 classes");
    }
    plan.param_count = offset;
    return plan;
}

std::string format_architecture(const ArchitectureSpec& arch) {
    std::ostringstream out;
    for (std::size_t i = 0; i < arch.input_shape.size(); ++i) {
        if (i) out << 'x';
        out << arch.input_shape[i];
    }
    for (const LayerSpec& l : arch.layers) {
        out << " | ";
        switch (l.kind) {
            case LayerKind::Conv2D:
                out << "conv " << l.filters << ' ' << l.kernel_h << 'x' << l.kernel_w;
                break;
            case LayerKind::MaxPool:
                out << "maxpool " << l.pool_h << 'x' << l.pool_w;
                break;
            case LayerKind::Dense:
                out << "dense " << l.units;
                break;
            case LayerKind::ReLU:
                out << "relu";
                break;
            case LayerKind::Dropout:
                out << "dropout " << format_double(l.drop_rate);
                break;
            case LayerKind::SoftmaxOutput:
                out << "softmax " << l.units;
                break;
        }
    }
    return out.str();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& tok, const char* what) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (tok.empty() || end != tok.c_str() + tok.size()) {
        throw FormatError(std::string("architecture: bad ") + what + " '" + tok + "'");
    }
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> parse_dims(const std::string& tok, const char* what) {
    std::vector<std::size_t> dims;
    for (const std::string& part : split(tok, 'x')) {
        dims.push_back(parse_size(trim(part), what));
    }
    return dims;
}

}  // namespace

ArchitectureSpec parse_architecture(const std::string& text) {
    std::vector<std::string> fields = split(text, '|');
    if (fields.empty()) throw FormatError("architecture: empty description");

    ArchitectureSpec arch;
    arch.input_shape = parse_dims(trim(fields[0]), "input dimension");

    for (std::size_t i = 1; i < fields.size(); ++i) {
        const std::string field = trim(fields[i]);
        std::istringstream in(field);
        std::string name;
        in >> name;
        std::vector<std::string> args;
        std::string a;
        while (in >> a) args.push_back(a);

        auto need = [&](std::size_t n) {
            if (args.size() != n) {
                throw FormatError("architecture: layer '" + field + "' takes " +
                                  std::to_string(n) + " argument(s)");
            }
        };
        if (name == "conv") {
            need(2);
            const auto k = parse_dims(args[1], "kernel dimension");
            if (k.size() != 2) throw FormatError("architecture: conv kernel must be HxW");
            arch.layers.push_back(LayerSpec::conv2d(parse_size(args[0], "filter count"), k[0], k[1]));
        } else if (name == "maxpool") {
            need(1);
            const auto p = parse_dims(args[0], "pool dimension");
            if (p.size() != 2) throw FormatError("architecture: maxpool window must be HxW");
            arch.layers.push_back(LayerSpec::maxpool(p[0], p[1]));
        } else if (name == "dense") {
            need(1);
            arch.layers.push_back(LayerSpec::dense(parse_size(args[0], "unit count")));
        } else if (name == "relu") {
            need(0);
            arch.layers.push_back(LayerSpec::relu());
        } else if (name == "dropout") {
            need(1);
            char* end = nullptr;
            const double rate = std::strtod(args[0].c_str(), &end);
            if (end != args[0].c_str() + args[0].size()) {
                throw FormatError("architecture: bad dropout rate '" + args[0] + "'");
            }
            arch.layers.push_back(LayerSpec::dropout(rate));
        } else if (name == "softmax") {
            need(1);
            arch.layers.push_back(LayerSpec::softmax_output(parse_size(args[0], "class count")));
        } else {
            throw FormatError("architecture: unknown layer '" + name + "'");
        }
    }
    // Surface inconsistencies (shape chain, dropout range) at parse time.
    plan_network(arch);
    return arch;
}

}  // namespace quorum
