#include "quorum/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace quorum {

namespace {

std::size_t flat_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

// Per-layer state recorded on the forward pass and consumed by backprop.
struct LayerCache {
    std::vector<double> input;            // Conv, Dense, SoftmaxOutput, ReLU
    std::vector<std::size_t> pool_argmax; // MaxPool: flat input index per output cell
    std::vector<double> drop_mask;        // Dropout: per-element multiplier
};

void conv_forward(const LayerSpec& l, const LayerPlan& lp, const double* w, const double* b,
                  const double* in, double* out) {
    const std::size_t in_c = lp.in_shape[0], in_h = lp.in_shape[1], in_w = lp.in_shape[2];
    const std::size_t out_h = lp.out_shape[1], out_w = lp.out_shape[2];
    for (std::size_t f = 0; f < l.filters; ++f) {
        double* dst0 = out + f * out_h * out_w;
        std::fill(dst0, dst0 + out_h * out_w, b[f]);
        for (std::size_t c = 0; c < in_c; ++c) {
            const double* src_c = in + c * in_h * in_w;
            const double* w_fc = w + (f * in_c + c) * l.kernel_h * l.kernel_w;
            for (std::size_t ky = 0; ky < l.kernel_h; ++ky) {
                for (std::size_t kx = 0; kx < l.kernel_w; ++kx) {
                    const double wv = w_fc[ky * l.kernel_w + kx];
                    for (std::size_t oy = 0; oy < out_h; ++oy) {
                        const double* src = src_c + (oy + ky) * in_w + kx;
                        double* dst = dst0 + oy * out_w;
                        for (std::size_t ox = 0; ox < out_w; ++ox) {
                            dst[ox] += wv * src[ox];
                        }
                    }
                }
            }
        }
    }
}

void conv_backward(const LayerSpec& l, const LayerPlan& lp, const double* w, const double* in,
                   const double* dout, double* dw, double* db, double* din) {
    const std::size_t in_c = lp.in_shape[0], in_h = lp.in_shape[1], in_w = lp.in_shape[2];
    const std::size_t out_h = lp.out_shape[1], out_w = lp.out_shape[2];
    for (std::size_t f = 0; f < l.filters; ++f) {
        const double* dout_f = dout + f * out_h * out_w;
        double acc = 0.0;
        for (std::size_t i = 0; i < out_h * out_w; ++i) acc += dout_f[i];
        db[f] += acc;
        for (std::size_t c = 0; c < in_c; ++c) {
            const double* src_c = in + c * in_h * in_w;
            double* din_c = din + c * in_h * in_w;
            const std::size_t wbase = (f * in_c + c) * l.kernel_h * l.kernel_w;
            for (std::size_t ky = 0; ky < l.kernel_h; ++ky) {
                for (std::size_t kx = 0; kx < l.kernel_w; ++kx) {
                    double grad_w = 0.0;
                    const double wv = w[wbase + ky * l.kernel_w + kx];
                    for (std::size_t oy = 0; oy < out_h; ++oy) {
                        const double* src = src_c + (oy + ky) * in_w + kx;
                        double* dsink = din_c + (oy + ky) * in_w + kx;
                        const double* drow = dout_f + oy * out_w;
                        for (std::size_t ox = 0; ox < out_w; ++ox) {
                            grad_w += drow[ox] * src[ox];
                            dsink[ox] += wv * drow[ox];
                        }
                    }
                    dw[wbase + ky * l.kernel_w + kx] += grad_w;
                }
            }
        }
    }
}

void pool_forward(const LayerSpec& l, const LayerPlan& lp, const double* in, double* out,
                  std::vector<std::size_t>* argmax) {
    const std::size_t chans = lp.in_shape[0], in_h = lp.in_shape[1], in_w = lp.in_shape[2];
    const std::size_t out_h = lp.out_shape[1], out_w = lp.out_shape[2];
    if (argmax) argmax->resize(chans * out_h * out_w);
    for (std::size_t c = 0; c < chans; ++c) {
        const double* src = in + c * in_h * in_w;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                std::size_t best = (oy * l.pool_h) * in_w + ox * l.pool_w;
                double best_v = src[best];
                for (std::size_t py = 0; py < l.pool_h; ++py) {
                    for (std::size_t px = 0; px < l.pool_w; ++px) {
                        const std::size_t idx = (oy * l.pool_h + py) * in_w + (ox * l.pool_w + px);
                        if (src[idx] > best_v) {
                            best_v = src[idx];
                            best = idx;
                        }
                    }
                }
                const std::size_t o = (c * out_h + oy) * out_w + ox;
                out[o] = best_v;
                if (argmax) (*argmax)[o] = c * in_h * in_w + best;
            }
        }
    }
}

void dense_forward(const LayerPlan& lp, const double* w, const double* b, const double* in,
                   double* out) {
    const std::size_t in_dim = flat_size(lp.in_shape);
    const std::size_t units = lp.out_shape[0];
    for (std::size_t u = 0; u < units; ++u) {
        const double* row = w + u * in_dim;
        double acc = b[u];
        for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * in[i];
        out[u] = acc;
    }
}

void dense_backward(const LayerPlan& lp, const double* w, const double* in, const double* dout,
                    double* dw, double* db, double* din) {
    const std::size_t in_dim = flat_size(lp.in_shape);
    const std::size_t units = lp.out_shape[0];
    std::fill(din, din + in_dim, 0.0);
    for (std::size_t u = 0; u < units; ++u) {
        const double g = dout[u];
        db[u] += g;
        const double* row = w + u * in_dim;
        double* dwrow = dw + u * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) {
            dwrow[i] += g * in[i];
            din[i] += g * row[i];
        }
    }
}

struct SampleRun {
    std::vector<double> logits;
    ProbVector probs;
    std::vector<LayerCache> caches;  // empty unless recording
};

// Unlike the public softmax(), diverging activations surface as NaN
// probabilities here (and then a non-finite loss) instead of an exception,
// so the trainer can report which epoch went off the rails.
ProbVector softmax_nothrow(const std::vector<double>& logits) {
    double top = -std::numeric_limits<double>::infinity();
    bool finite = true;
    for (double v : logits) {
        if (!std::isfinite(v)) finite = false;
        top = std::max(top, v);
    }
    ProbVector out(logits.size());
    if (!finite) {
        std::fill(out.begin(), out.end(), std::numeric_limits<double>::quiet_NaN());
        return out;
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        denom += out[i];
    }
    for (double& v : out) v /= denom;
    return out;
}

// Runs one sample through the stack. When record is set, keeps what backprop
// needs. rng is consumed only by Dropout layers in Train mode.
SampleRun run_sample(const ArchitectureSpec& arch, const NetworkPlan& plan,
                     const ParameterVector& params, const double* sample, Mode mode, Rng& rng,
                     bool record) {
    SampleRun run;
    if (record) run.caches.resize(arch.layers.size());

    std::vector<double> act(sample, sample + flat_size(plan.layers.front().in_shape));
    std::vector<double> next;
    for (std::size_t li = 0; li < arch.layers.size(); ++li) {
        const LayerSpec& l = arch.layers[li];
        const LayerPlan& lp = plan.layers[li];
        next.assign(flat_size(lp.out_shape), 0.0);
        const double* w = params.values.data() + lp.weight_offset;
        const double* b = params.values.data() + lp.bias_offset;
        switch (l.kind) {
            case LayerKind::Conv2D:
                conv_forward(l, lp, w, b, act.data(), next.data());
                if (record) run.caches[li].input = act;
                break;
            case LayerKind::MaxPool:
                pool_forward(l, lp, act.data(), next.data(),
                             record ? &run.caches[li].pool_argmax : nullptr);
                break;
            case LayerKind::Dense:
            case LayerKind::SoftmaxOutput:
                dense_forward(lp, w, b, act.data(), next.data());
                if (record) run.caches[li].input = act;
                break;
            case LayerKind::ReLU:
                for (std::size_t i = 0; i < act.size(); ++i) next[i] = act[i] > 0.0 ? act[i] : 0.0;
                if (record) run.caches[li].input = act;
                break;
            case LayerKind::Dropout: {
                if (mode == Mode::Train && l.drop_rate > 0.0) {
                    const double keep = 1.0 - l.drop_rate;
                    std::vector<double> mask(act.size());
                    for (std::size_t i = 0; i < act.size(); ++i) {
                        mask[i] = uniform_double(rng) < l.drop_rate ? 0.0 : 1.0 / keep;
                        next[i] = act[i] * mask[i];
                    }
                    if (record) run.caches[li].drop_mask = std::move(mask);
                } else {
                    next = act;  // eval: plain pass-through
                }
                break;
            }
        }
        act.swap(next);
    }
    run.logits = Tensor({act.size()}, act);
    run.probs = softmax_nothrow(run.logits.values);
    return run;
}

// Backprop for one sample; dlogits already includes the 1/N batch factor.
void backprop_sample(const ArchitectureSpec& arch, const NetworkPlan& plan,
                     const ParameterVector& params, const SampleRun& run,
                     const std::vector<double>& dlogits, ParameterVector& grad) {
    std::vector<double> dact = dlogits;
    std::vector<double> dprev;
    for (std::size_t li = arch.layers.size(); li-- > 0;) {
        const LayerSpec& l = arch.layers[li];
        const LayerPlan& lp = plan.layers[li];
        const LayerCache& cache = run.caches[li];
        const double* w = params.values.data() + lp.weight_offset;
        double* dw = grad.values.data() + lp.weight_offset;
        double* db = grad.values.data() + lp.bias_offset;
        switch (l.kind) {
            case LayerKind::Conv2D:
                dprev.assign(flat_size(lp.in_shape), 0.0);
                conv_backward(l, lp, w, cache.input.data(), dact.data(), dw, db, dprev.data());
                break;
            case LayerKind::MaxPool:
                dprev.assign(flat_size(lp.in_shape), 0.0);
                for (std::size_t o = 0; o < dact.size(); ++o) {
                    dprev[cache.pool_argmax[o]] += dact[o];
                }
                break;
            case LayerKind::Dense:
            case LayerKind::SoftmaxOutput:
                dprev.assign(flat_size(lp.in_shape), 0.0);
                dense_backward(lp, w, cache.input.data(), dact.data(), dw, db, dprev.data());
                break;
            case LayerKind::ReLU:
                dprev.resize(dact.size());
                for (std::size_t i = 0; i < dact.size(); ++i) {
                    dprev[i] = cache.input[i] > 0.0 ? dact[i] : 0.0;
                }
                break;
            case LayerKind::Dropout:
                if (!cache.drop_mask.empty()) {
                    dprev.resize(dact.size());
                    for (std::size_t i = 0; i < dact.size(); ++i) {
                        dprev[i] = dact[i] * cache.drop_mask[i];
                    }
                } else {
                    dprev = dact;
                }
                break;
        }
        dact.swap(dprev);
    }
}

void check_batch(const ArchitectureSpec& arch, const NetworkPlan& plan,
                 const ParameterVector& params, const Tensor& batch) {
    if (params.values.size() != plan.param_count || params.layout != plan.layout) {
        throw LayoutError("network: parameter layout does not match architecture");
    }
    if (batch.shape.size() != arch.input_shape.size() + 1 || batch.shape.empty()) {
        throw ShapeError("network: batch must have shape (N, input...)");
    }
    for (std::size_t i = 0; i < arch.input_shape.size(); ++i) {
        if (batch.shape[i + 1] != arch.input_shape[i]) {
            throw ShapeError("network: batch sample shape does not match architecture input");
        }
    }
    if (batch.shape[0] == 0) {
        throw ShapeError("network: empty batch");
    }
}

}  // namespace

ForwardResult forward(const ArchitectureSpec& arch, const ParameterVector& params,
                      const Tensor& batch, Mode mode, Rng& rng) {
    const NetworkPlan plan = plan_network(arch);
    check_batch(arch, plan, params, batch);
    const std::size_t n = batch.shape[0];
    const std::size_t sample_size = batch.numel() / n;
    const std::size_t classes = arch.num_classes();

    ForwardResult result;
    result.logits = Tensor({n, classes});
    result.probs.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        SampleRun run = run_sample(arch, plan, params, batch.values.data() + s * sample_size,
                                   mode, rng, /*record=*/false);
        std::copy(run.logits.values.begin(), run.logits.values.end(),
                  result.logits.values.begin() + s * classes);
        result.probs.push_back(std::move(run.probs));
    }
    return result;
}

BackwardResult backward(const ArchitectureSpec& arch, const ParameterVector& params,
                        const Tensor& batch, const std::vector<int>& labels, Mode mode,
                        Rng& rng) {
    const NetworkPlan plan = plan_network(arch);
    check_batch(arch, plan, params, batch);
    const std::size_t n = batch.shape[0];
    if (labels.size() != n) {
        throw ShapeError("network: label count does not match batch size");
    }
    const std::size_t sample_size = batch.numel() / n;
    const std::size_t classes = arch.num_classes();

    BackwardResult result;
    result.gradient = ParameterVector::zeros(arch);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
        SampleRun run = run_sample(arch, plan, params, batch.values.data() + s * sample_size,
                                   mode, rng, /*record=*/true);
        const int label = labels[s];
        result.loss += cross_entropy(run.probs, label) * inv_n;
        // d(mean CE)/d(logits) for softmax + cross-entropy.
        std::vector<double> dlogits(classes);
        for (std::size_t c = 0; c < classes; ++c) {
            dlogits[c] = (run.probs[c] - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_n;
        }
        backprop_sample(arch, plan, params, run, dlogits, result.gradient);
    }
    return result;
}

ParameterVector sgd_step(const ParameterVector& params, const ParameterVector& gradient,
                         double learning_rate) {
    if (!params.same_layout(gradient) || params.values.size() != gradient.values.size()) {
        throw LayoutError("sgd_step: parameter and gradient layouts differ");
    }
    if (!(learning_rate > 0.0) && learning_rate != 0.0) {
        throw InvalidArgumentError("sgd_step: learning rate must be >= 0");
    }
    ParameterVector out = params;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] -= learning_rate * gradient.values[i];
    }
    return out;
}

}  // namespace quorum
