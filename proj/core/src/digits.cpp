#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "quorum/dataset.hpp"
#include "quorum/error.hpp"
#include "quorum/rng.hpp"

// Procedural 28x28 digit renderer. Each class has one or two stroke
// templates defined on the unit square (y grows downward); samples get a
// random affine transform, stroke thickness, intensity and pixel noise.

namespace quorum {

namespace {

struct Pt {
    double x, y;
};

using Stroke = std::vector<Pt>;  // polyline

Stroke arc(double cx, double cy, double rx, double ry, double a0_deg, double a1_deg) {
    Stroke s;
    const int steps = std::max(6, static_cast<int>(std::abs(a1_deg - a0_deg) / 9.0));
    for (int i = 0; i <= steps; ++i) {
        const double a = (a0_deg + (a1_deg - a0_deg) * i / steps) * M_PI / 180.0;
        s.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
    return s;
}

Stroke line(Pt a, Pt b) { return {a, b}; }

using Glyph = std::vector<Stroke>;

// Template variants per digit. Coordinates hand-tuned on an ASCII dump.
std::vector<Glyph> glyph_variants(int digit) {
    switch (digit) {
        case 0:
            return {{arc(0.5, 0.5, 0.26, 0.36, 0, 360)}};
        case 1:
            return {
                {line({0.5, 0.12}, {0.5, 0.88}), line({0.5, 0.12}, {0.36, 0.30})},
                {line({0.5, 0.12}, {0.5, 0.88}), line({0.36, 0.88}, {0.64, 0.88})},
            };
        case 2:
            return {{arc(0.5, 0.32, 0.22, 0.20, 160, 350),
                     line({0.72, 0.29}, {0.28, 0.84}),
                     line({0.28, 0.84}, {0.74, 0.84})}};
        case 3:
            return {{arc(0.47, 0.31, 0.20, 0.17, 150, 395),
                     arc(0.47, 0.66, 0.22, 0.20, -35, 200)}};
        case 4:
            return {
                {line({0.60, 0.12}, {0.26, 0.58}), line({0.26, 0.58}, {0.78, 0.58}),
                 line({0.62, 0.34}, {0.62, 0.90})},
                {line({0.32, 0.12}, {0.30, 0.52}), line({0.30, 0.52}, {0.76, 0.52}),
                 line({0.62, 0.12}, {0.62, 0.90})},
            };
        case 5:
            return {{line({0.70, 0.14}, {0.33, 0.14}), line({0.33, 0.14}, {0.31, 0.44}),
                     arc(0.47, 0.64, 0.22, 0.21, 215, 480)}};
        case 6:
            return {{Stroke{{0.64, 0.12}, {0.46, 0.36}, {0.36, 0.58}},
                     arc(0.51, 0.67, 0.19, 0.17, 0, 360)}};
        case 7:
            return {
                {line({0.26, 0.15}, {0.74, 0.15}), line({0.74, 0.15}, {0.42, 0.88})},
                {line({0.26, 0.15}, {0.74, 0.15}), line({0.74, 0.15}, {0.42, 0.88}),
                 line({0.38, 0.50}, {0.64, 0.50})},
            };
        case 8:
            return {{arc(0.5, 0.31, 0.165, 0.155, 0, 360), arc(0.5, 0.66, 0.215, 0.20, 0, 360)}};
        case 9:
            return {{arc(0.52, 0.34, 0.18, 0.17, 0, 360),
                     Stroke{{0.70, 0.36}, {0.68, 0.60}, {0.58, 0.88}}}};
        default:
            throw InvalidArgumentError("digits: digit out of range");
    }
}

double point_segment_dist(Pt p, Pt a, Pt b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double wx = p.x - a.x, wy = p.y - a.y;
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

struct JitterProfile {
    double max_rotate;   // radians
    double scale_lo, scale_hi;
    double max_shear;
    double max_shift;    // pixels
    double thick_lo, thick_hi;
    double noise_sigma;
};

constexpr JitterProfile kNormal = {0.21, 0.85, 1.15, 0.15, 2.0, 1.7, 2.9, 0.06};
constexpr JitterProfile kHeavy = {0.55, 0.60, 1.30, 0.35, 3.5, 1.1, 3.8, 0.16};

void render_digit(int digit, Rng& rng, bool heavy, double* out /* 28*28 */) {
    const JitterProfile& jp = heavy ? kHeavy : kNormal;
    const auto variants = glyph_variants(digit);
    const Glyph& glyph = variants[variants.size() > 1 ? uniform_index(rng, variants.size()) : 0];

    const double theta = uniform_double(rng, -jp.max_rotate, jp.max_rotate);
    const double sx = uniform_double(rng, jp.scale_lo, jp.scale_hi);
    const double sy = uniform_double(rng, jp.scale_lo, jp.scale_hi);
    const double shear = uniform_double(rng, -jp.max_shear, jp.max_shear);
    const double shift_x = uniform_double(rng, -jp.max_shift, jp.max_shift);
    const double shift_y = uniform_double(rng, -jp.max_shift, jp.max_shift);
    const double thick = uniform_double(rng, jp.thick_lo, jp.thick_hi);
    const double fg = uniform_double(rng, 0.75, 1.0);

    const double ct = std::cos(theta), st = std::sin(theta);
    // Unit-square glyph -> 20px box at offset 4, affine-jittered about center.
    auto to_pixels = [&](Pt p) -> Pt {
        double x = p.x - 0.5, y = p.y - 0.5;
        x += shear * y;
        x *= sx;
        y *= sy;
        const double xr = ct * x - st * y;
        const double yr = st * x + ct * y;
        return {14.0 + 20.0 * xr + shift_x, 14.0 + 20.0 * yr + shift_y};
    };

    std::vector<std::array<Pt, 2>> segments;
    for (const Stroke& stroke : glyph) {
        for (std::size_t i = 0; i + 1 < stroke.size(); ++i) {
            segments.push_back({to_pixels(stroke[i]), to_pixels(stroke[i + 1])});
        }
    }

    const double core = thick * 0.5;
    for (int py = 0; py < 28; ++py) {
        for (int px = 0; px < 28; ++px) {
            const Pt p{px + 0.5, py + 0.5};
            double d = 1e9;
            for (const auto& seg : segments) {
                d = std::min(d, point_segment_dist(p, seg[0], seg[1]));
            }
            // Solid core with a ~1px antialiased edge.
            const double ink = std::clamp(1.0 - (d - core), 0.0, 1.0);
            out[py * 28 + px] = fg * ink;
        }
    }
    for (int i = 0; i < 28 * 28; ++i) {
        const double v = out[i] + jp.noise_sigma * normal_double(rng);
        // Byte quantization keeps rendered data identical to an IDX round trip.
        out[i] = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    }
}

}  // namespace

LabeledDataset synthetic_digits(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgumentError("digits: need at least one sample");
    Rng rng(seed);
    LabeledDataset data;
    data.images = Tensor({n, 28, 28});
    data.labels.resize(n);
    data.num_classes = 10;
    for (std::size_t i = 0; i < n; ++i) {
        const int digit = static_cast<int>(i % 10);
        const bool heavy = uniform_double(rng) < 0.08;
        render_digit(digit, rng, heavy, data.images.values.data() + i * 28 * 28);
        data.labels[i] = digit;
    }
    // Decouple sample order from the class-cycling construction.
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    }
    LabeledDataset out;
    out.images = Tensor({n, 28, 28});
    out.labels.resize(n);
    out.num_classes = 10;
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(data.images.values.begin() + perm[i] * 784, 784,
                    out.images.values.begin() + i * 784);
        out.labels[i] = data.labels[perm[i]];
    }
    return out;
}

}  // namespace quorum
