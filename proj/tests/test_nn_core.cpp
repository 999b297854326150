#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "quorum/network.hpp"
#include "support/gradcheck.hpp"

using namespace quorum;

namespace {

const std::vector<double> kDemoLogits = {0.0, 0.5, 1.0, 2.0};

ArchitectureSpec tiny_dense(std::size_t in, std::size_t hidden, std::size_t classes) {
    ArchitectureSpec arch;
    arch.input_shape = {in};
    arch.layers = {LayerSpec::dense(hidden), LayerSpec::relu(),
                   LayerSpec::softmax_output(classes)};
    return arch;
}

}  // namespace

TEST_CASE("softmax reproduces the four-class example") {
    const ProbVector p = softmax(kDemoLogits);
    const std::vector<double> expected = {0.0784, 0.1292, 0.2131, 0.5793};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(p[i] == doctest::Approx(expected[i]).epsilon(0).scale(0));
        CHECK(std::abs(p[i] - expected[i]) < 5e-5);
    }

    const auto scaled = scale_logits(kDemoLogits, 1.25);
    const ProbVector q = softmax(scaled);
    const std::vector<double> expected_scaled = {0.0539, 0.1008, 0.1882, 0.6571};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(q[i] - expected_scaled[i]) < 5e-5);
    }
}

TEST_CASE("softmax of a constant vector is uniform") {
    for (double c : {-3.0, 0.0, 42.0}) {
        const ProbVector p = softmax(std::vector<double>{c, c, c});
        for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0));
    }
}

TEST_CASE("softmax is stable and shift-invariant for large logits") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> logits(5);
        for (double& v : logits) v = uniform_double(rng, -1e3, 1e3);
        const ProbVector p = softmax(logits);
        CHECK(is_prob_vector(p));

        const double top = *std::max_element(logits.begin(), logits.end());
        std::vector<double> shifted = logits;
        for (double& v : shifted) v -= top;
        const ProbVector q = softmax(shifted);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == q[i]);

        CHECK(argmax(p) == argmax(logits));
    }
}

TEST_CASE("softmax rejects bad input") {
    CHECK_THROWS_AS(softmax(std::vector<double>{1.0}), InvalidArgumentError);
    CHECK_THROWS_AS(softmax(std::vector<double>{1.0, std::nan("")}), InvalidArgumentError);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(softmax(std::vector<double>{1.0, inf}), InvalidArgumentError);
}

TEST_CASE("cross entropy reproduces the example losses") {
    const ProbVector p = softmax(kDemoLogits);
    CHECK(std::abs(cross_entropy(p, 3) - 0.5460) < 5e-4);
    CHECK(std::abs(cross_entropy(p, 0) - 2.5460) < 5e-4);

    const ProbVector q = softmax(scale_logits(kDemoLogits, 1.25));
    CHECK(std::abs(cross_entropy(q, 3) - 0.4200) < 5e-4);
    CHECK(std::abs(cross_entropy(q, 0) - 2.9200) < 5e-4);
}

TEST_CASE("cross entropy edge cases") {
    CHECK(cross_entropy({0.0, 1.0, 0.0}, 1) == 0.0);
    // Loss floor caps the saturated-wrong case instead of producing inf.
    CHECK(cross_entropy({1.0, 0.0}, 1) == doctest::Approx(-std::log(1e-12)));
    CHECK_THROWS_AS(cross_entropy({0.5, 0.5}, 2), InvalidArgumentError);
    CHECK_THROWS_AS(cross_entropy({0.5, 0.5}, -1), InvalidArgumentError);
}

TEST_CASE("scale_logits multiplies element-wise and validates the factor") {
    const auto scaled = scale_logits(kDemoLogits, 1.25);
    CHECK(scaled == std::vector<double>{0.0, 0.625, 1.25, 2.5});
    CHECK(scale_logits(kDemoLogits, 1.0) == kDemoLogits);
    CHECK_THROWS_AS(scale_logits(kDemoLogits, 0.0), InvalidArgumentError);
    CHECK_THROWS_AS(scale_logits(kDemoLogits, -2.0), InvalidArgumentError);
}

TEST_CASE("scaling by 2 makes the softmax output strictly more peaked") {
    const ProbVector before = softmax(kDemoLogits);
    const ProbVector after = softmax(scale_logits(kDemoLogits, 2.0));
    CHECK(after[argmax(after)] > before[argmax(before)]);
}

TEST_CASE("sharpening cuts the loss on argmax-correct labels and raises it otherwise") {
    // The worked example first.
    const ProbVector p = softmax(kDemoLogits);
    const ProbVector q = softmax(scale_logits(kDemoLogits, 1.25));
    CHECK(cross_entropy(q, 3) < cross_entropy(p, 3));
    CHECK(cross_entropy(q, 0) > cross_entropy(p, 0));

    // Randomized instances with the same setup: a clear argmax
    // (prob > 1/C) and a wrong label, scaled by some factor > 1.
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> logits(4);
        for (double& v : logits) v = uniform_double(rng, -2.0, 2.0);
        const ProbVector base = softmax(logits);
        const std::size_t top = argmax(base);
        if (base[top] <= 0.25 + 1e-9) continue;
        const double factor = uniform_double(rng, 1.05, 3.0);
        const ProbVector sharp = softmax(scale_logits(logits, factor));
        CHECK(cross_entropy(sharp, static_cast<int>(top)) <
              cross_entropy(base, static_cast<int>(top)));
        const int wrong = static_cast<int>((top + 1) % 4);
        CHECK(cross_entropy(sharp, wrong) > cross_entropy(base, wrong));
    }
}

TEST_CASE("argmax is invariant under positive scaling") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> logits(6);
        for (double& v : logits) v = normal_double(rng) * 3.0;
        for (double factor : {0.1, 0.5, 2.0, 10.0}) {
            CHECK(argmax(softmax(scale_logits(logits, factor))) == argmax(softmax(logits)));
        }
    }
}

TEST_CASE("forward with zero parameters gives uniform probabilities") {
    const ArchitectureSpec arch = tiny_dense(3, 4, 5);
    const ParameterVector params = ParameterVector::zeros(arch);
    Tensor batch({2, 3}, {0.3, -0.4, 2.0, 1.0, 1.0, -1.0});
    Rng rng(0);
    const ForwardResult fwd = forward(arch, params, batch, Mode::Eval, rng);
    for (const ProbVector& p : fwd.probs) {
        for (double v : p) CHECK(v == doctest::Approx(0.2));
    }
    for (double v : fwd.logits.values) CHECK(v == 0.0);
}

TEST_CASE("forward is bit-deterministic given the rng seed") {
    ArchitectureSpec arch = tiny_dense(4, 6, 3);
    arch.layers.insert(arch.layers.begin() + 2, LayerSpec::dropout(0.4));
    const ParameterVector params = init_params(arch, 99);
    Tensor batch({3, 4});
    Rng data_rng(5);
    for (double& v : batch.values) v = normal_double(data_rng);

    Rng rng_a(17), rng_b(17);
    const ForwardResult a = forward(arch, params, batch, Mode::Train, rng_a);
    const ForwardResult b = forward(arch, params, batch, Mode::Train, rng_b);
    CHECK(a.logits.values == b.logits.values);

    // Eval mode ignores dropout entirely, so any seed gives the same bits.
    Rng rng_c(1), rng_d(2);
    const ForwardResult c = forward(arch, params, batch, Mode::Eval, rng_c);
    const ForwardResult d = forward(arch, params, batch, Mode::Eval, rng_d);
    CHECK(c.logits.values == d.logits.values);
}

TEST_CASE("forward matches a hand-computed dense layer") {
    ArchitectureSpec arch;
    arch.input_shape = {2};
    arch.layers = {LayerSpec::softmax_output(2)};
    ParameterVector params = ParameterVector::zeros(arch);
    // weights (2x2, row-major) then biases.
    params.values = {0.5, -0.25, 0.1, 0.3, 0.05, -0.1};
    Tensor batch({1, 2}, {1.0, 2.0});
    Rng rng(0);
    const ForwardResult fwd = forward(arch, params, batch, Mode::Eval, rng);

    const double l0 = 0.5 * 1.0 - 0.25 * 2.0 + 0.05;
    const double l1 = 0.1 * 1.0 + 0.3 * 2.0 - 0.1;
    CHECK(fwd.logits.values[0] == doctest::Approx(l0));
    CHECK(fwd.logits.values[1] == doctest::Approx(l1));
    const double z = std::exp(l0) + std::exp(l1);
    CHECK(fwd.probs[0][0] == doctest::Approx(std::exp(l0) / z));
    CHECK(fwd.probs[0][1] == doctest::Approx(std::exp(l1) / z));
}

TEST_CASE("forward rejects shape mismatches") {
    const ArchitectureSpec arch = tiny_dense(3, 4, 2);
    const ParameterVector params = ParameterVector::zeros(arch);
    Rng rng(0);
    Tensor bad({2, 4});
    CHECK_THROWS_AS(forward(arch, params, bad, Mode::Eval, rng), ShapeError);
    Tensor wrong_rank({6});
    CHECK_THROWS_AS(forward(arch, params, wrong_rank, Mode::Eval, rng), ShapeError);
}

TEST_CASE("backward matches central finite differences") {
    struct Case {
        ArchitectureSpec arch;
        Mode mode;
    };
    std::vector<Case> cases;

    cases.push_back({tiny_dense(6, 5, 3), Mode::Train});

    ArchitectureSpec conv_net;
    conv_net.input_shape = {5, 5};
    conv_net.layers = {LayerSpec::conv2d(3, 2, 2), LayerSpec::maxpool(2, 2), LayerSpec::relu(),
                       LayerSpec::dense(4), LayerSpec::softmax_output(3)};
    cases.push_back({conv_net, Mode::Train});

    ArchitectureSpec drop_net;
    drop_net.input_shape = {4, 4};
    drop_net.layers = {LayerSpec::conv2d(2, 3, 3), LayerSpec::relu(), LayerSpec::dense(6),
                       LayerSpec::dropout(0.3), LayerSpec::relu(),
                       LayerSpec::softmax_output(2)};
    cases.push_back({drop_net, Mode::Train});

    Rng rng(2024);
    for (const Case& c : cases) {
        const std::size_t classes = c.arch.num_classes();
        for (int trial = 0; trial < 4; ++trial) {
            const ParameterVector params = init_params(c.arch, rng());
            std::vector<std::size_t> shape = {3};
            shape.insert(shape.end(), c.arch.input_shape.begin(), c.arch.input_shape.end());
            Tensor batch(shape);
            for (double& v : batch.values) v = normal_double(rng);
            std::vector<int> labels(3);
            for (int& l : labels) l = static_cast<int>(uniform_index(rng, classes));

            const auto check =
                quorum::testing::gradient_check(c.arch, params, batch, labels, c.mode, rng());
            CHECK(check.worst_error < 1e-4);
        }
    }
}

TEST_CASE("backward gradient layout matches the parameter layout") {
    const ArchitectureSpec arch = tiny_dense(3, 4, 2);
    const ParameterVector params = init_params(arch, 1);
    Tensor batch({2, 3});
    Rng rng(0);
    const BackwardResult back = backward(arch, params, batch, {0, 1}, Mode::Eval, rng);
    CHECK(back.gradient.layout == params.layout);
    CHECK(back.gradient.values.size() == params.values.size());
}

TEST_CASE("saturated correct prediction leaves almost no gradient") {
    ArchitectureSpec arch;
    arch.input_shape = {2};
    arch.layers = {LayerSpec::softmax_output(2)};
    ParameterVector params = ParameterVector::zeros(arch);
    params.values = {40.0, 0.0, 0.0, -40.0, 0.0, 0.0};  // label-0 logit dominates
    Tensor batch({1, 2}, {1.0, 1.0});
    Rng rng(0);
    const BackwardResult back = backward(arch, params, batch, {0}, Mode::Eval, rng);
    double norm = 0.0;
    for (double g : back.gradient.values) norm += g * g;
    CHECK(std::sqrt(norm) < 1e-6);
    CHECK(back.loss < 1e-6);
}

TEST_CASE("duplicating one sample k times keeps the mean gradient") {
    const ArchitectureSpec arch = tiny_dense(4, 5, 3);
    const ParameterVector params = init_params(arch, 12);
    Tensor one({1, 4}, {0.2, -0.7, 1.1, 0.4});
    Tensor four({4, 4});
    for (int r = 0; r < 4; ++r) {
        std::copy(one.values.begin(), one.values.end(), four.values.begin() + r * 4);
    }
    Rng rng_a(0), rng_b(0);
    const BackwardResult g1 = backward(arch, params, one, {2}, Mode::Train, rng_a);
    const BackwardResult g4 = backward(arch, params, four, {2, 2, 2, 2}, Mode::Train, rng_b);
    CHECK(g1.loss == doctest::Approx(g4.loss).epsilon(1e-12));
    for (std::size_t i = 0; i < g1.gradient.values.size(); ++i) {
        CHECK(g1.gradient.values[i] == doctest::Approx(g4.gradient.values[i]).epsilon(1e-9));
    }
}

TEST_CASE("sgd_step arithmetic") {
    const ArchitectureSpec arch = tiny_dense(2, 2, 2);
    const ParameterVector params = init_params(arch, 5);
    ParameterVector grad = ParameterVector::zeros(arch);
    for (std::size_t i = 0; i < grad.values.size(); ++i) grad.values[i] = 0.1 * (i + 1);

    SUBCASE("zero learning rate is the identity") {
        CHECK(sgd_step(params, grad, 0.0).values == params.values);
    }
    SUBCASE("unit step from zero lands on minus the gradient") {
        const ParameterVector zero = ParameterVector::zeros(arch);
        const ParameterVector stepped = sgd_step(zero, grad, 1.0);
        for (std::size_t i = 0; i < grad.values.size(); ++i) {
            CHECK(stepped.values[i] == -grad.values[i]);
        }
    }
    SUBCASE("two steps accumulate both gradients") {
        ParameterVector g2 = grad;
        for (double& v : g2.values) v *= 0.5;
        const ParameterVector once = sgd_step(sgd_step(params, grad, 0.2), g2, 0.2);
        for (std::size_t i = 0; i < params.values.size(); ++i) {
            CHECK(once.values[i] ==
                  doctest::Approx(params.values[i] - 0.2 * (grad.values[i] + g2.values[i])));
        }
    }
    SUBCASE("layout mismatch is rejected") {
        const ParameterVector other = ParameterVector::zeros(tiny_dense(3, 2, 2));
        CHECK_THROWS_AS(sgd_step(params, other, 0.1), LayoutError);
    }
}

TEST_CASE("init_params is deterministic and fan-in bounded") {
    ArchitectureSpec arch;
    arch.input_shape = {8, 8};
    arch.layers = {LayerSpec::conv2d(4, 3, 3), LayerSpec::relu(), LayerSpec::dense(10),
                   LayerSpec::softmax_output(4)};
    const ParameterVector a = init_params(arch, 7);
    const ParameterVector b = init_params(arch, 7);
    const ParameterVector c = init_params(arch, 8);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);

    const NetworkPlan plan = plan_network(arch);
    for (const SegmentLayout& seg : plan.layout) {
        if (seg.shape.size() < 2) {
            for (std::size_t i = 0; i < seg.length; ++i) CHECK(a.values[seg.offset + i] == 0.0);
            continue;
        }
        std::size_t fan_in = 1;
        for (std::size_t d = 1; d < seg.shape.size(); ++d) fan_in *= seg.shape[d];
        const double limit = std::sqrt(1.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < seg.length; ++i) {
            CHECK(std::abs(a.values[seg.offset + i]) <= limit);
        }
    }
}

TEST_CASE("architecture text round trip and validation") {
    const std::string text =
        "28x28 | conv 32 3x3 | maxpool 2x2 | relu | dropout 0.25 | dense 128 | relu | "
        "dropout 0.5 | softmax 10";
    const ArchitectureSpec arch = parse_architecture(text);
    CHECK(format_architecture(arch) == text);
    CHECK(arch.num_classes() == 10);

    const NetworkPlan plan = plan_network(arch);
    // conv: 32*1*3*3 + 32; dense: 128*5408 + 128; softmax: 10*128 + 10.
    CHECK(plan.param_count == 320 + 692224 + 128 + 1290);

    CHECK_THROWS_AS(parse_architecture("28x28 | dense 10"), InvalidArgumentError);
    CHECK_THROWS_AS(parse_architecture("28x28 | dropout 1.0 | softmax 10"),
                    InvalidArgumentError);
    CHECK_THROWS_AS(parse_architecture("8 | conv 4 3x3 | softmax 2"), ShapeError);
    CHECK_THROWS_AS(parse_architecture("28x28 | pancake 3 | softmax 10"), FormatError);
}

TEST_CASE("parameter layout segments tile the vector") {
    ArchitectureSpec arch;
    arch.input_shape = {6, 6};
    arch.layers = {LayerSpec::conv2d(2, 3, 3), LayerSpec::maxpool(2, 2), LayerSpec::relu(),
                   LayerSpec::dense(5), LayerSpec::softmax_output(3)};
    const NetworkPlan plan = plan_network(arch);
    std::size_t expected_offset = 0;
    for (const SegmentLayout& seg : plan.layout) {
        CHECK(seg.offset == expected_offset);
        std::size_t shape_len = 1;
        for (std::size_t d : seg.shape) shape_len *= d;
        CHECK(shape_len == seg.length);
        expected_offset += seg.length;
    }
    CHECK(expected_offset == plan.param_count);
}
