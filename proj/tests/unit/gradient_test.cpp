#include "aelab/datasets.hpp"
#include "aelab/models.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace aelab;

namespace {

constexpr double kStep = 1e-5;
constexpr double kTolerance = 1e-4;

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
    return std::abs(analytic - numeric) / denom;
}

double loss_at(const Network& net, const Matrix& x, const ForwardOptions& opts, double kl_weight) {
    return evaluate_loss(forward(net, x, opts), x, kl_weight).total;
}

// Largest relative error between backprop and central differences over every parameter.
double worst_gradient_error(Network net, const Matrix& x, const ForwardOptions& opts, double kl_weight) {
    const Gradients grads = backward(net, forward(net, x, opts), x, kl_weight);
    const auto analytic = grads.refs();
    auto params = parameter_refs(net);
    EXPECT_EQ(params.size(), analytic.size());
    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& m = *params[p].value;
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) {
                const double saved = m(i, j);
                m(i, j) = saved + kStep;
                const double up = loss_at(net, x, opts, kl_weight);
                m(i, j) = saved - kStep;
                const double down = loss_at(net, x, opts, kl_weight);
                m(i, j) = saved;
                const double err = relative_error((*analytic[p])(i, j), (up - down) / (2 * kStep));
                EXPECT_LT(err, kTolerance) << params[p].name << "(" << i << "," << j << ")";
                worst = std::max(worst, err);
            }
    }
    return worst;
}

// Central differences are meaningless when a relu pre-activation sits within
// the step of its kink (e.g. a dead input feeding an exact-zero bottleneck).
bool away_from_kinks(const Network& net, const Matrix& x, const ForwardOptions& opts) {
    const ForwardTrace t = forward(net, x, opts);
    auto clear = [](const std::vector<LayerTrace>& layers, const std::vector<DenseLayer>& defs) {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            if (defs[l].activation != Activation::relu) continue;
            const Matrix& pre = layers[l].pre;
            for (std::size_t i = 0; i < pre.rows(); ++i)
                for (std::size_t j = 0; j < pre.cols(); ++j)
                    if (std::abs(pre(i, j)) < 1e-3) return false;
        }
        return true;
    };
    return clear(t.encoder, net.encoder) && clear(t.decoder, net.decoder);
}

ForwardOptions training_with(Matrix eps) {
    ForwardOptions opts;
    opts.mode = Mode::training;
    opts.noise = PinnedNoise{std::move(eps)};
    return opts;
}

}  // namespace

TEST(GradientCheck, ClassicalQuadNetwork) {
    const Dataset quad = gen_quad_dataset();
    ForwardOptions opts;
    opts.mode = Mode::training;
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20 && checked < 5; ++seed) {
        RngStream rng(seed);
        const MlpModel m = build_ca(2, 2, rng);
        if (!away_from_kinks(m.network, quad.images, opts)) continue;
        EXPECT_LT(worst_gradient_error(m.network, quad.images, opts, 0.0), kTolerance) << "seed " << seed;
        ++checked;
    }
    EXPECT_EQ(checked, 5);
}

TEST(GradientCheck, VariationalQuadNetworkPinnedNoise) {
    const Dataset quad = gen_quad_dataset();
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20 && checked < 5; ++seed) {
        RngStream rng(seed);
        const MlpModel m = build_va(2, 2, rng);
        Matrix eps(4, 1);
        for (std::size_t i = 0; i < 4; ++i) eps(i, 0) = rng.normal();
        if (!away_from_kinks(m.network, quad.images, training_with(eps))) continue;
        ++checked;
        for (double w : {1.0, 1e-3, 0.0})
            EXPECT_LT(worst_gradient_error(m.network, quad.images, training_with(eps), w), kTolerance)
                << "seed " << seed << " kl weight " << w;
    }
    EXPECT_EQ(checked, 5);
}

TEST(GradientCheck, WiderNetworkWithBiases) {
    // Non-zero biases and a wider hidden layer exercise every code path.
    RngStream rng(77);
    ArchitectureOptions arch;
    arch.hidden = 3;
    arch.bottleneck = 2;
    MlpModel m = build_va(3, 3, rng, arch);
    for (auto ref : parameter_refs(m.network))
        if (ref.name.find("biases") != std::string::npos)
            for (std::size_t j = 0; j < ref.value->cols(); ++j) (*ref.value)(0, j) = rng.uniform(-0.3, 0.3);
    Matrix x(5, 9), eps(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 9; ++j) x(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        for (std::size_t j = 0; j < 2; ++j) eps(i, j) = rng.normal();
    }
    ASSERT_TRUE(away_from_kinks(m.network, x, training_with(eps)));
    EXPECT_LT(worst_gradient_error(m.network, x, training_with(eps), 0.5), kTolerance);
}

TEST(GradientCheck, BackwardRequiresTrainingTrace) {
    RngStream rng(1);
    const MlpModel m = build_ca(2, 2, rng);
    const Dataset quad = gen_quad_dataset();
    EXPECT_THROW(backward(m.network, forward(m.network, quad.images), quad.images), std::logic_error);
}
