#include "aelab/errors.hpp"
#include "aelab/models.hpp"
#include "aelab/nn.hpp"
#include "aelab/optim.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace aelab;

TEST(Activation, Relu) {
    EXPECT_EQ(relu(-3.0), 0.0);
    EXPECT_EQ(relu(0.0), 0.0);
    EXPECT_EQ(relu(2.5), 2.5);
}

TEST(Activation, HeavisideIsOneAtZero) {
    EXPECT_EQ(heaviside(0.0), 1.0);
    EXPECT_EQ(heaviside(-1e-300), 0.0);
    EXPECT_EQ(heaviside(1e-300), 1.0);
}

TEST(Activation, SigmoidProperties) {
    EXPECT_EQ(sigmoid(0.0), 0.5);
    for (double x = -30.0; x <= 30.0; x += 0.25) {
        const double s = sigmoid(x);
        EXPECT_GT(s, 0.0);
        EXPECT_LT(s, 1.0);
        EXPECT_NEAR(s + sigmoid(-x), 1.0, 1e-15);
        EXPECT_NEAR(s, 1.0 / (1.0 + std::exp(-x)), 1e-15);
    }
    // Saturates without overflow.
    EXPECT_EQ(sigmoid(-1000.0), 0.0);
    EXPECT_EQ(sigmoid(1000.0), 1.0);
}

TEST(Activation, NamesRoundTrip) {
    for (Activation a : {Activation::none, Activation::relu, Activation::sigmoid, Activation::heaviside})
        EXPECT_EQ(parse_activation(to_string(a)), a);
    EXPECT_THROW(parse_activation("tanh"), std::invalid_argument);
}

TEST(DenseLayer, ForwardIsAffineThenActivation) {
    const DenseLayer layer(Matrix{{1, -1}, {2, 0.5}}, Matrix{{0.5, -3}}, Activation::relu);
    const Matrix x{{1, 1}, {0, 2}};
    // pre: [3.5, -3.5], [4.5, -2]
    EXPECT_EQ(layer.pre_activation(x), (Matrix{{3.5, -3.5}, {4.5, -2}}));
    EXPECT_EQ(layer.forward(x), (Matrix{{3.5, 0}, {4.5, 0}}));
    EXPECT_THROW(DenseLayer(Matrix(2, 2), Matrix(1, 3), Activation::none), ShapeError);
}

TEST(Forward, HeavisideRejectedInTraining) {
    RngStream rng(1);
    MlpModel m = build_ca(2, 2, rng);
    const Network h = with_heaviside_output(m.network);
    ForwardOptions opts;
    opts.mode = Mode::training;
    EXPECT_THROW(forward(h, Matrix(1, 4), opts), std::logic_error);
    EXPECT_NO_THROW(forward(h, Matrix(1, 4)));
}

TEST(Forward, TraceShapes) {
    RngStream rng(2);
    const MlpModel m = build_va(2, 2, rng);
    const Matrix x{{0, 0, 1, 1}, {1, 0, 1, 0}, {1, 1, 0, 0}};
    RngStream noise(3);
    ForwardOptions opts;
    opts.mode = Mode::training;
    opts.noise = std::ref(noise);
    const ForwardTrace t = forward(m.network, x, opts);
    ASSERT_TRUE(t.head.has_value());
    EXPECT_EQ(t.head->z.rows(), 3u);
    EXPECT_EQ(t.head->z.cols(), 1u);
    EXPECT_EQ(t.output().rows(), 3u);
    EXPECT_EQ(t.output().cols(), 4u);
    // z = a + exp(b/2) * eps
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_DOUBLE_EQ(t.head->z(i, 0),
                         t.head->mean(i, 0) + std::exp(t.head->logvar(i, 0) / 2) * t.head->eps(i, 0));
}

TEST(Forward, UseMeanIsDeterministic) {
    RngStream rng(4);
    const MlpModel m = build_va(2, 2, rng);
    const Matrix x{{0, 0, 1, 1}};
    const ForwardTrace t = forward(m.network, x);
    EXPECT_EQ(t.head->z, t.head->mean);
    EXPECT_EQ(forward(m.network, x).output(), t.output());
}

TEST(Forward, SampledBottleneckFollowsMeanAndVariance) {
    // A head with a = 0.7, b = ln(0.25) for every input.
    Network net;
    net.encoder.push_back(DenseLayer(Matrix(1, 1, 0.0), Matrix{{1.0}}, Activation::relu));
    net.head = VariationalHead{DenseLayer(Matrix{{0.7}}, Matrix{{0.0}}, Activation::none),
                               DenseLayer(Matrix{{std::log(0.25)}}, Matrix{{0.0}}, Activation::none)};
    net.decoder.push_back(DenseLayer(Matrix{{1.0}}, Matrix{{0.0}}, Activation::none));
    const std::size_t n = 100000;
    RngStream rng(9);
    ForwardOptions opts;
    opts.mode = Mode::training;
    opts.noise = std::ref(rng);
    const ForwardTrace t = forward(net, Matrix(n, 1, 0.0), opts);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += t.head->z(i, 0);
        s2 += t.head->z(i, 0) * t.head->z(i, 0);
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    EXPECT_NEAR(mean, 0.7, 5 * 0.5 / std::sqrt(double(n)));
    EXPECT_NEAR(var, 0.25, 0.005);
}

TEST(Loss, MseIsMeanOverAllEntries) {
    EXPECT_DOUBLE_EQ(mse_loss(Matrix{{1, 0}, {0, 0}}, Matrix{{0, 0}, {0, 2}}), (1.0 + 4.0) / 4.0);
    EXPECT_THROW(mse_loss(Matrix(1, 2), Matrix(2, 1)), ShapeError);
}

TEST(Loss, KlZeroAtStandardNormal) {
    EXPECT_EQ(kl_term(Matrix{{0.0}}, Matrix{{0.0}}), 0.0);
    EXPECT_EQ(kl_term(Matrix(5, 1, 0.0), Matrix(5, 1, 0.0)), 0.0);
}

TEST(Loss, KlNonNegativeOnGrid) {
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
            const double a = -5.0 + 0.1 * i, b = -5.0 + 0.1 * j;
            EXPECT_GE(kl_term(Matrix{{a}}, Matrix{{b}}), 0.0) << a << ", " << b;
        }
}

TEST(Loss, KlMatchesClosedFormDivergence) {
    // KL(N(a, s^2) || N(0, 1)) = ln(1/s) + (s^2 + a^2)/2 - 1/2, averaged over rows.
    const Matrix a{{0.3}, {-1.2}};
    const Matrix b{{-0.4}, {0.9}};
    double expected = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const double s = std::exp(b(i, 0) / 2);
        expected += -std::log(s) + (s * s + a(i, 0) * a(i, 0)) / 2 - 0.5;
    }
    EXPECT_NEAR(kl_term(a, b), expected / 2, 1e-15);
}

TEST(Loss, VariationalLossDecomposes) {
    RngStream rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix out(3, 4), target(3, 4), a(3, 1), b(3, 1);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                out(i, j) = rng.uniform();
                target(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
            }
            a(i, 0) = rng.uniform(-3, 3);
            b(i, 0) = rng.uniform(-3, 3);
        }
        EXPECT_NEAR(variational_loss(out, target, a, b), mse_loss(out, target) + kl_term(a, b), 1e-12);
    }
}

TEST(Init, GlorotRespectsLimitAndSpread) {
    RngStream rng(8);
    const Matrix w = init_weights(100, 50, InitScheme::glorot(), rng);
    const double limit = std::sqrt(6.0 / 150.0);
    double s2 = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (std::size_t j = 0; j < w.cols(); ++j) {
            ASSERT_LE(std::abs(w(i, j)), limit);
            s2 += w(i, j) * w(i, j);
        }
    EXPECT_NEAR(s2 / w.size(), limit * limit / 3.0, 0.05 * limit * limit / 3.0);
    const DenseLayer l = make_layer(3, 2, Activation::relu, InitScheme::glorot(), rng);
    EXPECT_EQ(l.biases, Matrix(1, 2, 0.0));
}

TEST(Optim, SgdMomentumMatchesHandComputation) {
    Matrix p{{1.0, -2.0}};
    const Matrix g{{0.5, 1.0}};
    std::vector<ParamRef> refs{{"p", &p}};
    std::vector<const Matrix*> grads{&g};
    std::vector<Matrix> velocity;
    sgd_step(refs, grads, velocity, 0.1, 0.9);
    // v = g; p -= 0.1 g
    EXPECT_NEAR(p(0, 0), 0.95, 1e-15);
    EXPECT_NEAR(p(0, 1), -2.1, 1e-15);
    sgd_step(refs, grads, velocity, 0.1, 0.9);
    // v = 0.9 g + g = 1.9 g
    EXPECT_NEAR(p(0, 0), 0.95 - 0.1 * 0.95, 1e-15);
    EXPECT_NEAR(p(0, 1), -2.1 - 0.19, 1e-15);
}

TEST(Optim, NonFiniteGradientNamesParameter) {
    Matrix p{{1.0}};
    const Matrix g{{std::nan("")}};
    std::vector<ParamRef> refs{{"decoder[1].weights", &p}};
    std::vector<const Matrix*> grads{&g};
    std::vector<Matrix> velocity;
    try {
        sgd_step(refs, grads, velocity, 0.1, 0.9);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("decoder[1].weights"), std::string::npos);
    }
}

TEST(Optim, InvalidHyperparametersRejected) {
    EXPECT_THROW(SgdMomentum(0.0, 0.9), std::invalid_argument);
    EXPECT_THROW(SgdMomentum(0.1, 1.0), std::invalid_argument);
    EXPECT_EQ(parse_optimizer("adam"), OptimizerKind::adam);
    EXPECT_THROW(parse_optimizer("rmsprop"), std::invalid_argument);
}

TEST(Optim, AdamFirstStepHasLearningRateMagnitude) {
    // Bias correction makes the first step lr * sign(g).
    RngStream rng(1);
    MlpModel m = build_ca(2, 2, rng);
    const MlpModel before = m;
    Gradients g;
    for (const auto& l : m.network.encoder) g.encoder.push_back({Matrix(l.weights.rows(), l.weights.cols(), 3.0),
                                                                 Matrix(1, l.biases.cols(), -0.2)});
    for (const auto& l : m.network.decoder) g.decoder.push_back({Matrix(l.weights.rows(), l.weights.cols(), 3.0),
                                                                 Matrix(1, l.biases.cols(), -0.2)});
    Adam adam(0.01);
    adam.step(m.network, g);
    EXPECT_NEAR(m.network.encoder[0].weights(0, 0), before.network.encoder[0].weights(0, 0) - 0.01, 1e-9);
    EXPECT_NEAR(m.network.decoder[1].biases(0, 0), before.network.decoder[1].biases(0, 0) + 0.01, 1e-9);
}
