#pragma once

#include "aelab/nn.hpp"

#include <memory>
#include <string_view>
#include <vector>

namespace aelab {

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

/// Classic momentum: v <- momentum * v + g; p <- p - lr * v.
///
/// Operates on the parameter/gradient lists directly so it can be used with
/// anything that exposes matrices. Throws NumericError naming the offending
/// parameter if a gradient is non-finite; no parameter is touched in that case.
void sgd_step(std::span<const ParamRef> params, std::span<const Matrix* const> grads,
              std::vector<Matrix>& velocity, double learning_rate, double momentum);

class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual void step(Network& net, const Gradients& grads) = 0;
};

class SgdMomentum final : public Optimizer {
public:
    SgdMomentum(double learning_rate, double momentum);
    void step(Network& net, const Gradients& grads) override;

private:
    double learning_rate_;
    double momentum_;
    std::vector<Matrix> velocity_;
};

/// Adam with bias correction (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
class Adam final : public Optimizer {
public:
    explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);
    void step(Network& net, const Gradients& grads) override;

private:
    double learning_rate_;
    double beta1_;
    double beta2_;
    double epsilon_;
    long steps_ = 0;
    std::vector<Matrix> first_;
    std::vector<Matrix> second_;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double learning_rate, double momentum);

}  // namespace aelab
