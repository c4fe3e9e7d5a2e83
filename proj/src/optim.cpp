#include "aelab/optim.hpp"

#include "aelab/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aelab {

std::string_view to_string(OptimizerKind kind) {
    return kind == OptimizerKind::adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

namespace {

void check_pairing(std::span<const ParamRef> params, std::span<const Matrix* const> grads) {
    if (params.size() != grads.size()) {
        throw std::logic_error("optimizer: " + std::to_string(params.size()) + " parameters but " +
                               std::to_string(grads.size()) + " gradients");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        require_same_shape(*params[i].value, *grads[i], params[i].name.c_str());
        if (!grads[i]->all_finite()) throw NumericError("non-finite gradient in " + params[i].name);
    }
}

void ensure_state(std::vector<Matrix>& state, std::span<const ParamRef> params) {
    if (state.size() == params.size()) return;
    state.clear();
    for (const auto& p : params) state.emplace_back(p.value->rows(), p.value->cols());
}

}  // namespace

void sgd_step(std::span<const ParamRef> params, std::span<const Matrix* const> grads,
              std::vector<Matrix>& velocity, double learning_rate, double momentum) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("sgd_step: learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("sgd_step: momentum must be in [0, 1)");
    check_pairing(params, grads);
    ensure_state(velocity, params);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].value->data();
        auto g = grads[i]->data();
        auto v = velocity[i].data();
        for (std::size_t k = 0; k < p.size(); ++k) {
            v[k] = momentum * v[k] + g[k];
            p[k] -= learning_rate * v[k];
        }
    }
}

SgdMomentum::SgdMomentum(double learning_rate, double momentum)
    : learning_rate_(learning_rate), momentum_(momentum) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("SgdMomentum: learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("SgdMomentum: momentum must be in [0, 1)");
}

void SgdMomentum::step(Network& net, const Gradients& grads) {
    const auto params = parameter_refs(net);
    const auto g = grads.refs();
    sgd_step(params, g, velocity_, learning_rate_, momentum_);
}

Adam::Adam(double learning_rate, double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("Adam: learning rate must be positive");
}

void Adam::step(Network& net, const Gradients& grads) {
    const auto params = parameter_refs(net);
    const auto g = grads.refs();
    check_pairing(params, g);
    ensure_state(first_, params);
    ensure_state(second_, params);
    ++steps_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].value->data();
        auto gr = g[i]->data();
        auto m = first_[i].data();
        auto v = second_[i].data();
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = beta1_ * m[k] + (1.0 - beta1_) * gr[k];
            v[k] = beta2_ * v[k] + (1.0 - beta2_) * gr[k] * gr[k];
            p[k] -= learning_rate_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + epsilon_);
        }
    }
}

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double learning_rate, double momentum) {
    if (kind == OptimizerKind::adam) return std::make_unique<Adam>(learning_rate);
    return std::make_unique<SgdMomentum>(learning_rate, momentum);
}

}  // namespace aelab
