#include "socfno/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace socfno {

void Adamax::step(std::span<const ParameterRef> params, std::span<const Tensor> grads, double lr) {
    if (params.size() != grads.size())
        throw InvalidArgument("adamax: " + std::to_string(params.size()) + " parameters but " +
                              std::to_string(grads.size()) + " gradients");
    if (state_.m.empty()) {
        for (const auto& p : params) {
            state_.m.emplace_back(p.value->shape());
            state_.u.emplace_back(p.value->shape());
        }
    }
    if (state_.m.size() != params.size()) throw InvalidArgument("adamax: parameter list changed between steps");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].shape() != params[i].value->shape() || state_.m[i].shape() != grads[i].shape())
            throw InvalidArgument("adamax: gradient shape mismatch for '" + params[i].name + "'");
        if (!grads[i].all_finite())
            throw NumericalFailure("adamax: non-finite gradient for parameter '" + params[i].name + "'");
    }

    ++state_.step;
    const double correction = 1.0 - std::pow(cfg_.beta1, static_cast<double>(state_.step));
    const double rate = lr / correction;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& theta = params[i].value->values();
        auto& m = state_.m[i].values();
        auto& u = state_.u[i].values();
        const auto& g = grads[i].values();
        for (std::size_t k = 0; k < theta.size(); ++k) {
            m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
            u[k] = std::max(cfg_.beta2 * u[k], std::abs(g[k]));
            theta[k] -= rate * m[k] / (u[k] + cfg_.eps);
        }
    }
}

double cosine_lr(std::size_t epoch, const CosineSchedule& schedule) {
    if (schedule.total_epochs == 0) throw InvalidArgument("cosine_lr: total_epochs must be positive");
    if (epoch >= schedule.total_epochs)
        throw InvalidArgument("cosine_lr: epoch " + std::to_string(epoch) + " outside [0, " +
                              std::to_string(schedule.total_epochs) + ")");
    if (schedule.total_epochs == 1) return schedule.lr_max;
    const double phase =
        std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(schedule.total_epochs - 1);
    const double c = 0.5 * (1.0 + std::cos(phase));
    // Convex blend, so both endpoints come out exactly.
    return schedule.lr_max * c + schedule.lr_min * (1.0 - c);
}

}  // namespace socfno
