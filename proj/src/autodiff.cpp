#include "socfno/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace socfno {

GradCheckResult grad_check_detailed(const DifferentiableOp& op, std::vector<Tensor> inputs, double eps,
                                    std::uint64_t seed) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw InvalidArgument("grad_check: eps must lie in [1e-7, 1e-3]");

    auto checked_forward = [&](std::span<const Tensor> in) {
        Tensor y = op.forward(in);
        if (!y.all_finite()) throw NumericalFailure("grad_check: non-finite output from op '" + op.name + "'");
        return y;
    };

    const Tensor y = checked_forward(inputs);
    std::mt19937_64 rng(seed);
    const Tensor probe = Tensor::uniform(y.shape(), -1.0, 1.0, rng);

    const std::vector<Tensor> analytic = op.backward(inputs, probe);
    if (analytic.size() != inputs.size())
        throw InvalidArgument("grad_check: op '" + op.name + "' returned " + std::to_string(analytic.size()) +
                              " gradients for " + std::to_string(inputs.size()) + " inputs");

    GradCheckResult result;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (analytic[k].shape() != inputs[k].shape())
            throw InvalidArgument("grad_check: gradient shape mismatch for input " + std::to_string(k) + " of '" +
                                  op.name + "'");
        if (!analytic[k].all_finite())
            throw NumericalFailure("grad_check: non-finite analytic gradient from op '" + op.name + "'");
        double max_diff = 0.0, max_a = 0.0, max_n = 0.0;
        for (std::size_t i = 0; i < inputs[k].size(); ++i) {
            const double saved = inputs[k][i];
            inputs[k][i] = saved + eps;
            const double plus = dot(probe, checked_forward(inputs));
            inputs[k][i] = saved - eps;
            const double minus = dot(probe, checked_forward(inputs));
            inputs[k][i] = saved;
            const double numeric = (plus - minus) / (2.0 * eps);
            max_diff = std::max(max_diff, std::abs(analytic[k][i] - numeric));
            max_a = std::max(max_a, std::abs(analytic[k][i]));
            max_n = std::max(max_n, std::abs(numeric));
        }
        const double err = max_diff / std::max({max_a, max_n, 1e-12});
        result.per_input.push_back({k, err, max_a});
        result.max_relative_error = std::max(result.max_relative_error, err);
    }
    return result;
}

double grad_check(const DifferentiableOp& op, std::vector<Tensor> inputs, double eps, std::uint64_t seed) {
    return grad_check_detailed(op, std::move(inputs), eps, seed).max_relative_error;
}

}  // namespace socfno
