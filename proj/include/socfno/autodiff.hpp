#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "socfno/tensor.hpp"

namespace socfno {

/// Reverse-mode contract for a fixed operation. Parameters are passed as
/// ordinary inputs, so backward returns one gradient per input.
struct DifferentiableOp {
    std::string name;
    std::function<Tensor(std::span<const Tensor>)> forward;
    std::function<std::vector<Tensor>(std::span<const Tensor> inputs, const Tensor& upstream)> backward;
};

/// Per-input outcome of a finite-difference check.
struct GradCheckEntry {
    std::size_t input = 0;
    double relative_error = 0.0;
    double max_analytic = 0.0;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::vector<GradCheckEntry> per_input;
};

/// Compare op.backward against central differences of the scalar probe
/// <g, forward(inputs)> for a fixed random g. For each input tensor the error
/// is max|analytic - numeric| / max(max|analytic|, max|numeric|, 1e-12); the
/// result is the maximum over inputs.
GradCheckResult grad_check_detailed(const DifferentiableOp& op, std::vector<Tensor> inputs, double eps,
                                    std::uint64_t seed = 1234);

double grad_check(const DifferentiableOp& op, std::vector<Tensor> inputs, double eps, std::uint64_t seed = 1234);

}  // namespace socfno
