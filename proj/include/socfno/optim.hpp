#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "socfno/tensor.hpp"

namespace socfno {

struct AdamaxConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Per-parameter first moment m and infinity-norm accumulator u.
struct AdamaxState {
    std::vector<Tensor> m;
    std::vector<Tensor> u;
    std::uint64_t step = 0;
};

class Adamax {
public:
    explicit Adamax(AdamaxConfig cfg = {}) : cfg_(cfg) {}

    /// One update of every parameter. State is created lazily on the first
    /// call and must see the same parameter list afterwards.
    void step(std::span<const ParameterRef> params, std::span<const Tensor> grads, double lr);

    const AdamaxState& state() const noexcept { return state_; }
    const AdamaxConfig& config() const noexcept { return cfg_; }

private:
    AdamaxConfig cfg_;
    AdamaxState state_;
};

struct CosineSchedule {
    double lr_max = 1e-2;
    double lr_min = 1e-4;
    std::size_t total_epochs = 400;
};

/// Single-cycle cosine annealing from lr_max at epoch 0 to lr_min at the last epoch.
double cosine_lr(std::size_t epoch, const CosineSchedule& schedule);

}  // namespace socfno
