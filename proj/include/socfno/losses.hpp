#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "socfno/tensor.hpp"

namespace socfno {

inline constexpr std::size_t kSsimWindow = 11;

struct SsimConfig {
    std::size_t window = kSsimWindow;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;  // L

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
    void validate() const;
};

/// Normalized 1D Gaussian sampled at integer offsets -(n-1)/2 .. (n-1)/2.
std::vector<double> gaussian_kernel_1d(std::size_t n, double sigma);
/// Outer product of the 1D kernel, row-major [n*n].
std::vector<double> gaussian_window(std::size_t n, double sigma);

struct LossConfig {
    double w = 0.01;
    bool use_mae = true;
    bool use_dssim = true;

    void validate() const;
};

/// "mae" (w = 1, DSSIM off), "dssim" or "mae+dssim" (w = 0.01).
LossConfig loss_config_for(const std::string& name);
std::string loss_name(const LossConfig& cfg);

struct ScalarWithGrad {
    double value = 0.0;
    Tensor grad;  // d value / d pred
};

double mae(const Tensor& pred, const Tensor& target);
ScalarWithGrad mae_with_grad(const Tensor& pred, const Tensor& target);

/// Mean SSIM over valid window positions, averaged over channels.
double ssim(const Tensor& x, const Tensor& y, const SsimConfig& cfg);

struct SsimGrads {
    double value = 0.0;
    Tensor grad_x;
    Tensor grad_y;
};

SsimGrads ssim_with_grad(const Tensor& x, const Tensor& y, const SsimConfig& cfg);

double dssim(const Tensor& x, const Tensor& y, const SsimConfig& cfg);

struct CompositeLoss {
    double value = 0.0;
    double mae = 0.0;
    double dssim = 0.0;  // zero when disabled
    Tensor grad;         // d value / d pred
};

/// w * MAE + 0.5 (1 - SSIM) with either term switchable.
CompositeLoss composite_loss(const Tensor& pred, const Tensor& target, const LossConfig& loss_cfg,
                             const SsimConfig& ssim_cfg);

// Evaluation metrics.

double rmse(const Tensor& pred, const Tensor& target);
inline constexpr double kMapeFloor = 1e-6;
double mape(const Tensor& pred, const Tensor& target, double tau = kMapeFloor);

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // population std across images
    std::vector<double> per_image;
};

MetricSummary summarize(std::vector<double> values);

struct EvalReport {
    MetricSummary rmse;
    MetricSummary mape;
    MetricSummary ssim;
};

EvalReport evaluate(const std::vector<Tensor>& preds, const std::vector<Tensor>& targets, const SsimConfig& cfg);

nlohmann::json to_json(const MetricSummary& m);
nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

}  // namespace socfno
