#include "socfno/losses.hpp"

#include <algorithm>
#include <cmath>

namespace socfno {

void SsimConfig::validate() const {
    if (window == 0 || window % 2 == 0) throw InvalidArgument("SsimConfig: window must be odd and positive");
    if (!(sigma > 0.0)) throw InvalidArgument("SsimConfig: sigma must be positive");
    if (!(dynamic_range > 0.0) || !(k1 > 0.0) || !(k2 > 0.0))
        throw InvalidArgument("SsimConfig: k1, k2 and dynamic range must be positive");
}

std::vector<double> gaussian_kernel_1d(std::size_t n, double sigma) {
    std::vector<double> k(n);
    const double centre = 0.5 * static_cast<double>(n - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(i) - centre;
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        total += k[i];
    }
    for (double& v : k) v /= total;
    return k;
}

std::vector<double> gaussian_window(std::size_t n, double sigma) {
    const auto k = gaussian_kernel_1d(n, sigma);
    std::vector<double> w(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) w[a * n + b] = k[a] * k[b];
    return w;
}

void LossConfig::validate() const {
    if (!use_mae && !use_dssim) throw InvalidArgument("LossConfig: at least one loss term must be enabled");
    if (use_mae && !(w > 0.0)) throw InvalidArgument("LossConfig: MAE weight must be positive");
}

LossConfig loss_config_for(const std::string& name) {
    if (name == "mae") return {1.0, true, false};
    if (name == "dssim") return {0.01, false, true};
    if (name == "mae+dssim") return {0.01, true, true};
    throw InvalidArgument("unknown loss '" + name + "' (expected mae|dssim|mae+dssim)");
}

std::string loss_name(const LossConfig& cfg) {
    if (cfg.use_mae && cfg.use_dssim) return "mae+dssim";
    return cfg.use_mae ? "mae" : "dssim";
}

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape())
        throw InvalidArgument(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                              shape_string(b.shape()));
    if (a.empty()) throw InvalidArgument(std::string(what) + ": empty tensor");
}

// Planes of a [C,H,W] or [H,W] tensor.
struct PlaneLayout {
    std::size_t planes, height, width;
};

PlaneLayout layout_of(const Tensor& x) {
    if (x.rank() == 2) return {1, x.dim(0), x.dim(1)};
    if (x.rank() == 3) return {x.dim(0), x.dim(1), x.dim(2)};
    throw InvalidArgument("ssim: expected [H,W] or [C,H,W] image, got " + shape_string(x.shape()));
}

// Valid-position Gaussian filtering and its adjoint, separable.
class WindowFilter {
public:
    WindowFilter(std::size_t height, std::size_t width, const SsimConfig& cfg)
        : h_(height), w_(width), n_(cfg.window), k_(gaussian_kernel_1d(cfg.window, cfg.sigma)) {
        ho_ = h_ - n_ + 1;
        wo_ = w_ - n_ + 1;
    }

    std::size_t out_height() const { return ho_; }
    std::size_t out_width() const { return wo_; }

    std::vector<double> apply(const double* in) const {
        std::vector<double> tmp(h_ * wo_, 0.0), out(ho_ * wo_, 0.0);
        for (std::size_t i = 0; i < h_; ++i)
            for (std::size_t j = 0; j < wo_; ++j) {
                double s = 0.0;
                for (std::size_t b = 0; b < n_; ++b) s += k_[b] * in[i * w_ + j + b];
                tmp[i * wo_ + j] = s;
            }
        for (std::size_t i = 0; i < ho_; ++i)
            for (std::size_t j = 0; j < wo_; ++j) {
                double s = 0.0;
                for (std::size_t a = 0; a < n_; ++a) s += k_[a] * tmp[(i + a) * wo_ + j];
                out[i * wo_ + j] = s;
            }
        return out;
    }

    std::vector<double> adjoint(const std::vector<double>& g) const {
        std::vector<double> tmp(h_ * wo_, 0.0), out(h_ * w_, 0.0);
        for (std::size_t i = 0; i < ho_; ++i)
            for (std::size_t a = 0; a < n_; ++a)
                for (std::size_t j = 0; j < wo_; ++j) tmp[(i + a) * wo_ + j] += k_[a] * g[i * wo_ + j];
        for (std::size_t i = 0; i < h_; ++i)
            for (std::size_t j = 0; j < wo_; ++j)
                for (std::size_t b = 0; b < n_; ++b) out[i * w_ + j + b] += k_[b] * tmp[i * wo_ + j];
        return out;
    }

private:
    std::size_t h_, w_, n_, ho_ = 0, wo_ = 0;
    std::vector<double> k_;
};

SsimGrads ssim_impl(const Tensor& x, const Tensor& y, const SsimConfig& cfg, bool want_grad) {
    check_same_shape(x, y, "ssim");
    cfg.validate();
    const PlaneLayout lay = layout_of(x);
    if (lay.height < cfg.window || lay.width < cfg.window)
        throw InvalidArgument("ssim: image " + std::to_string(lay.height) + "x" + std::to_string(lay.width) +
                              " is smaller than the " + std::to_string(cfg.window) + "x" +
                              std::to_string(cfg.window) + " window");
    const WindowFilter filter(lay.height, lay.width, cfg);
    const std::size_t plane = lay.height * lay.width;
    const std::size_t m = filter.out_height() * filter.out_width();
    const double c1 = cfg.c1(), c2 = cfg.c2();

    SsimGrads out;
    if (want_grad) {
        out.grad_x = Tensor(x.shape());
        out.grad_y = Tensor(x.shape());
    }
    double total = 0.0;
    std::vector<double> xx(plane), yy(plane), xy(plane);
    for (std::size_t p = 0; p < lay.planes; ++p) {
        const double* xp = x.data().data() + p * plane;
        const double* yp = y.data().data() + p * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            xx[i] = xp[i] * xp[i];
            yy[i] = yp[i] * yp[i];
            xy[i] = xp[i] * yp[i];
        }
        const auto mx = filter.apply(xp), my = filter.apply(yp);
        const auto exx = filter.apply(xx.data()), eyy = filter.apply(yy.data()), exy = filter.apply(xy.data());

        std::vector<double> ax, ay, bxx, byy, cxy;
        if (want_grad) {
            ax.resize(m);
            ay.resize(m);
            bxx.resize(m);
            byy.resize(m);
            cxy.resize(m);
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double sxx = exx[k] - mx[k] * mx[k];
            const double syy = eyy[k] - my[k] * my[k];
            const double sxy = exy[k] - mx[k] * my[k];
            const double n1 = 2.0 * mx[k] * my[k] + c1;
            const double n2 = 2.0 * sxy + c2;
            const double d1 = mx[k] * mx[k] + my[k] * my[k] + c1;
            const double d2 = sxx + syy + c2;
            const double s = (n1 * n2) / (d1 * d2);
            sum += s;
            if (!want_grad) continue;
            const double d_mx = 2.0 * my[k] * n2 / (d1 * d2) - s * 2.0 * mx[k] / d1;
            const double d_my = 2.0 * mx[k] * n2 / (d1 * d2) - s * 2.0 * my[k] / d1;
            const double d_var = -s / d2;  // same for both variances
            const double d_cov = 2.0 * n1 / (d1 * d2);
            ax[k] = d_mx - 2.0 * mx[k] * d_var - my[k] * d_cov;
            ay[k] = d_my - 2.0 * my[k] * d_var - mx[k] * d_cov;
            bxx[k] = d_var;
            byy[k] = d_var;
            cxy[k] = d_cov;
        }
        total += sum / static_cast<double>(m);
        if (!want_grad) continue;

        const double scale = 1.0 / (static_cast<double>(m) * static_cast<double>(lay.planes));
        const auto fax = filter.adjoint(ax), fay = filter.adjoint(ay);
        const auto fb = filter.adjoint(bxx), fc = filter.adjoint(cxy);
        double* gx = out.grad_x.data().data() + p * plane;
        double* gy = out.grad_y.data().data() + p * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            gx[i] = scale * (fax[i] + 2.0 * xp[i] * fb[i] + yp[i] * fc[i]);
            gy[i] = scale * (fay[i] + 2.0 * yp[i] * fb[i] + xp[i] * fc[i]);
        }
    }
    out.value = total / static_cast<double>(lay.planes);
    return out;
}

}  // namespace

double mae(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "mae");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
    return s / static_cast<double>(pred.size());
}

ScalarWithGrad mae_with_grad(const Tensor& pred, const Tensor& target) {
    ScalarWithGrad out{mae(pred, target), Tensor(pred.shape())};
    const double inv = 1.0 / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        out.grad[i] = d > 0.0 ? inv : d < 0.0 ? -inv : 0.0;
    }
    return out;
}

double ssim(const Tensor& x, const Tensor& y, const SsimConfig& cfg) { return ssim_impl(x, y, cfg, false).value; }

SsimGrads ssim_with_grad(const Tensor& x, const Tensor& y, const SsimConfig& cfg) {
    return ssim_impl(x, y, cfg, true);
}

double dssim(const Tensor& x, const Tensor& y, const SsimConfig& cfg) { return 0.5 * (1.0 - ssim(x, y, cfg)); }

CompositeLoss composite_loss(const Tensor& pred, const Tensor& target, const LossConfig& loss_cfg,
                             const SsimConfig& ssim_cfg) {
    loss_cfg.validate();
    check_same_shape(pred, target, "composite_loss");
    CompositeLoss out;
    out.grad = Tensor(pred.shape());
    if (loss_cfg.use_mae) {
        ScalarWithGrad m = mae_with_grad(pred, target);
        out.mae = m.value;
        out.value += loss_cfg.w * m.value;
        m.grad *= loss_cfg.w;
        out.grad += m.grad;
    } else {
        out.mae = mae(pred, target);
    }
    if (loss_cfg.use_dssim) {
        SsimGrads s = ssim_with_grad(pred, target, ssim_cfg);
        out.dssim = 0.5 * (1.0 - s.value);
        out.value += out.dssim;
        s.grad_x *= -0.5;
        out.grad += s.grad_x;
    }
    return out;
}

double rmse(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "rmse");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
    return std::sqrt(s / static_cast<double>(pred.size()));
}

double mape(const Tensor& pred, const Tensor& target, double tau) {
    check_same_shape(pred, target, "mape");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        s += std::abs(pred[i] - target[i]) / std::max(std::abs(target[i]), tau);
    return 100.0 * s / static_cast<double>(pred.size());
}

MetricSummary summarize(std::vector<double> values) {
    MetricSummary m;
    m.per_image = std::move(values);
    if (m.per_image.empty()) return m;
    double s = 0.0;
    for (double v : m.per_image) s += v;
    m.mean = s / static_cast<double>(m.per_image.size());
    double sq = 0.0;
    for (double v : m.per_image) sq += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(sq / static_cast<double>(m.per_image.size()));
    return m;
}

EvalReport evaluate(const std::vector<Tensor>& preds, const std::vector<Tensor>& targets, const SsimConfig& cfg) {
    if (preds.empty()) throw InvalidArgument("evaluate: no images");
    if (preds.size() != targets.size())
        throw InvalidArgument("evaluate: " + std::to_string(preds.size()) + " predictions for " +
                              std::to_string(targets.size()) + " targets");
    std::vector<double> r, p, s;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        r.push_back(rmse(preds[i], targets[i]));
        p.push_back(mape(preds[i], targets[i]));
        s.push_back(ssim(preds[i], targets[i], cfg));
    }
    return {summarize(std::move(r)), summarize(std::move(p)), summarize(std::move(s))};
}

nlohmann::json to_json(const MetricSummary& m) {
    return {{"mean", m.mean}, {"std", m.std}, {"per_image", m.per_image}};
}

nlohmann::json to_json(const EvalReport& r) {
    return {{"rmse", to_json(r.rmse)}, {"mape", to_json(r.mape)}, {"ssim", to_json(r.ssim)}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    auto metric = [&](const char* key) {
        MetricSummary m;
        const auto& e = j.at(key);
        m.mean = e.at("mean").get<double>();
        m.std = e.at("std").get<double>();
        m.per_image = e.value("per_image", std::vector<double>{});
        return m;
    };
    return {metric("rmse"), metric("mape"), metric("ssim")};
}

}  // namespace socfno
