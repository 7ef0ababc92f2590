#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "socfno/optim.hpp"

using namespace socfno;

namespace {

void step1(Adamax& opt, Tensor& theta, const Tensor& g, double lr) {
    const ParameterRef refs[] = {{"theta", &theta}};
    const Tensor grads[] = {g};
    opt.step(refs, grads, lr);
}

}  // namespace

TEST_CASE("zero gradient leaves parameters unchanged") {
    Adamax opt;
    Tensor theta({3}, std::vector<double>{1, 2, 3});
    step1(opt, theta, Tensor({3}), 0.1);
    CHECK(theta == Tensor({3}, std::vector<double>{1, 2, 3}));
}

TEST_CASE("first step by hand") {
    Adamax opt;
    Tensor theta({1}, 0.0);
    step1(opt, theta, Tensor({1}, 1.0), 0.1);
    CHECK(opt.state().m[0][0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(opt.state().u[0][0] == 1.0);
    CHECK(std::abs(theta[0] - (-0.1 / (1.0 + 1e-8))) < 1e-15);
}

TEST_CASE("trace matches a scalar reference") {
    std::mt19937_64 rng(1);
    Adamax opt;
    Tensor theta = Tensor::normal({5}, 1.0, rng);
    std::vector<oracle::ScalarAdamax> refs(5);
    std::vector<double> ref_theta(theta.values());
    for (int t = 0; t < 50; ++t) {
        const Tensor g = Tensor::normal({5}, t < 2 ? 1.0 : 0.3, rng);
        const double lr = 0.01 * (1.0 - t / 100.0);
        step1(opt, theta, g, lr);
        for (std::size_t i = 0; i < 5; ++i) ref_theta[i] = refs[i].step(ref_theta[i], g[i], lr);
        for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(theta[i] - ref_theta[i]) <= 1e-12);
    }
    CHECK(opt.state().step == 50);
}

TEST_CASE("two identical steps reproduce the scalar trace") {
    Adamax opt;
    Tensor theta({1}, 0.5);
    oracle::ScalarAdamax ref;
    double r = 0.5;
    for (int t = 0; t < 2; ++t) {
        step1(opt, theta, Tensor({1}, 0.7), 0.01);
        r = ref.step(r, 0.7, 0.01);
    }
    CHECK(std::abs(theta[0] - r) <= 1e-12);
}

TEST_CASE("non-finite gradient names the parameter") {
    Adamax opt;
    Tensor theta({2});
    try {
        step1(opt, theta, Tensor({2}, std::numeric_limits<double>::quiet_NaN()), 0.1);
        FAIL("expected NumericalFailure");
    } catch (const NumericalFailure& e) {
        CHECK(std::string(e.what()).find("theta") != std::string::npos);
    }
}

TEST_CASE("cosine schedule endpoints and midpoint") {
    const CosineSchedule s{1e-2, 1e-4, 401};
    CHECK(cosine_lr(0, s) == 1e-2);
    CHECK(cosine_lr(400, s) == 1e-4);
    CHECK(std::abs(cosine_lr(200, s) - (1e-2 + 1e-4) / 2.0) < 1e-15);
    const CosineSchedule d;
    CHECK(cosine_lr(0, d) == 1e-2);
    CHECK(cosine_lr(d.total_epochs - 1, d) == 1e-4);
    for (std::size_t e = 1; e < d.total_epochs; ++e) CHECK(cosine_lr(e, d) <= cosine_lr(e - 1, d));
    CHECK_THROWS_AS(cosine_lr(d.total_epochs, d), InvalidArgument);
    CHECK(cosine_lr(0, CosineSchedule{1e-2, 1e-4, 1}) == 1e-2);
}
