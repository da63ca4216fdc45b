#include "wgspec/fit.hpp"

#include "wgspec/io.hpp"

#include <doctest.h>

#include <cmath>

using namespace wgspec;

namespace {

// y = a * exp(-k x) + c on a fixed grid
const ModelFn kExpModel = [](double x, std::span<const double> p) {
    return p[0] * std::exp(-p[1] * x) + p[2];
};

Spectrum exp_spectrum(double a, double k, double c, double noise = 0.0,
                      std::uint64_t seed = 1) {
    Spectrum s;
    GaussianSampler gauss(seed);
    for (int i = 0; i < 64; ++i) {
        const double x = 0.1 * i;
        s.x.push_back(x);
        s.y.push_back(a * std::exp(-k * x) + c + (noise > 0.0 ? noise * gauss() : 0.0));
    }
    if (noise > 0.0) s.sigma.assign(s.x.size(), noise);
    return s;
}

std::vector<ParamSpec> exp_params(double a0, double k0, double c0) {
    return {{"a", a0, 0.0, 100.0, false},
            {"k", k0, 0.0, 50.0, false},
            {"c", c0, -10.0, 10.0, false}};
}

}  // namespace

TEST_CASE("noiseless round trip recovers parameters") {
    const auto s = exp_spectrum(3.0, 1.7, 0.25);
    const auto fit = fit_curve(s, exp_params(1.0, 1.0, 0.0), kExpModel);
    REQUIRE(fit.converged);
    CHECK(fit.value("a") == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(fit.value("k") == doctest::Approx(1.7).epsilon(1e-7));
    CHECK(fit.value("c") == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(fit.chi_squared < 1e-16);
}

TEST_CASE("accepted steps never increase chi squared") {
    const auto s = exp_spectrum(3.0, 1.7, 0.25, 0.02);
    const auto fit = fit_curve(s, exp_params(0.5, 0.3, -1.0), kExpModel);
    REQUIRE(fit.chi2_history.size() > 1);
    for (std::size_t i = 1; i < fit.chi2_history.size(); ++i)
        CHECK(fit.chi2_history[i] <= fit.chi2_history[i - 1]);
}

TEST_CASE("frozen parameters pass through bit for bit") {
    const auto s = exp_spectrum(3.0, 1.7, 0.25, 0.01);
    auto params = exp_params(1.0, 1.0, 0.1234567890123456);
    params[2].frozen = true;
    const auto fit = fit_curve(s, params, kExpModel);
    CHECK(fit.value("c") == 0.1234567890123456);  // exact
    CHECK(fit.covariance(2, 2) == 0.0);
    CHECK(fit.uncertainty("c") == 0.0);
}

TEST_CASE("freezing via config behaves identically") {
    const auto s = exp_spectrum(3.0, 1.7, 0.25, 0.01);
    FitConfig cfg;
    cfg.frozen.insert("c");
    cfg.initial["c"] = 0.25;
    const auto fit = fit_curve(s, exp_params(1.0, 1.0, 0.0), kExpModel, cfg);
    CHECK(fit.value("c") == 0.25);
    CHECK(fit.value("a") == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("degenerate parameters are reported by name") {
    const auto s = exp_spectrum(3.0, 1.7, 0.0);
    // p0 and p2 enter only through their sum
    const ModelFn degenerate = [](double x, std::span<const double> p) {
        return (p[0] + p[2]) * std::exp(-p[1] * x);
    };
    try {
        fit_curve(s, exp_params(1.0, 1.0, 0.5), degenerate);
        FAIL("expected a singular-Jacobian error");
    } catch (const std::runtime_error& ex) {
        const std::string message = ex.what();
        CHECK(message.find("'a'") != std::string::npos);
        CHECK(message.find("'c'") != std::string::npos);
        CHECK(message.find("degenerate") != std::string::npos);
    }
}

TEST_CASE("a parameter with no effect is reported") {
    const auto s = exp_spectrum(3.0, 1.7, 0.0);
    const ModelFn inert = [](double x, std::span<const double> p) {
        return p[0] * std::exp(-p[1] * x);
    };
    CHECK_THROWS_WITH_AS(fit_curve(s, exp_params(1.0, 1.0, 0.5), inert),
                         doctest::Contains("'c' has no effect"), std::runtime_error);
}

TEST_CASE("bounds are honored") {
    const auto s = exp_spectrum(3.0, 1.7, 0.25);
    auto params = exp_params(1.0, 1.0, 0.0);
    params[0].upper = 2.0;  // below the true amplitude
    const auto fit = fit_curve(s, params, kExpModel);
    CHECK(fit.value("a") <= 2.0 + 1e-12);
}

TEST_CASE("mask windows exclude points from the objective") {
    auto s = exp_spectrum(3.0, 1.7, 0.25);
    // corrupt a block of points, then mask it out
    for (std::size_t i = 20; i <= 25; ++i) s.y[i] += 5.0;
    FitConfig cfg;
    cfg.mask_windows.push_back({s.x[20], s.x[25]});
    const auto fit = fit_curve(s, exp_params(1.0, 1.0, 0.0), kExpModel, cfg);
    REQUIRE(fit.converged);
    CHECK(fit.value("a") == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(fit.value("k") == doctest::Approx(1.7).epsilon(1e-6));
    // residuals still cover every point, including the corrupted ones
    CHECK(fit.residuals.size() == s.size());
    CHECK(std::abs(fit.residuals[22]) > 1.0);
}

TEST_CASE("non-convergence is flagged, not thrown") {
    const auto s = exp_spectrum(3.0, 1.7, 0.25, 0.05);
    FitConfig cfg;
    cfg.max_iterations = 1;
    const auto fit = fit_curve(s, exp_params(0.1, 5.0, -2.0), kExpModel, cfg);
    CHECK_FALSE(fit.converged);
    CHECK(fit.iterations <= 1);
}

TEST_CASE("covariance tracks Monte-Carlo scatter") {
    // 200 noisy replicas: the reported 1-sigma must match the empirical
    // scatter within a factor 1.5 for each parameter
    const double noise = 0.02;
    std::vector<double> values_a, values_k, sigmas_a, sigmas_k;
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        const auto s = exp_spectrum(3.0, 1.7, 0.25, noise, trial + 10);
        const auto fit = fit_curve(s, exp_params(2.0, 1.0, 0.0), kExpModel);
        if (!fit.converged) continue;
        values_a.push_back(fit.value("a"));
        values_k.push_back(fit.value("k"));
        sigmas_a.push_back(fit.uncertainty("a"));
        sigmas_k.push_back(fit.uncertainty("k"));
    }
    REQUIRE(values_a.size() > 150);
    auto stddev = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::sqrt(ss / static_cast<double>(v.size() - 1));
    };
    auto mean = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        return m / static_cast<double>(v.size());
    };
    CHECK(mean(sigmas_a) / stddev(values_a) > 1.0 / 1.5);
    CHECK(mean(sigmas_a) / stddev(values_a) < 1.5);
    CHECK(mean(sigmas_k) / stddev(values_k) > 1.0 / 1.5);
    CHECK(mean(sigmas_k) / stddev(values_k) < 1.5);
}

TEST_CASE("unit-weight covariance is scaled by the residual variance") {
    // same data with and without sigma columns must give comparable sigmas
    const auto with_sigma = exp_spectrum(3.0, 1.7, 0.25, 0.02, 42);
    auto without_sigma = with_sigma;
    without_sigma.sigma.clear();
    const auto fit1 = fit_curve(with_sigma, exp_params(2.0, 1.0, 0.0), kExpModel);
    const auto fit2 = fit_curve(without_sigma, exp_params(2.0, 1.0, 0.0), kExpModel);
    CHECK(fit1.uncertainty("a") == doctest::Approx(fit2.uncertainty("a")).epsilon(0.35));
    CHECK(fit1.uncertainty("k") == doctest::Approx(fit2.uncertainty("k")).epsilon(0.35));
}

TEST_CASE("grid search oracle") {
    const auto s = exp_spectrum(3.0, 1.7, 0.25);
    std::vector<GridAxis> axes = {
        {"a", {1.0, 2.0, 3.0, 4.0}},
        {"k", {0.7, 1.2, 1.7, 2.2}},
    };
    auto base = exp_params(0.0, 0.0, 0.25);

    const auto best = grid_search(s, base, axes, kExpModel);
    CHECK(best.params[0] == 3.0);  // nearest grid point to the truth wins
    CHECK(best.params[1] == 1.7);

    // the iterative fitter must do at least as well as the exhaustive grid
    const auto fit = fit_curve(s, exp_params(1.0, 1.0, 0.25), kExpModel);
    CHECK(fit.chi_squared <= best.chi_squared + 1e-18);

    // flat data: every grid point ties, the first flat index is returned
    Spectrum flat;
    for (int i = 0; i < 16; ++i) {
        flat.x.push_back(i);
        flat.y.push_back(0.25);
    }
    std::vector<GridAxis> zero_axes = {{"a", {0.0, 0.0, 0.0}}, {"k", {1.0, 1.0}}};
    const auto tie = grid_search(flat, base, zero_axes, kExpModel);
    CHECK(tie.flat_index == 0);
}

TEST_CASE("spectrum validation") {
    Spectrum s;
    s.x = {0, 1, 2, 3, 4, 5, 6, 7};
    s.y = {1, 1, 1, 1, 1, 1, 1, 1};
    CHECK_NOTHROW(s.validate());

    auto too_short = s;
    too_short.x.resize(4);
    too_short.y.resize(4);
    CHECK_THROWS_AS(too_short.validate(), std::invalid_argument);

    auto not_monotone = s;
    not_monotone.x[3] = 0.5;
    CHECK_THROWS_AS(not_monotone.validate(), std::invalid_argument);

    auto bad_sigma = s;
    bad_sigma.sigma.assign(8, 0.0);
    CHECK_THROWS_AS(bad_sigma.validate(), std::invalid_argument);

    auto nan_y = s;
    nan_y.y[2] = std::nan("");
    CHECK_THROWS_AS(nan_y.validate(), std::invalid_argument);
}

TEST_CASE("fit config validation") {
    FitConfig cfg;
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.bounds["a"] = {2.0, 1.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
