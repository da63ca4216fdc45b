#include "wgspec/decay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wgspec {

void DecayHistogram::validate() const {
    if (time_ps.size() != counts.size())
        throw std::invalid_argument("DecayHistogram: time and counts lengths differ");
    if (time_ps.size() < 16)
        throw std::invalid_argument("DecayHistogram: needs at least 16 bins");
    const double dt = time_ps[1] - time_ps[0];
    if (!(dt > 0.0)) throw std::invalid_argument("DecayHistogram: time bins must increase");
    for (std::size_t i = 1; i < time_ps.size(); ++i) {
        const double step = time_ps[i] - time_ps[i - 1];
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("DecayHistogram: bin widths are not uniform at index " +
                                        std::to_string(i));
    }
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (!std::isfinite(counts[i]) || counts[i] < 0.0)
            throw std::invalid_argument("DecayHistogram: counts must be non-negative at index " +
                                        std::to_string(i));
    if (irf.empty()) throw std::invalid_argument("DecayHistogram: missing instrument response");
    double sum = 0.0;
    for (const auto& [t, w] : irf) {
        if (!std::isfinite(t) || !std::isfinite(w) || w < 0.0)
            throw std::invalid_argument("DecayHistogram: invalid instrument response sample");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument(
            "DecayHistogram: instrument response weights must sum to 1 (got " +
            std::to_string(sum) + "); see normalize_irf");
}

double DecayHistogram::bin_width_ps() const { return time_ps[1] - time_ps[0]; }

double DecayHistogram::irf_rms_width_ps() const {
    double mean = 0.0;
    for (const auto& [t, w] : irf) mean += w * t;
    double var = 0.0;
    for (const auto& [t, w] : irf) var += w * (t - mean) * (t - mean);
    return std::sqrt(std::max(var, 0.0));
}

void normalize_irf(std::vector<std::pair<double, double>>& irf) {
    double sum = 0.0;
    for (const auto& [t, w] : irf) sum += w;
    if (!(sum > 0.0)) throw std::invalid_argument("normalize_irf: total weight must be positive");
    for (auto& [t, w] : irf) w /= sum;
}

double decay_model_value(double t_ps, double amplitude, double rate_per_ns,
                         const std::vector<std::pair<double, double>>& irf) {
    double acc = 0.0;
    for (const auto& [tj, wj] : irf) {
        const double dt_ns = (t_ps - tj) * 1e-3;
        if (dt_ns >= 0.0) acc += wj * std::exp(-rate_per_ns * dt_ns);
    }
    return amplitude * acc;
}

FitResult fit_decay(const DecayHistogram& histogram, const FitConfig& config) {
    histogram.validate();

    const auto& t = histogram.time_ps;
    const auto& c = histogram.counts;

    std::size_t i_peak = 0;
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i] > c[i_peak]) i_peak = i;
    const double c_max = c[i_peak];
    if (!(c_max > 0.0)) throw std::invalid_argument("fit_decay: histogram is empty");

    // rate start value from the log slope across the decaying flank
    double rate0 = 1.0;
    {
        std::size_t i1 = i_peak, i2 = i_peak;
        for (std::size_t i = i_peak; i < c.size(); ++i) {
            if (c[i] > 0.3 * c_max) i1 = i;
            if (c[i] > 0.03 * c_max) i2 = i;
        }
        if (i2 > i1 && c[i1] > 0.0 && c[i2] > 0.0)
            rate0 = std::log(c[i1] / c[i2]) / ((t[i2] - t[i1]) * 1e-3);
        if (!(rate0 > 0.0) || !std::isfinite(rate0)) rate0 = 1.0;
    }

    std::vector<ParamSpec> params = {
        {"amplitude", c_max, 0.0, std::numeric_limits<double>::infinity(), false},
        {"rate_per_ns", rate0, 1e-6, 1e6, false},
    };

    const auto& irf = histogram.irf;
    FitResult fit = fit_curve(
        t, c, {}, params,
        [&irf](double x, std::span<const double> p) {
            return decay_model_value(x, p[0], p[1], irf);
        },
        config);

    const double rate = fit.value("rate_per_ns");
    if (rate > 0.0) {
        const double lifetime_ps = 1e3 / rate;
        if (histogram.irf_rms_width_ps() > 10.0 * lifetime_ps)
            fit.warnings.push_back(
                "ill-conditioned: instrument response is more than 10x wider than the decay");
        if (t.back() - t[i_peak] < 5.0 * lifetime_ps)
            fit.warnings.push_back("histogram spans fewer than 5 lifetimes");
    }
    return fit;
}

}  // namespace wgspec
