#include "wgspec/spectral_fits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wgspec {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1, v.end());
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

// robust noise estimate from first differences, insensitive to the lineshape
double noise_rms_estimate(const std::vector<double>& y) {
    if (y.size() < 3) return 0.0;
    std::vector<double> d(y.size() - 1);
    for (std::size_t i = 0; i + 1 < y.size(); ++i) d[i] = std::abs(y[i + 1] - y[i]);
    return 1.4826 * median(std::move(d)) / std::sqrt(2.0);
}

struct FanoParamLayout {
    static constexpr std::size_t beta = 0;
    static constexpr std::size_t gamma_d = 1;
    static constexpr std::size_t xi = 2;
    static constexpr std::size_t center = 3;
    static constexpr std::size_t gamma = 4;
    static constexpr std::size_t peaks = 5;  // 3 per residual peak
};

double fano_model(double x, std::span<const double> p, double drive_s, int peaks) {
    using L = FanoParamLayout;
    const EmitterParams em{p[L::gamma], p[L::gamma_d], p[L::beta]};
    const FanoBackground fano{p[L::xi]};
    const double detuning = x - p[L::center];
    double value;
    if (drive_s == 0.0) {
        value = fano_transmission(em, fano, detuning);
    } else {
        SpectrumModelParams mp;
        mp.emitter = em;
        mp.fano = fano;
        mp.drive = DrivePoint::from_saturation(drive_s);
        value = total_transmission(mp, detuning);
    }
    for (int k = 0; k < peaks; ++k) {
        const std::size_t base = L::peaks + 3 * static_cast<std::size_t>(k);
        value += lorentzian_peak(x, p[base], p[base + 1], p[base + 2]);
    }
    return value;
}

}  // namespace

double beta_from_extinction(double t_min, double dephasing_ratio, double saturation) {
    const double product =
        (1.0 - t_min) * (1.0 + 2.0 * dephasing_ratio) * (1.0 + saturation);
    const double arg = std::clamp(1.0 - product, 0.0, 1.0);
    return 1.0 - std::sqrt(arg);
}

FanoInitialGuess initial_fano_guess(const Spectrum& spectrum, double gamma_ghz,
                                    double drive_s) {
    spectrum.validate();
    if (gamma_ghz <= 0.0)
        throw std::domain_error("initial_fano_guess: gamma must be positive");

    FanoInitialGuess g;
    g.noise_rms = noise_rms_estimate(spectrum.y);

    const double baseline = median(spectrum.y);
    std::size_t i_min = 0;
    for (std::size_t i = 1; i < spectrum.size(); ++i)
        if (spectrum.y[i] < spectrum.y[i_min]) i_min = i;

    g.center_ghz = spectrum.x[i_min];
    g.depth = baseline - spectrum.y[i_min];
    if (g.depth < 3.0 * g.noise_rms || g.depth <= 0.0)
        throw std::runtime_error("no resonance found");

    const double t_min = std::clamp(spectrum.y[i_min] / std::max(baseline, 1e-12), 0.0, 1.0);
    g.beta = beta_from_extinction(t_min, 0.0, drive_s);

    // dip width from the outermost half-depth crossings around the minimum
    const double half = spectrum.y[i_min] + 0.5 * g.depth;
    std::size_t lo = i_min, hi = i_min;
    while (lo > 0 && spectrum.y[lo] < half) --lo;
    while (hi + 1 < spectrum.size() && spectrum.y[hi] < half) ++hi;
    const double width = std::max(spectrum.x[hi] - spectrum.x[lo], gamma_ghz * 0.1);
    g.gamma_d_ghz =
        std::max(0.0, 0.5 * (width / std::sqrt(1.0 + drive_s) - gamma_ghz));

    // wing asymmetry: a positive xi pulls the deep wing to positive detuning
    double left_sum = 0.0, right_sum = 0.0;
    std::size_t left_n = 0, right_n = 0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double d = spectrum.x[i] - g.center_ghz;
        if (std::abs(d) < width || std::abs(d) > 6.0 * width) continue;
        if (d < 0.0) {
            left_sum += spectrum.y[i];
            ++left_n;
        } else {
            right_sum += spectrum.y[i];
            ++right_n;
        }
    }
    if (left_n > 0 && right_n > 0) {
        const double asym = left_sum / static_cast<double>(left_n) -
                            right_sum / static_cast<double>(right_n);
        g.xi = std::clamp(2.0 * asym / g.depth, -1.5, 1.5);
    }
    return g;
}

FitResult fit_fano_spectrum(const Spectrum& spectrum, const FanoFitOptions& options,
                            const FitConfig& config) {
    spectrum.validate();
    if (options.gamma_ghz <= 0.0)
        throw std::domain_error("fit_fano_spectrum: gamma must be positive");
    if (options.drive_s < 0.0)
        throw std::domain_error("fit_fano_spectrum: drive saturation must be non-negative");
    if (options.residual_peaks < 0)
        throw std::domain_error("fit_fano_spectrum: residual peak count must be non-negative");
    if (spectrum.x_kind != Spectrum::XKind::detuning)
        throw std::invalid_argument("fit_fano_spectrum: calibrate the voltage axis first");

    FanoInitialGuess guess;
    const bool need_guess = !config.initial.count("beta") || !config.initial.count("center");
    if (need_guess) {
        guess = initial_fano_guess(spectrum, options.gamma_ghz, options.drive_s);
    } else {
        guess.beta = config.initial.at("beta");
        guess.center_ghz = config.initial.at("center");
    }

    const double span = spectrum.x.back() - spectrum.x.front();
    std::vector<ParamSpec> params = {
        {"beta", guess.beta, 0.0, 1.0, false},
        {"gamma_d", guess.gamma_d_ghz, 0.0, 10.0 * options.gamma_ghz, false},
        {"xi", guess.xi, -2.0, 2.0, false},
        {"center", guess.center_ghz, spectrum.x.front(), spectrum.x.back(), false},
        {"gamma", options.gamma_ghz, 1e-6, 1e6, !options.gamma_free},
    };
    for (int k = 0; k < options.residual_peaks; ++k) {
        const std::string tag = "peak" + std::to_string(k + 1);
        // default neighbor placement: offset one linewidth from the main dip
        params.push_back({tag + "_center", guess.center_ghz + (k + 1) * options.gamma_ghz,
                          spectrum.x.front() - span, spectrum.x.back() + span, false});
        params.push_back({tag + "_fwhm", options.gamma_ghz, 1e-4 * options.gamma_ghz,
                          4.0 * span, false});
        params.push_back({tag + "_amp", -0.05, -2.0, 2.0, false});
    }

    std::size_t free_count = 0;
    for (const auto& p : params)
        if (!p.frozen && !config.frozen.count(p.name)) ++free_count;
    if (spectrum.size() < free_count + 3)
        throw std::invalid_argument("fit_fano_spectrum: needs at least " +
                                    std::to_string(free_count + 3) + " points");

    const double s = options.drive_s;
    const int peaks = options.residual_peaks;
    return fit_curve(
        spectrum, params,
        [s, peaks](double x, std::span<const double> p) { return fano_model(x, p, s, peaks); },
        config);
}

double fano_model_value(const FitResult& fit, const FanoFitOptions& options, double x) {
    std::vector<double> p(fit.params.begin(), fit.params.begin() + 5);
    return fano_model(x, p, options.drive_s, 0);
}

FitResult fit_lorentzian(const Spectrum& spectrum, const FitConfig& config) {
    spectrum.validate();

    const double offset0 = median(spectrum.y);
    std::size_t i_ext = 0;
    for (std::size_t i = 1; i < spectrum.size(); ++i)
        if (std::abs(spectrum.y[i] - offset0) > std::abs(spectrum.y[i_ext] - offset0)) i_ext = i;
    const double amp0 = spectrum.y[i_ext] - offset0;

    // half-height crossings around the extremum for the width start
    const double half = offset0 + 0.5 * amp0;
    auto above = [&](std::size_t i) {
        return amp0 > 0.0 ? spectrum.y[i] > half : spectrum.y[i] < half;
    };
    std::size_t lo = i_ext, hi = i_ext;
    while (lo > 0 && above(lo)) --lo;
    while (hi + 1 < spectrum.size() && above(hi)) ++hi;
    const double span = spectrum.x.back() - spectrum.x.front();
    const double fwhm0 = std::clamp(spectrum.x[hi] - spectrum.x[lo], span / 200.0, span);

    std::vector<ParamSpec> params = {
        {"center", spectrum.x[i_ext], spectrum.x.front(), spectrum.x.back(), false},
        {"fwhm", fwhm0, 1e-9, 4.0 * span, false},
        {"amplitude", amp0, -std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(), false},
        {"offset", offset0, -std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(), false},
    };

    return fit_curve(
        spectrum, params,
        [](double x, std::span<const double> p) {
            return p[3] + lorentzian_peak(x, p[0], p[1], p[2]);
        },
        config);
}

LinearCalibration calibrate_voltage_to_frequency(
    const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2)
        throw std::invalid_argument("calibrate_voltage_to_frequency: needs at least 2 points");

    double sv = 0.0, sf = 0.0;
    for (const auto& [v, f] : points) {
        if (!std::isfinite(v) || !std::isfinite(f))
            throw std::invalid_argument("calibrate_voltage_to_frequency: non-finite point");
        sv += v;
        sf += f;
    }
    const double n = static_cast<double>(points.size());
    const double mv = sv / n, mf = sf / n;

    double svv = 0.0, svf = 0.0;
    for (const auto& [v, f] : points) {
        svv += (v - mv) * (v - mv);
        svf += (v - mv) * (f - mf);
    }
    if (svv == 0.0)
        throw std::invalid_argument(
            "calibrate_voltage_to_frequency: all voltages equal, line is rank deficient");

    LinearCalibration cal;
    cal.slope_ghz_per_v = svf / svv;
    cal.intercept_ghz = mf - cal.slope_ghz_per_v * mv;

    double ss = 0.0;
    for (const auto& [v, f] : points) {
        const double r = f - (cal.slope_ghz_per_v * v + cal.intercept_ghz);
        ss += r * r;
    }
    cal.residual_rms_ghz = std::sqrt(ss / n);
    return cal;
}

Spectrum apply_calibration(const Spectrum& spectrum, const LinearCalibration& cal) {
    spectrum.validate();
    if (spectrum.x_kind != Spectrum::XKind::voltage)
        throw std::invalid_argument("apply_calibration: spectrum is not on a voltage axis");
    if (cal.slope_ghz_per_v == 0.0)
        throw std::invalid_argument("apply_calibration: calibration slope is zero");

    Spectrum out = spectrum;
    out.x_kind = Spectrum::XKind::detuning;
    for (auto& v : out.x) v = cal.slope_ghz_per_v * v + cal.intercept_ghz;
    if (cal.slope_ghz_per_v < 0.0) {
        std::reverse(out.x.begin(), out.x.end());
        std::reverse(out.y.begin(), out.y.end());
        std::reverse(out.sigma.begin(), out.sigma.end());
    }
    return out;
}

}  // namespace wgspec
