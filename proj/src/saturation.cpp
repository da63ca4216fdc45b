#include "wgspec/saturation.hpp"

#include "wgspec/lineshape.hpp"
#include "wgspec/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wgspec {

namespace {

constexpr double k_hbar_js = 1.054571817e-34;

}  // namespace

void PowerSeries::validate() const {
    if (entries.empty()) throw std::invalid_argument("PowerSeries: no entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!(entries[i].input_power_w > 0.0))
            throw std::invalid_argument("PowerSeries: power must be positive at entry " +
                                        std::to_string(i));
        entries[i].spectrum.validate();
        for (std::size_t j = 0; j < i; ++j)
            if (entries[j].input_power_w == entries[i].input_power_w)
                throw std::invalid_argument("PowerSeries: duplicate power at entry " +
                                            std::to_string(i));
    }
}

PowerSeriesAnalysis analyze_power_series(const PowerSeries& series,
                                         const SeriesFitOptions& options) {
    series.validate();

    PowerSeriesAnalysis out;
    out.rows.resize(series.entries.size());

    FanoFitOptions fano_options;
    fano_options.gamma_ghz = options.gamma_ghz;
    fano_options.drive_s = 0.0;  // rows are fitted with effective weak-drive parameters
    fano_options.residual_peaks = options.residual_peaks;

    detail::parallel_for(
        series.entries.size(),
        [&](std::size_t i) {
            const auto& entry = series.entries[i];
            PowerSeriesRow& row = out.rows[i];
            row.input_power_w = entry.input_power_w;
            row.excluded = entry.excluded;
            try {
                const FitResult fit =
                    fit_fano_spectrum(entry.spectrum, fano_options, options.fit);
                if (!fit.converged) {
                    row.message = "fit did not converge";
                    return;
                }
                row.beta_eff = fit.value("beta");
                row.gamma_d_ghz = fit.value("gamma_d");
                row.xi = fit.value("xi");
                row.center_ghz = fit.value("center");
                const EmitterParams em{fit.value("gamma"), row.gamma_d_ghz, row.beta_eff};
                const FanoBackground fano{row.xi};
                row.t_min = fano_dip_minimum(em, fano);
                row.rt_linewidth_ghz = fano_dip_width_ghz(em, fano);
                row.ok = true;
            } catch (const std::exception& ex) {
                row.message = ex.what();
            }
        },
        options.threads);

    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : out.rows)
        if (row.ok) {
            sum += row.xi;
            ++n;
        }
    if (n > 0) {
        out.xi_mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const auto& row : out.rows)
            if (row.ok) ss += (row.xi - out.xi_mean) * (row.xi - out.xi_mean);
        out.xi_stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    }
    return out;
}

double SaturationFit::predicted_linewidth_ghz(double input_power_w, double gamma_ghz) const {
    const EmitterParams em{gamma_ghz, gamma_r * gamma_ghz, beta_eff};
    return rt_linewidth_ghz(em, input_power_w / critical_input_power_w);
}

SaturationFit fit_saturation(const PowerSeriesAnalysis& analysis,
                             const SaturationOptions& options) {
    if (!(options.gamma_r >= 0.0))
        throw std::domain_error("fit_saturation: gamma_r must be non-negative");

    std::vector<double> power, t_min;
    for (const auto& row : analysis.rows)
        if (row.ok && !row.excluded) {
            power.push_back(row.input_power_w);
            t_min.push_back(row.t_min);
        }
    if (power.size() < 4)
        throw std::invalid_argument("fit_saturation: needs at least 4 usable rows, got " +
                                    std::to_string(power.size()));

    const auto [pmin_it, pmax_it] = std::minmax_element(power.begin(), power.end());
    const double p_min = *pmin_it, p_max = *pmax_it;

    const double gr = options.gamma_r;
    std::vector<ParamSpec> params = {
        {"beta_eff", 0.3, 0.0, 1.0, false},
        {"critical_power", std::sqrt(p_min * p_max), p_min * 1e-4, p_max * 1e4, false},
    };

    FitResult fit = fit_curve(
        power, t_min, {}, params,
        [gr](double p, std::span<const double> q) {
            return 1.0 + (q[0] - 2.0) * q[0] / ((1.0 + 2.0 * gr) * (1.0 + p / q[1]));
        },
        options.fit);

    SaturationFit out;
    out.beta_eff = fit.value("beta_eff");
    out.critical_input_power_w = fit.value("critical_power");
    out.gamma_r = gr;
    out.chi_squared = fit.chi_squared;
    out.converged = fit.converged;
    out.covariance = fit.covariance;

    if (out.critical_input_power_w > 20.0 * p_max || out.critical_input_power_w < p_min / 20.0)
        throw std::runtime_error(
            "fit_saturation: critical power " + std::to_string(out.critical_input_power_w) +
            " W falls outside the sampled range; all powers are far " +
            (out.critical_input_power_w > p_max ? "below" : "above") +
            " saturation and the fit is degenerate");

    const EmitterParams em{1.0, gr, out.beta_eff};
    out.n_c = critical_photon_number(em);

    if (options.transition_frequency_thz && options.gamma_per_ns) {
        out.critical_waveguide_power_w =
            waveguide_power_w(out.n_c, *options.transition_frequency_thz, *options.gamma_per_ns);
        out.alpha = coupling_efficiency(*out.critical_waveguide_power_w,
                                        out.critical_input_power_w);
    }
    return out;
}

double waveguide_power_w(double n_photons_per_lifetime, double transition_frequency_thz,
                         double gamma_per_ns) {
    if (!(n_photons_per_lifetime >= 0.0))
        throw std::domain_error("waveguide_power: photon number must be non-negative");
    if (!(transition_frequency_thz > 0.0) || !(gamma_per_ns > 0.0))
        throw std::domain_error("waveguide_power: frequency and decay rate must be positive");
    const double omega = 2.0 * M_PI * transition_frequency_thz * 1e12;
    return k_hbar_js * omega * n_photons_per_lifetime * gamma_per_ns * 1e9;
}

double coupling_efficiency(double waveguide_power_w, double input_power_w) {
    if (!(input_power_w > 0.0))
        throw std::domain_error("coupling_efficiency: input power must be positive");
    if (!(waveguide_power_w >= 0.0))
        throw std::domain_error("coupling_efficiency: waveguide power must be non-negative");
    if (waveguide_power_w > input_power_w)
        throw std::domain_error(
            "coupling_efficiency: waveguide power exceeds input power (alpha > 1)");
    return waveguide_power_w / input_power_w;
}

}  // namespace wgspec
