#include "wgspec/thermal.hpp"

#include "wgspec/lineshape.hpp"
#include "wgspec/parallel.hpp"
#include "wgspec/spectral_fits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wgspec {

void ThermalSeries::validate() const {
    if (entries.empty()) throw std::invalid_argument("ThermalSeries: no entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!(entries[i].temperature_k > 0.0))
            throw std::invalid_argument("ThermalSeries: temperature must be positive at entry " +
                                        std::to_string(i));
        if (i > 0 && entries[i].temperature_k <= entries[i - 1].temperature_k)
            throw std::invalid_argument(
                "ThermalSeries: temperatures must be strictly increasing at entry " +
                std::to_string(i));
        entries[i].spectrum.validate();
    }
}

void BandEdgeParams::validate() const {
    if (!(eta >= 0.0)) throw std::domain_error("BandEdgeParams: eta must be non-negative");
    if (!(mean_phonon_mev > 0.0))
        throw std::domain_error("BandEdgeParams: mean phonon energy must be positive");
    if (!std::isfinite(e_g0_mev)) throw std::domain_error("BandEdgeParams: offset must be finite");
}

double band_edge_shift_mev(double temperature_k, const BandEdgeParams& params) {
    params.validate();
    if (!(temperature_k > 0.0))
        throw std::domain_error("band_edge_shift: temperature must be positive");
    const double x = params.mean_phonon_mev / (2.0 * k_boltzmann_mev_per_k * temperature_k);
    // coth(x) - 1 = 2 / (exp(2x) - 1), stable for both large and small x
    const double occupation = 2.0 / std::expm1(2.0 * x);
    return params.eta * params.mean_phonon_mev * occupation;
}

BandEdgeFit fit_band_edge(const std::vector<std::pair<double, double>>& positions,
                          const std::vector<double>& sigma_mev, const FitConfig& config) {
    if (positions.size() < 4)
        throw std::invalid_argument("fit_band_edge: needs at least 4 points, got " +
                                    std::to_string(positions.size()));
    if (!sigma_mev.empty() && sigma_mev.size() != positions.size())
        throw std::invalid_argument("fit_band_edge: sigma length differs from data");

    std::vector<double> t, shift;
    for (const auto& [temperature, value] : positions) {
        if (!(temperature > 0.0))
            throw std::invalid_argument("fit_band_edge: temperatures must be positive");
        t.push_back(temperature);
        shift.push_back(value);
    }
    const auto [tmin_it, tmax_it] = std::minmax_element(t.begin(), t.end());
    if (*tmax_it < 3.0 * *tmin_it)
        throw std::invalid_argument(
            "fit_band_edge: temperature span below a factor 3, the phonon energy and "
            "coupling are not identifiable");

    const double shift_span =
        *std::max_element(shift.begin(), shift.end()) -
        *std::min_element(shift.begin(), shift.end());

    auto model = [](double temperature, std::span<const double> p) {
        const double x = p[2] / (2.0 * k_boltzmann_mev_per_k * temperature);
        return p[0] + p[1] * p[2] * (2.0 / std::expm1(2.0 * x));
    };

    // the coupling and phonon energy are strongly correlated over a limited
    // temperature range; multistart over the phonon energy picks the basin
    const double kt_max = k_boltzmann_mev_per_k * *tmax_it;
    FitResult best;
    bool have_best = false;
    for (const double phonon0 : {0.8 * kt_max, 2.0 * kt_max, 4.0 * kt_max, 8.0 * kt_max,
                                 16.0 * kt_max}) {
        std::vector<ParamSpec> params = {
            {"e_g0", shift.front(), -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), false},
            {"eta", 0.3, 0.0, 100.0, false},
            {"mean_phonon", phonon0, 1e-3, 1e3, false},
        };
        if (shift_span > 0.0) params[1].init = shift_span / (2.0 * kt_max);
        try {
            FitResult fit = fit_curve(t, shift, sigma_mev, params, model, config);
            if (!have_best || fit.chi_squared < best.chi_squared) {
                best = fit;
                have_best = true;
            }
        } catch (const std::runtime_error&) {
            // a degenerate start; other starts may still work
        }
    }
    if (!have_best) throw std::runtime_error("fit_band_edge: all starting points failed");

    BandEdgeFit out;
    out.params.e_g0_mev = best.value("e_g0");
    out.params.eta = best.value("eta");
    out.params.mean_phonon_mev = best.value("mean_phonon");
    out.covariance = best.covariance;
    out.chi_squared = best.chi_squared;
    out.converged = best.converged;
    return out;
}

ThermalAnalysis analyze_thermal_series(const ThermalSeries& series,
                                       const SeriesFitOptions& options) {
    series.validate();

    ThermalAnalysis out;
    out.rows.resize(series.entries.size());

    FanoFitOptions fano_options;
    fano_options.gamma_ghz = options.gamma_ghz;
    fano_options.drive_s = 0.0;
    fano_options.residual_peaks = options.residual_peaks;

    detail::parallel_for(
        series.entries.size(),
        [&](std::size_t i) {
            const auto& entry = series.entries[i];
            ThermalRow& row = out.rows[i];
            row.temperature_k = entry.temperature_k;
            try {
                for (const auto& w : options.fit.mask_windows)
                    if (!entry.spectrum.x.empty() && w.first <= entry.spectrum.x.back() &&
                        w.second >= entry.spectrum.x.front())
                        row.masked = true;
                const FitResult fit =
                    fit_fano_spectrum(entry.spectrum, fano_options, options.fit);
                if (!fit.converged) {
                    row.message = "fit did not converge";
                    return;
                }
                row.gamma_d_ghz = fit.value("gamma_d");
                row.center_ghz = fit.value("center");
                const EmitterParams em{fit.value("gamma"), row.gamma_d_ghz,
                                       fit.value("beta")};
                const FanoBackground fano{fit.value("xi")};
                row.t_min = fano_dip_minimum(em, fano);
                row.rt_linewidth_ghz = fano_dip_width_ghz(em, fano);
                row.ok = true;
            } catch (const std::exception& ex) {
                row.message = ex.what();
            }
        },
        options.threads);

    // red shift in energy relative to the first fitted row
    const ThermalRow* reference = nullptr;
    for (const auto& row : out.rows)
        if (row.ok) {
            reference = &row;
            break;
        }
    if (reference) {
        for (const auto& row : out.rows)
            if (row.ok)
                out.resonance_positions.emplace_back(
                    row.temperature_k,
                    (reference->center_ghz - row.center_ghz) * k_mev_per_ghz);
    }
    return out;
}

}  // namespace wgspec
