#pragma once

#include "wgspec/fit.hpp"
#include "wgspec/spectral_fits.hpp"

#include <optional>
#include <string>
#include <vector>

// Power-series analysis: per-power spectral fits, the saturation fit of the
// transmission minima, and the photon-flux / coupling-efficiency accounting.

namespace wgspec {

struct PowerSeriesEntry {
    double input_power_w = 0.0;
    Spectrum spectrum;
    bool excluded = false;   // kept out of the saturation fit, still analyzed
};

struct PowerSeries {
    std::vector<PowerSeriesEntry> entries;

    void validate() const;   // powers positive and distinct
};

// Options shared by the per-row spectral fits of both series pipelines.
struct SeriesFitOptions {
    double gamma_ghz = 1.0;
    int residual_peaks = 0;
    FitConfig fit;
    int threads = 0;         // 0 = hardware concurrency
};

struct PowerSeriesRow {
    double input_power_w = 0.0;
    double t_min = 0.0;              // model minimum of the fitted dip
    double rt_linewidth_ghz = 0.0;   // full width at half depth of the fitted dip
    double xi = 0.0;
    double beta_eff = 0.0;           // effective weak-drive parameters of the row fit
    double gamma_d_ghz = 0.0;
    double center_ghz = 0.0;
    bool ok = false;
    bool excluded = false;
    std::string message;             // failure reason when not ok
};

struct PowerSeriesAnalysis {
    std::vector<PowerSeriesRow> rows;
    double xi_mean = 0.0;            // over rows that fitted
    double xi_stddev = 0.0;
};

// Fit every spectrum with the weak-drive Fano family (effective parameters)
// and extract minimum, width, and Fano factor. Row failures are flagged, the
// series continues.
PowerSeriesAnalysis analyze_power_series(const PowerSeries& series,
                                         const SeriesFitOptions& options);

struct SaturationFit {
    double beta_eff = 0.0;
    double critical_input_power_w = 0.0;
    double gamma_r = 0.0;                               // frozen dephasing ratio
    double n_c = 0.0;                                   // from beta_eff and gamma_r
    std::optional<double> critical_waveguide_power_w;   // when accounting inputs given
    std::optional<double> alpha;                        // waveguide coupling efficiency
    double chi_squared = 0.0;
    bool converged = false;
    Eigen::MatrixXd covariance;                         // over (beta_eff, critical power)

    // Power-broadened linewidth implied by the fit at a given input power.
    double predicted_linewidth_ghz(double input_power_w, double gamma_ghz) const;
};

struct SaturationOptions {
    double gamma_r = 0.0;                           // frozen during the fit
    std::optional<double> transition_frequency_thz; // for the power accounting
    std::optional<double> gamma_per_ns;
    FitConfig fit;
};

// Least-squares fit of t_min(P) with free (beta_eff, critical power) over the
// rows that fitted and are not excluded; requires at least 4 such rows.
// Throws when the critical power is not bracketed by the sampled powers.
SaturationFit fit_saturation(const PowerSeriesAnalysis& analysis,
                             const SaturationOptions& options);

// P = hbar * (2 pi nu) * n * gamma, photons per lifetime to watts.
double waveguide_power_w(double n_photons_per_lifetime, double transition_frequency_thz,
                         double gamma_per_ns);

// alpha = P_waveguide / P_input, with 0 <= alpha <= 1 enforced.
double coupling_efficiency(double waveguide_power_w, double input_power_w);

}  // namespace wgspec
