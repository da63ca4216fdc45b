#pragma once

#include "wgspec/fit.hpp"
#include "wgspec/saturation.hpp"  // SeriesFitOptions

#include <string>
#include <utility>
#include <vector>

// Temperature-series analysis: per-temperature spectral fits and the
// phonon-coupling band-edge model for the resonance shift.

namespace wgspec {

inline constexpr double k_boltzmann_mev_per_k = 0.0861733;

struct ThermalSeriesEntry {
    double temperature_k = 0.0;
    Spectrum spectrum;
};

struct ThermalSeries {
    std::vector<ThermalSeriesEntry> entries;

    void validate() const;   // temperatures positive, strictly increasing
};

struct BandEdgeParams {
    double e_g0_mev = 0.0;          // zero-temperature offset
    double eta = 0.0;               // phonon coupling parameter, >= 0
    double mean_phonon_mev = 1.0;   // average phonon energy, > 0

    void validate() const;
};

// Red shift of the transition at temperature T:
// eta * <E_ph> * (coth(<E_ph> / 2kT) - 1), monotone in T and 0 at T -> 0.
double band_edge_shift_mev(double temperature_k, const BandEdgeParams& params);

struct BandEdgeFit {
    BandEdgeParams params;
    Eigen::MatrixXd covariance;   // over (e_g0, eta, mean_phonon)
    double chi_squared = 0.0;
    bool converged = false;
};

// Weighted least squares of the coth model through (temperature, shift)
// points; multistart over the phonon energy. Requires >= 4 points spanning at
// least a factor 3 in temperature.
BandEdgeFit fit_band_edge(const std::vector<std::pair<double, double>>& positions,
                          const std::vector<double>& sigma_mev = {},
                          const FitConfig& config = {});

struct ThermalRow {
    double temperature_k = 0.0;
    double rt_linewidth_ghz = 0.0;
    double gamma_d_ghz = 0.0;
    double t_min = 0.0;
    double center_ghz = 0.0;
    bool ok = false;
    bool masked = false;      // a mask window was applied to this row's fit
    std::string message;
};

struct ThermalAnalysis {
    std::vector<ThermalRow> rows;
    // (temperature, red shift in meV) relative to the first fitted row
    std::vector<std::pair<double, double>> resonance_positions;
};

inline constexpr double k_mev_per_ghz = 4.135667696e-3;   // h * 1 GHz in meV

// Per-temperature Fano fits with the homogeneous linewidth frozen; rows where
// the configured mask windows removed points are flagged.
ThermalAnalysis analyze_thermal_series(const ThermalSeries& series,
                                       const SeriesFitOptions& options);

}  // namespace wgspec
