#pragma once

#include "wgspec/fit.hpp"
#include "wgspec/lineshape.hpp"

// Named fits for the transmission / fluorescence spectra: the Fano extinction
// model with optional residual neighbor lines, a plain Lorentzian, the
// data-driven starting point for the Fano fit, and the voltage-to-frequency
// axis calibration.

namespace wgspec {

struct FanoFitOptions {
    double gamma_ghz = 1.0;   // homogeneous linewidth, frozen unless gamma_free
    bool gamma_free = false;
    double drive_s = 0.0;     // scan saturation; 0 selects the weak-drive closed form
    int residual_peaks = 0;   // number of additive Lorentzian neighbors co-fitted
};

// Parameters: beta, gamma_d, xi, center, gamma, then per neighbor
// peakN_center / peakN_fwhm / peakN_amp. Initial values come from
// initial_fano_guess unless overridden through FitConfig.
FitResult fit_fano_spectrum(const Spectrum& spectrum, const FanoFitOptions& options,
                            const FitConfig& config = {});

// Evaluate the fitted Fano model (without residual peaks) at one x.
double fano_model_value(const FitResult& fit, const FanoFitOptions& options, double x);

// Peak-or-dip Lorentzian with parameters center, fwhm, amplitude, offset.
FitResult fit_lorentzian(const Spectrum& spectrum, const FitConfig& config = {});

struct FanoInitialGuess {
    double beta = 0.0;
    double gamma_d_ghz = 0.0;
    double xi = 0.0;
    double center_ghz = 0.0;
    double depth = 0.0;        // baseline minus dip minimum
    double noise_rms = 0.0;    // robust noise estimate used for the depth gate
};

// Starting point for the Fano fit: dip position, depth inverted to beta,
// width inverted to gamma_d, wing asymmetry mapped to xi. Throws
// std::runtime_error("no resonance found") when the dip is below 3x noise.
FanoInitialGuess initial_fano_guess(const Spectrum& spectrum, double gamma_ghz,
                                    double drive_s = 0.0);

// Inversion of the on-resonance extinction for beta (branch with beta <= 1).
double beta_from_extinction(double t_min, double dephasing_ratio, double saturation);

struct LinearCalibration {
    double slope_ghz_per_v = 0.0;
    double intercept_ghz = 0.0;
    double residual_rms_ghz = 0.0;
};

// Ordinary least squares line through (voltage, frequency) pairs. Throws on
// fewer than two distinct voltages.
LinearCalibration calibrate_voltage_to_frequency(
    const std::vector<std::pair<double, double>>& points);

// Convert a voltage-axis spectrum to a detuning axis; samples are reordered
// when the calibration slope is negative.
Spectrum apply_calibration(const Spectrum& spectrum, const LinearCalibration& cal);

}  // namespace wgspec
