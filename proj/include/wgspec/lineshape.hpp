#pragma once

#include <complex>
#include <optional>
#include <vector>

// Steady-state transmission of a weak coherent beam through a waveguide
// containing a single two-level emitter, with a residual low-Q cavity
// background that turns the Lorentzian extinction dip into a Fano profile.
//
// All rates and detunings are linear frequencies in GHz. The lineshape
// expressions are homogeneous of degree zero in (linewidth, dephasing,
// detuning), so linear vs. angular frequency conventions cancel throughout;
// only the waveguide power accounting (see saturation.hpp) touches hbar*omega.

namespace wgspec {

// Two-level emitter coupled to a single guided mode.
struct EmitterParams {
    double linewidth_ghz = 1.0;   // homogeneous linewidth Gamma (> 0)
    double dephasing_ghz = 0.0;   // pure dephasing Gamma_d (>= 0)
    double beta = 1.0;            // fraction of emission into the guided mode, in [0, 1]

    // throws std::domain_error on out-of-range fields
    void validate() const;

    // Gamma_d / Gamma, the dephasing rate relative to the homogeneous linewidth
    double dephasing_ratio() const { return dephasing_ghz / linewidth_ghz; }
    double guided_rate_ghz() const { return beta * linewidth_ghz; }
    double radiative_rate_ghz() const { return (1.0 - beta) * linewidth_ghz; }
};

// Residual cavity formed by weak reflections at the waveguide terminations.
// The cavity is much broader than the emitter line, so its effect over one
// scan reduces to a single real phase factor xi.
struct FanoBackground {
    double xi = 0.0;

    void validate() const;

    // xi from the cavity-emitter detuning delta and cavity linewidth kappa,
    // evaluated at the emitter line (kappa > 0 required).
    static FanoBackground from_cavity(double delta_ghz, double kappa_ghz);
};

// Drive strength of the probe beam. The saturation parameter S is the photon
// number per emitter lifetime normalized by the critical photon number; when
// photon_number is set it takes precedence over saturation.
struct DrivePoint {
    double saturation = 0.0;                  // S = n_tau / n_c, >= 0
    std::optional<double> photon_number;      // n_tau, photons per lifetime
    std::optional<double> input_power_w;      // bookkeeping only; see saturation.hpp

    static DrivePoint from_saturation(double s);
    static DrivePoint from_photon_number(double n_tau);

    void validate() const;
    // Photons per lifetime implied by this drive for the given emitter.
    // Converting a nonzero saturation requires beta > 0.
    double resolve_photon_number(const EmitterParams& emitter) const;
};

// Steady-state scattering amplitudes and intensity fractions, all normalized
// per unit input amplitude. The four fractions (transmitted, reflected,
// coherent loss into unguided modes, incoherent) partition the input flux.
struct ScatteringAmplitudes {
    std::complex<double> t;        // transmitted amplitude; t -> t0 for beta = 0
    std::complex<double> r;        // reflected amplitude
    std::complex<double> s_minus;  // dipole lowering-operator expectation per unit input
    double s_z = -0.5;             // inversion expectation, in [-1/2, 0]
    double coherent_loss_fraction = 0.0;   // gamma_rad |s_minus|^2
    double incoherent_fraction = 0.0;      // remainder of the flux bookkeeping

    double transmitted_fraction() const { return std::norm(t); }
    double reflected_fraction() const { return std::norm(r); }
    double fraction_sum() const {
        return transmitted_fraction() + reflected_fraction() + coherent_loss_fraction +
               incoherent_fraction;
    }
};

// Additive Lorentzian feature on top of the normalized transmission, used for
// residual neighboring lines (amplitude < 0 gives a dip).
struct ResidualPeak {
    double center_ghz = 0.0;
    double fwhm_ghz = 1.0;     // > 0
    double amplitude = 0.0;    // finite, signed

    void validate() const;
};

// Everything needed to evaluate one transmission spectrum.
struct SpectrumModelParams {
    EmitterParams emitter;
    FanoBackground fano;
    DrivePoint drive;
    double center_ghz = 0.0;   // emitter transition position on the scan axis
    std::vector<ResidualPeak> residual_peaks;

    void validate() const;
};

// On-resonance transmission 1 + (beta-2)beta / ((1+2*gamma_r)(1+S)).
double transmission_on_resonance(const EmitterParams& emitter, double saturation);

// Photons per lifetime that drive the emitter to quarter excitation,
// (1 + 2*gamma_r) / (4 beta^2). Diverges at beta = 0, reported as an error.
double critical_photon_number(const EmitterParams& emitter);

// Power-broadened width of the transmission trough, (Gamma + 2*Gamma_d) sqrt(1+S).
double rt_linewidth_ghz(const EmitterParams& emitter, double saturation);

// Bare cavity transmission 1 / (1 + i*xi).
std::complex<double> bare_transmission(const FanoBackground& fano);

// Full coupled-mode steady state at one detuning: amplitudes, dipole
// expectations, and the flux fractions, including drive saturation with the
// detuning-dependent critical photon number.
ScatteringAmplitudes steady_state_amplitudes(const SpectrumModelParams& params,
                                             double detuning_ghz);

// Normalized transmission (|t|^2 + beta/2 * incoherent) / |t0|^2 assembled
// from the steady state. Residual peaks are not included here.
double total_transmission(const SpectrumModelParams& params, double detuning_ghz);

// Weak-drive closed form of the Fano transmission spectrum.
double fano_transmission(const EmitterParams& emitter, const FanoBackground& fano,
                         double detuning_ghz);

// xi -> 0 limit: Lorentzian dip with FWHM Gamma + 2*Gamma_d (weak drive).
double lorentzian_limit_transmission(const EmitterParams& emitter, double detuning_ghz);

// Lower bound on the internal quantum efficiency from Purcell-enhanced and
// -inhibited decay rates: (gamma_e - gamma_i) / gamma_e.
double quantum_efficiency_bound(double gamma_enhanced_per_ns, double gamma_inhibited_per_ns);

// Signed Lorentzian feature amplitude/(1 + 4 (x-c)^2 / w^2).
double lorentzian_peak(double x, double center, double fwhm, double amplitude);

// Model spectrum on the scan axis: total transmission plus residual peaks.
double evaluate_spectrum_model(const SpectrumModelParams& params, double x_ghz);

// Numeric minimum of the weak-drive Fano dip. Returns the minimum
// transmission; the location is written to detuning_at_min when non-null.
double fano_dip_minimum(const EmitterParams& emitter, const FanoBackground& fano,
                        double* detuning_at_min = nullptr);

// Numeric full width at half depth of the weak-drive Fano dip.
double fano_dip_width_ghz(const EmitterParams& emitter, const FanoBackground& fano);

}  // namespace wgspec
