#include "wgspec/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wgspec {

namespace {

constexpr std::complex<double> kImag{0.0, 1.0};

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void EmitterParams::validate() const {
    if (!finite(linewidth_ghz) || linewidth_ghz <= 0.0)
        throw std::domain_error("EmitterParams: linewidth must be positive, got " +
                                std::to_string(linewidth_ghz));
    if (!finite(dephasing_ghz) || dephasing_ghz < 0.0)
        throw std::domain_error("EmitterParams: dephasing must be non-negative, got " +
                                std::to_string(dephasing_ghz));
    if (!finite(beta) || beta < 0.0 || beta > 1.0)
        throw std::domain_error("EmitterParams: beta must lie in [0, 1], got " +
                                std::to_string(beta));
}

void FanoBackground::validate() const {
    if (!finite(xi)) throw std::domain_error("FanoBackground: xi must be finite");
}

FanoBackground FanoBackground::from_cavity(double delta_ghz, double kappa_ghz) {
    if (!finite(delta_ghz) || !finite(kappa_ghz) || kappa_ghz <= 0.0)
        throw std::domain_error("FanoBackground: cavity linewidth kappa must be positive");
    return FanoBackground{-delta_ghz / kappa_ghz};
}

DrivePoint DrivePoint::from_saturation(double s) {
    DrivePoint d;
    d.saturation = s;
    d.validate();
    return d;
}

DrivePoint DrivePoint::from_photon_number(double n_tau) {
    DrivePoint d;
    d.photon_number = n_tau;
    d.validate();
    return d;
}

void DrivePoint::validate() const {
    if (!finite(saturation) || saturation < 0.0)
        throw std::domain_error("DrivePoint: saturation must be non-negative");
    if (photon_number && (!finite(*photon_number) || *photon_number < 0.0))
        throw std::domain_error("DrivePoint: photon number must be non-negative");
    if (input_power_w && (!finite(*input_power_w) || *input_power_w < 0.0))
        throw std::domain_error("DrivePoint: input power must be non-negative");
}

double DrivePoint::resolve_photon_number(const EmitterParams& emitter) const {
    if (photon_number) return *photon_number;
    if (saturation == 0.0) return 0.0;
    return saturation * critical_photon_number(emitter);
}

void ResidualPeak::validate() const {
    if (!finite(fwhm_ghz) || fwhm_ghz <= 0.0)
        throw std::domain_error("ResidualPeak: width must be positive");
    if (!finite(amplitude) || !finite(center_ghz))
        throw std::domain_error("ResidualPeak: center and amplitude must be finite");
}

void SpectrumModelParams::validate() const {
    emitter.validate();
    fano.validate();
    drive.validate();
    if (!finite(center_ghz)) throw std::domain_error("SpectrumModelParams: center must be finite");
    for (const auto& p : residual_peaks) p.validate();
}

double transmission_on_resonance(const EmitterParams& emitter, double saturation) {
    emitter.validate();
    if (!finite(saturation) || saturation < 0.0)
        throw std::domain_error("transmission_on_resonance: saturation must be non-negative");
    const double gr = emitter.dephasing_ratio();
    return 1.0 + (emitter.beta - 2.0) * emitter.beta / ((1.0 + 2.0 * gr) * (1.0 + saturation));
}

double critical_photon_number(const EmitterParams& emitter) {
    emitter.validate();
    if (emitter.beta == 0.0)
        throw std::domain_error("critical_photon_number: diverges for an uncoupled emitter (beta = 0)");
    const double gr = emitter.dephasing_ratio();
    return (1.0 + 2.0 * gr) / (4.0 * emitter.beta * emitter.beta);
}

double rt_linewidth_ghz(const EmitterParams& emitter, double saturation) {
    emitter.validate();
    if (!finite(saturation) || saturation < 0.0)
        throw std::domain_error("rt_linewidth: saturation must be non-negative");
    return (emitter.linewidth_ghz + 2.0 * emitter.dephasing_ghz) * std::sqrt(1.0 + saturation);
}

std::complex<double> bare_transmission(const FanoBackground& fano) {
    fano.validate();
    return 1.0 / (1.0 + kImag * fano.xi);
}

ScatteringAmplitudes steady_state_amplitudes(const SpectrumModelParams& params,
                                             double detuning_ghz) {
    params.validate();
    if (!finite(detuning_ghz))
        throw std::domain_error("steady_state_amplitudes: detuning must be finite");

    const EmitterParams& em = params.emitter;
    const double gamma = em.linewidth_ghz;
    const double gamma_d = em.dephasing_ghz;
    const double g_wg = em.guided_rate_ghz();
    const double g_rad = em.radiative_rate_ghz();

    const std::complex<double> t0 = bare_transmission(params.fano);
    const double t0_re = t0.real();
    const double t0_sq = std::norm(t0);

    // Dipole response denominator shared by the amplitude and the dipole
    // expectation; stays finite for all beta.
    const std::complex<double> denom =
        gamma + (t0 - 1.0) * em.beta * gamma + 2.0 * (gamma_d - kImag * detuning_ghz);

    // Saturation factor 1 + n_tau/n_c with the critical photon number taken at
    // this detuning and cavity phase. An uncoupled emitter sees no drive.
    double sat_factor = 1.0;
    if (em.beta > 0.0) {
        const double n_tau = params.drive.resolve_photon_number(em);
        if (n_tau > 0.0) {
            const double nc_local = std::norm(denom) * (g_rad + g_wg * t0_re) /
                                    (4.0 * g_wg * g_wg * t0_sq * (g_rad + 2.0 * gamma_d + g_wg * t0_re));
            sat_factor = 1.0 + n_tau / nc_local;
        }
    }

    ScatteringAmplitudes out;
    out.s_z = -0.5 / sat_factor;

    const std::complex<double> emitter_term = em.beta * gamma * t0 * t0 / (sat_factor * denom);
    out.t = t0 - emitter_term;
    out.r = (1.0 - t0) + emitter_term;
    out.s_minus = -2.0 * kImag * std::sqrt(2.0 * g_wg) * t0 * out.s_z / denom;
    out.coherent_loss_fraction = g_rad * std::norm(out.s_minus);
    out.incoherent_fraction =
        1.0 - out.transmitted_fraction() - out.reflected_fraction() - out.coherent_loss_fraction;
    return out;
}

double total_transmission(const SpectrumModelParams& params, double detuning_ghz) {
    const ScatteringAmplitudes amps = steady_state_amplitudes(params, detuning_ghz);
    const double t0_sq = std::norm(bare_transmission(params.fano));
    return (amps.transmitted_fraction() + 0.5 * params.emitter.beta * amps.incoherent_fraction) /
           t0_sq;
}

double fano_transmission(const EmitterParams& emitter, const FanoBackground& fano,
                         double detuning_ghz) {
    emitter.validate();
    fano.validate();
    const double gamma = emitter.linewidth_ghz;
    const double gd = emitter.dephasing_ghz;
    const double beta = emitter.beta;
    const double xi = fano.xi;
    const double g = gamma + 2.0 * gd;
    const double dw2 = 4.0 * detuning_ghz * detuning_ghz;

    const double num = (g * ((beta - 1.0) * (beta - 1.0) * gamma + 2.0 * gd) + dw2) *
                       (1.0 + xi * xi);
    const double side = (beta - 1.0) * gamma - 2.0 * gd;
    const double den = g * g + dw2 + 4.0 * beta * gamma * detuning_ghz * xi +
                       (side * side + dw2) * xi * xi;
    return num / den;
}

double lorentzian_limit_transmission(const EmitterParams& emitter, double detuning_ghz) {
    emitter.validate();
    const double gamma = emitter.linewidth_ghz;
    const double g = gamma + 2.0 * emitter.dephasing_ghz;
    return 1.0 + (emitter.beta - 2.0) * emitter.beta * gamma * g /
                     (g * g + 4.0 * detuning_ghz * detuning_ghz);
}

double quantum_efficiency_bound(double gamma_enhanced_per_ns, double gamma_inhibited_per_ns) {
    if (!finite(gamma_enhanced_per_ns) || !finite(gamma_inhibited_per_ns) ||
        gamma_enhanced_per_ns <= 0.0 || gamma_inhibited_per_ns < 0.0 ||
        gamma_inhibited_per_ns > gamma_enhanced_per_ns)
        throw std::domain_error(
            "quantum_efficiency_bound: requires gamma_enhanced >= gamma_inhibited >= 0");
    return (gamma_enhanced_per_ns - gamma_inhibited_per_ns) / gamma_enhanced_per_ns;
}

double lorentzian_peak(double x, double center, double fwhm, double amplitude) {
    const double u = 2.0 * (x - center) / fwhm;
    return amplitude / (1.0 + u * u);
}

double evaluate_spectrum_model(const SpectrumModelParams& params, double x_ghz) {
    double value = total_transmission(params, x_ghz - params.center_ghz);
    for (const auto& p : params.residual_peaks)
        value += lorentzian_peak(x_ghz, p.center_ghz, p.fwhm_ghz, p.amplitude);
    return value;
}

double fano_dip_minimum(const EmitterParams& emitter, const FanoBackground& fano,
                        double* detuning_at_min) {
    emitter.validate();
    fano.validate();

    const double w0 = emitter.linewidth_ghz + 2.0 * emitter.dephasing_ghz;
    const double span = 6.0 * w0 * (1.0 + std::abs(fano.xi));
    const int n = 4001;
    double best_x = 0.0;
    double best_t = fano_transmission(emitter, fano, 0.0);
    for (int i = 0; i < n; ++i) {
        const double x = -span + 2.0 * span * i / (n - 1);
        const double t = fano_transmission(emitter, fano, x);
        if (t < best_t) {
            best_t = t;
            best_x = x;
        }
    }

    // golden-section polish around the coarse minimum
    const double step = 2.0 * span / (n - 1);
    double a = best_x - step, b = best_x + step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = fano_transmission(emitter, fano, c);
    double fd = fano_transmission(emitter, fano, d);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, w0); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = fano_transmission(emitter, fano, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = fano_transmission(emitter, fano, d);
        }
    }
    const double xm = 0.5 * (a + b);
    const double tm = fano_transmission(emitter, fano, xm);
    if (detuning_at_min) *detuning_at_min = xm;
    return std::min(tm, best_t);
}

namespace {

// innermost crossing of the half-depth level, searched outward from the dip
double half_depth_crossing(const EmitterParams& em, const FanoBackground& fano, double x_min,
                           double half_level, double direction, double step) {
    double prev = x_min;
    double x = x_min;
    for (int i = 0; i < 100000; ++i) {
        prev = x;
        x += direction * step;
        if (fano_transmission(em, fano, x) >= half_level) break;
    }
    // bisect between prev (below level) and x (at/above level)
    double lo = prev, hi = x;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (fano_transmission(em, fano, mid) >= half_level)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double fano_dip_width_ghz(const EmitterParams& emitter, const FanoBackground& fano) {
    double x_min = 0.0;
    const double t_min = fano_dip_minimum(emitter, fano, &x_min);
    const double half = 0.5 * (1.0 + t_min);
    const double step = (emitter.linewidth_ghz + 2.0 * emitter.dephasing_ghz) / 64.0;
    const double right = half_depth_crossing(emitter, fano, x_min, half, +1.0, step);
    const double left = half_depth_crossing(emitter, fano, x_min, half, -1.0, step);
    return right - left;
}

}  // namespace wgspec
