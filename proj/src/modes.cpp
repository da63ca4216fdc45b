#include "wgspec/modes.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace wgspec {

namespace {

// kissfft plan bookkeeping inside Eigen::FFT is not thread safe; transforms
// are serialized here (they are cheap next to the fits around them).
std::mutex fft_mutex;

std::vector<std::complex<double>> fft_forward(const std::vector<std::complex<double>>& in) {
    std::scoped_lock lock(fft_mutex);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> out;
    fft.fwd(out, in);
    return out;
}

std::vector<std::complex<double>> fft_inverse(const std::vector<std::complex<double>>& in) {
    std::scoped_lock lock(fft_mutex);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> out;
    fft.inv(out, in);
    return out;
}

// signed spatial frequency of bin j for an n-point transform
double bin_k(std::size_t j, std::size_t n, double dz) {
    const double f = static_cast<double>(j) / static_cast<double>(n);
    const double wrapped = f <= 0.5 ? f : f - 1.0;
    return 2.0 * M_PI * wrapped / dz;
}

bool in_band(double k, const ModeBand& band) {
    return k >= band.k_center - band.k_halfwidth && k <= band.k_center + band.k_halfwidth;
}

}  // namespace

void ModeFieldLine::validate() const {
    if (z_nm.size() != ex.size())
        throw std::invalid_argument("ModeFieldLine: position and field lengths differ");
    if (z_nm.size() < 64)
        throw std::invalid_argument("ModeFieldLine: needs at least 64 samples, got " +
                                    std::to_string(z_nm.size()));
    const double dz = z_nm[1] - z_nm[0];
    if (!(dz > 0.0)) throw std::invalid_argument("ModeFieldLine: positions must increase");
    for (std::size_t i = 1; i < z_nm.size(); ++i)
        if (std::abs(z_nm[i] - z_nm[i - 1] - dz) > 1e-6 * dz)
            throw std::invalid_argument("ModeFieldLine: non-uniform spacing at index " +
                                        std::to_string(i));
    for (const auto& v : ex)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("ModeFieldLine: non-finite field sample");
}

double ModeFieldLine::spacing_nm() const { return z_nm[1] - z_nm[0]; }

void validate_bands(const std::vector<ModeBand>& bands, double spacing_nm) {
    const double k_nyquist = M_PI / spacing_nm;
    for (std::size_t i = 0; i < bands.size(); ++i) {
        const auto& b = bands[i];
        if (!(b.k_halfwidth > 0.0))
            throw std::invalid_argument("ModeBand '" + b.label + "': halfwidth must be positive");
        if (std::abs(b.k_center) + b.k_halfwidth > k_nyquist)
            throw std::invalid_argument("ModeBand '" + b.label +
                                        "': band extends beyond the resolvable k range");
        for (std::size_t j = 0; j < i; ++j) {
            const auto& a = bands[j];
            if (std::abs(a.k_center - b.k_center) < a.k_halfwidth + b.k_halfwidth)
                throw std::invalid_argument("ModeBands '" + a.label + "' and '" + b.label +
                                            "' overlap");
        }
    }
}

double dipole_radiated_power(std::complex<double> dipole_value, double frequency_thz) {
    if (!std::isfinite(dipole_value.real()) || !std::isfinite(dipole_value.imag()) ||
        !std::isfinite(frequency_thz) || frequency_thz <= 0.0)
        throw std::domain_error("dipole_radiated_power: inputs must be finite, frequency positive");
    if (dipole_value.imag() < 0.0)
        throw std::domain_error("dipole_radiated_power: unphysical field sample (Im < 0)");
    const double omega = 2.0 * M_PI * frequency_thz;
    return 0.5 * omega * dipole_value.imag();
}

double purcell_factor(std::complex<double> nano_dipole_value,
                      std::complex<double> hom_dipole_value) {
    if (!(nano_dipole_value.imag() > 0.0) || !(hom_dipole_value.imag() > 0.0))
        throw std::domain_error(
            "purcell_factor: both reference fields need a positive imaginary part");
    return nano_dipole_value.imag() / hom_dipole_value.imag();
}

ModeFieldLine mode_filter(const ModeFieldLine& line, const ModeBand& band) {
    line.validate();
    validate_bands({band}, line.spacing_nm());

    auto spectrum = fft_forward(line.ex);
    const std::size_t n = spectrum.size();
    const double dz = line.spacing_nm();
    for (std::size_t j = 0; j < n; ++j)
        if (!in_band(bin_k(j, n, dz), band)) spectrum[j] = 0.0;

    ModeFieldLine out = line;
    out.ex = fft_inverse(spectrum);
    return out;
}

EnergyPartition partition_energy(const ModeFieldLine& line,
                                 const std::vector<ModeBand>& bands) {
    line.validate();
    validate_bands(bands, line.spacing_nm());

    const auto spectrum = fft_forward(line.ex);
    const std::size_t n = spectrum.size();
    const double dz = line.spacing_nm();

    EnergyPartition out;
    out.band_energy.assign(bands.size(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double k = bin_k(j, n, dz);
        const double e = std::norm(spectrum[j]) / static_cast<double>(n);
        bool claimed = false;
        for (std::size_t b = 0; b < bands.size(); ++b) {
            if (in_band(k, bands[b])) {
                out.band_energy[b] += e;
                claimed = true;
                break;
            }
        }
        if (!claimed) out.remainder += e;
    }
    for (const auto& v : line.ex) out.total += std::norm(v);
    return out;
}

std::vector<ModeBeta> beta_per_mode(const ModeFieldLine& line,
                                    const std::vector<ModeBand>& bands,
                                    const ModeAnalysisOptions& options) {
    line.validate();
    validate_bands(bands, line.spacing_nm());
    if (bands.empty()) throw std::invalid_argument("beta_per_mode: no bands given");
    if (!(line.dipole_value.imag() > 0.0))
        throw std::domain_error("beta_per_mode: unphysical field sample at the dipole (Im <= 0)");

    const double dz = line.spacing_nm();
    std::vector<ModeBeta> out;
    out.reserve(bands.size());

    for (const auto& band : bands) {
        if (!(band.k_center > 0.0))
            throw std::invalid_argument("beta_per_mode: band '" + band.label +
                                        "' needs a positive propagation constant");
        const double wavelength = 2.0 * M_PI / band.k_center;
        const double z_start =
            line.dipole_z_nm + options.far_field_exclusion_wavelengths * wavelength;

        std::size_t first = 0;
        while (first < line.z_nm.size() && line.z_nm[first] < z_start) ++first;

        ModeBeta entry;
        entry.label = band.label;

        const std::size_t count = line.z_nm.size() - first;
        if (count < 16) {
            entry.window_warning = true;
            entry.beta = 0.0;
            out.push_back(entry);
            continue;
        }
        const double window_span = line.z_nm.back() - line.z_nm[first];
        if (window_span < 5.0 * wavelength) entry.window_warning = true;

        std::vector<std::complex<double>> window(line.ex.begin() +
                                                     static_cast<std::ptrdiff_t>(first),
                                                 line.ex.end());
        const auto spectrum = fft_forward(window);
        const std::size_t n = spectrum.size();

        // band amplitude via the spectral energy: the RMS of a propagating
        // mode equals its envelope amplitude
        double band_power = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (in_band(bin_k(j, n, dz), band)) band_power += std::norm(spectrum[j]);
        const double amplitude = std::sqrt(band_power) / static_cast<double>(n);

        entry.beta = amplitude / line.dipole_value.imag();
        out.push_back(entry);
    }
    return out;
}

std::vector<std::pair<double, double>> k_spectrum(const ModeFieldLine& line,
                                                  int zero_pad_factor) {
    line.validate();
    if (zero_pad_factor < 1) throw std::invalid_argument("k_spectrum: pad factor must be >= 1");

    std::vector<std::complex<double>> padded = line.ex;
    padded.resize(line.ex.size() * static_cast<std::size_t>(zero_pad_factor), {0.0, 0.0});
    const auto spectrum = fft_forward(padded);
    const std::size_t n = spectrum.size();
    const double dz = line.spacing_nm();

    std::vector<std::pair<double, double>> out;
    out.reserve(n / 2 + 1);
    for (std::size_t j = 0; j <= n / 2; ++j)
        out.emplace_back(bin_k(j, n, dz), std::norm(spectrum[j]));
    return out;
}

}  // namespace wgspec
