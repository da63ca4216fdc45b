#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

// Mode-resolved coupling analysis from a sampled field line along the
// waveguide axis: spatial-frequency filtering separates the guided modes, the
// imaginary field at the dipole gives the radiated power reference.

namespace wgspec {

struct ModeFieldLine {
    std::vector<double> z_nm;                     // uniformly spaced positions
    std::vector<std::complex<double>> ex;         // dominant-polarization field samples
    std::complex<double> dipole_value{0.0, 0.0};  // field at the dipole location
    double dipole_z_nm = 0.0;
    double frequency_thz = 0.0;

    void validate() const;     // uniform spacing, >= 64 samples
    double spacing_nm() const; // grid step
};

struct ModeBand {
    double k_center = 0.0;      // rad/nm
    double k_halfwidth = 0.0;   // > 0
    std::string label;
};

// throws on overlapping bands or a band beyond the resolvable k range
void validate_bands(const std::vector<ModeBand>& bands, double spacing_nm);

// Relative power radiated by a unit dipole: (omega/2) Im(Ex at the dipole).
// A negative imaginary part is unphysical for emission and is rejected.
double dipole_radiated_power(std::complex<double> dipole_value, double frequency_thz);

// Ratio of emitted power in the structure to the same dipole in a homogeneous
// medium, from the imaginary field at the source.
double purcell_factor(std::complex<double> nano_dipole_value,
                      std::complex<double> hom_dipole_value);

// Band-pass the field line in the spatial-frequency domain (full-resolution
// transform, so the band partition is exact).
ModeFieldLine mode_filter(const ModeFieldLine& line, const ModeBand& band);

struct EnergyPartition {
    std::vector<double> band_energy;   // per input band
    double remainder = 0.0;            // energy outside every band
    double total = 0.0;                // time-domain sum |Ex|^2
};

EnergyPartition partition_energy(const ModeFieldLine& line,
                                 const std::vector<ModeBand>& bands);

struct ModeAnalysisOptions {
    double far_field_exclusion_wavelengths = 5.0;   // skip |z - z0| below this many
};

struct ModeBeta {
    std::string label;
    double beta = 0.0;
    bool window_warning = false;   // far-field window shorter than 5 wavelengths
};

// Per-mode coupling fractions: band amplitude in the far-field window over
// the imaginary field at the dipole.
std::vector<ModeBeta> beta_per_mode(const ModeFieldLine& line,
                                    const std::vector<ModeBand>& bands,
                                    const ModeAnalysisOptions& options = {});

// |spectrum|^2 vs spatial frequency with 4x zero padding, for locating band
// edges; returns (k, power) pairs over the positive-k half.
std::vector<std::pair<double, double>> k_spectrum(const ModeFieldLine& line,
                                                  int zero_pad_factor = 4);

}  // namespace wgspec
