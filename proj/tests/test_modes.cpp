#include "wgspec/modes.hpp"

#include <doctest.h>

#include <cmath>

using namespace wgspec;

namespace {

constexpr std::complex<double> kI{0.0, 1.0};
constexpr std::size_t kSamples = 1024;
constexpr double kSpacing = 10.0;  // nm

double bin_frequency(int bin) { return 2.0 * M_PI * bin / (kSamples * kSpacing); }

// propagating-mode line: sum of c_m * i * exp(i k_m (z - z0)); the field at
// the source carries i * (sum of amplitudes) for a lossless guide
ModeFieldLine make_line(const std::vector<std::pair<double, double>>& modes,
                        double dipole_im = -1.0) {
    ModeFieldLine line;
    double amplitude_sum = 0.0;
    for (const auto& [k, c] : modes) amplitude_sum += c;
    line.dipole_z_nm = 0.0;
    line.frequency_thz = 325.7;
    line.dipole_value = kI * (dipole_im > 0.0 ? dipole_im : amplitude_sum);
    for (std::size_t i = 0; i < kSamples; ++i) {
        const double z = static_cast<double>(i) * kSpacing;
        std::complex<double> field{0.0, 0.0};
        for (const auto& [k, c] : modes) field += c * kI * std::exp(kI * k * z);
        line.z_nm.push_back(z);
        line.ex.push_back(field);
    }
    return line;
}

// window covers the full line: the dipole sits far enough to the left
void mark_far_field(ModeFieldLine& line, double k_smallest) {
    line.dipole_z_nm = -5.0 * (2.0 * M_PI / k_smallest) - 1.0;
}

}  // namespace

TEST_CASE("single guided mode carries all the coupling") {
    const double k0 = bin_frequency(40);
    auto line = make_line({{k0, 1.0}});
    mark_far_field(line, k0);
    const std::vector<ModeBand> bands = {{k0, 10.0 * bin_frequency(1), "TE0"}};

    const auto betas = beta_per_mode(line, bands);
    REQUIRE(betas.size() == 1);
    CHECK(std::abs(betas[0].beta - 1.0) < 1e-6);
    CHECK_FALSE(betas[0].window_warning);
}

TEST_CASE("mode with zero amplitude at the emitter does not couple") {
    const double k0 = bin_frequency(40), k1 = bin_frequency(60), k2 = bin_frequency(80);
    auto line = make_line({{k0, 0.5}, {k2, 0.5}});
    mark_far_field(line, k0);
    const std::vector<ModeBand> bands = {
        {k0, 4.0 * bin_frequency(1), "TE0"},
        {k1, 4.0 * bin_frequency(1), "TE1"},
        {k2, 4.0 * bin_frequency(1), "TE2"},
    };
    const auto betas = beta_per_mode(line, bands);
    REQUIRE(betas.size() == 3);
    CHECK(std::abs(betas[0].beta - 0.5) < 1e-6);
    CHECK(betas[1].beta < 1e-10);   // antisymmetric mode at the symmetric point
    CHECK(std::abs(betas[2].beta - 0.5) < 1e-6);

    double beta_sum = 0.0;
    for (const auto& b : betas) beta_sum += b.beta;
    CHECK(beta_sum <= 1.0 + 1e-6);
}

TEST_CASE("beta is reduced against the total radiated power") {
    // one mode of amplitude 0.6 with total emission Im = 1: beta = 0.6
    const double k0 = bin_frequency(50);
    auto line = make_line({{k0, 0.6}}, 1.0);
    mark_far_field(line, k0);
    const auto betas = beta_per_mode(line, {{k0, 6.0 * bin_frequency(1), "TE0"}});
    CHECK(std::abs(betas[0].beta - 0.6) < 1e-6);
}

TEST_CASE("mode filter is the identity on its own band") {
    const double k0 = bin_frequency(40);
    const auto line = make_line({{k0, 0.8}});
    const ModeBand band{k0, 5.0 * bin_frequency(1), "TE0"};
    const auto filtered = mode_filter(line, band);
    double worst = 0.0;
    for (std::size_t i = 0; i < line.ex.size(); ++i)
        worst = std::max(worst, std::abs(filtered.ex[i] - line.ex[i]));
    CHECK(worst < 1e-10);
}

TEST_CASE("mode filter separates a two-mode superposition") {
    const double k0 = bin_frequency(40), k2 = bin_frequency(80);
    const auto line = make_line({{k0, 0.7}, {k2, 0.3}});
    const auto component0 = mode_filter(line, {k0, 8.0 * bin_frequency(1), "TE0"});
    const auto component2 = mode_filter(line, {k2, 8.0 * bin_frequency(1), "TE2"});

    const auto pure0 = make_line({{k0, 0.7}});
    const auto pure2 = make_line({{k2, 0.3}});
    double worst = 0.0;
    for (std::size_t i = 0; i < line.ex.size(); ++i) {
        worst = std::max(worst, std::abs(component0.ex[i] - pure0.ex[i]));
        worst = std::max(worst, std::abs(component2.ex[i] - pure2.ex[i]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("an empty band filters to the zero line") {
    const double k0 = bin_frequency(40);
    const auto line = make_line({{k0, 1.0}});
    const auto filtered = mode_filter(line, {bin_frequency(200), 4.0 * bin_frequency(1), "hi"});
    for (const auto& v : filtered.ex) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("band energies partition the total") {
    // include an off-bin component so spectral leakage spreads across bins
    const double k0 = bin_frequency(40);
    const double k_offgrid = bin_frequency(80) * 1.003;
    const auto line = make_line({{k0, 0.7}, {k_offgrid, 0.4}});
    const std::vector<ModeBand> bands = {
        {k0, 5.0 * bin_frequency(1), "TE0"},
        {k_offgrid, 5.0 * bin_frequency(1), "TE2"},
    };
    const auto partition = partition_energy(line, bands);
    const double reassembled =
        partition.band_energy[0] + partition.band_energy[1] + partition.remainder;
    CHECK(std::abs(reassembled - partition.total) <= 1e-10 * partition.total);
    CHECK(partition.band_energy[0] > 0.0);
    CHECK(partition.band_energy[1] > 0.0);
}

TEST_CASE("band validation") {
    const double k0 = bin_frequency(40);
    const auto line = make_line({{k0, 1.0}});
    // overlapping bands
    CHECK_THROWS_AS(partition_energy(line, {{k0, 0.01, "a"}, {k0 + 0.005, 0.01, "b"}}),
                    std::invalid_argument);
    // beyond the resolvable range
    CHECK_THROWS_AS(mode_filter(line, {M_PI / kSpacing, 0.01, "nyquist"}),
                    std::invalid_argument);
    // degenerate width
    CHECK_THROWS_AS(mode_filter(line, {k0, 0.0, "flat"}), std::invalid_argument);
}

TEST_CASE("field line validation") {
    auto line = make_line({{bin_frequency(40), 1.0}});
    CHECK_NOTHROW(line.validate());

    auto short_line = line;
    short_line.z_nm.resize(32);
    short_line.ex.resize(32);
    CHECK_THROWS_AS(short_line.validate(), std::invalid_argument);

    auto uneven = line;
    uneven.z_nm[100] += 1.0;
    CHECK_THROWS_AS(uneven.validate(), std::invalid_argument);
}

TEST_CASE("short far-field window raises the warning flag") {
    // a long-wavelength band leaves fewer than 5 wavelengths in the window
    const double k_long = bin_frequency(3);
    auto line = make_line({{k_long, 1.0}});
    line.dipole_z_nm = 0.0;  // the window begins 5 wavelengths after the dipole
    const auto betas = beta_per_mode(line, {{k_long, bin_frequency(1), "TE0"}});
    CHECK(betas[0].window_warning);
}

TEST_CASE("dipole radiated power") {
    CHECK(dipole_radiated_power({3.0, 0.0}, 325.7) == 0.0);
    const double p1 = dipole_radiated_power({0.0, 1.0}, 325.7);
    const double p2 = dipole_radiated_power({0.0, 2.0}, 325.7);
    CHECK(p1 == doctest::Approx(0.5 * 2.0 * M_PI * 325.7));
    CHECK(p2 == doctest::Approx(2.0 * p1));
    CHECK_THROWS_WITH_AS(dipole_radiated_power({0.0, -0.1}, 325.7),
                         doctest::Contains("unphysical field sample"), std::domain_error);
}

TEST_CASE("purcell factor") {
    CHECK(purcell_factor({0.2, 0.9}, {0.2, 0.9}) == doctest::Approx(1.0));
    // enhancement at the waveguide center and across the displacement scan
    CHECK(purcell_factor({0.0, 1.65}, {0.0, 1.0}) == doctest::Approx(1.65));
    CHECK(purcell_factor({0.0, 1.4}, {0.0, 1.0}) == doctest::Approx(1.4));
    CHECK(purcell_factor({0.0, 1.75}, {0.0, 1.0}) == doctest::Approx(1.75));
    // homogeneous of degree zero under a common rescale
    CHECK(purcell_factor({0.0, 1.65e3}, {0.0, 1.0e3}) == doctest::Approx(1.65));
    CHECK_THROWS_AS(purcell_factor({0.0, 1.0}, {0.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(purcell_factor({0.0, -1.0}, {0.0, 1.0}), std::domain_error);
}

TEST_CASE("k spectrum diagnostic locates the mode") {
    const double k0 = bin_frequency(40);
    const auto line = make_line({{k0, 1.0}});
    const auto spectrum = k_spectrum(line, 4);
    double best_k = 0.0, best_power = -1.0;
    for (const auto& [k, power] : spectrum)
        if (power > best_power) {
            best_power = power;
            best_k = k;
        }
    CHECK(best_k == doctest::Approx(k0).epsilon(1e-9));
}
