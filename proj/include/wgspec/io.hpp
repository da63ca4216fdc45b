#pragma once

#include "wgspec/fit.hpp"
#include "wgspec/lineshape.hpp"
#include "wgspec/modes.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

// File formats and synthetic-data generation. Spectra are CSV with header
// `x,y[,sigma]`; field lines are CSV with header `z_nm,Ex_re,Ex_im`; results
// are JSON records. All writes go through a temporary file and rename so an
// error never leaves a truncated output behind.

namespace wgspec {

Spectrum load_spectrum(const std::filesystem::path& path, Spectrum::XKind x_kind);
void save_spectrum(const std::filesystem::path& path, const Spectrum& spectrum);

struct FieldLineSamples {
    std::vector<double> z_nm;
    std::vector<std::complex<double>> ex;
};
FieldLineSamples load_field_line(const std::filesystem::path& path);

// CSV with header `voltage_V,frequency_GHz` for the axis calibration.
std::vector<std::pair<double, double>> load_calibration_points(
    const std::filesystem::path& path);

struct GridSpec {
    double x_min = -5.0;
    double x_max = 5.0;
    int points = 201;

    void validate() const;
};

struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string generator = "mt19937_64-boxmuller";

    void validate() const;
};

// Seeded standard-normal stream; Box-Muller over mt19937_64 so the sequence
// does not depend on the standard library's distribution implementation.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}
    double operator()();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Forward-model samples on the grid plus seeded Gaussian noise; deterministic
// for a fixed seed.
Spectrum simulate_spectrum(const SpectrumModelParams& params, const GridSpec& grid,
                           const NoiseSpec& noise);

// FNV-1a 64-bit content digests, hex encoded.
std::string digest_bytes(std::string_view bytes);
std::string digest_file(const std::filesystem::path& path);

// Write-then-rename; creates parent directories.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

std::string read_text(const std::filesystem::path& path);

// Skeleton result record: kind, software version, timestamp, digests. The
// caller adds command-specific payload before writing.
nlohmann::json make_record_header(std::string_view kind, std::string_view input_digest,
                                  std::string_view config_digest,
                                  std::string_view timestamp);

// Fitted parameters with 1-sigma uncertainties, chi^2, convergence flags,
// residuals; used as the `fit` payload of result records.
nlohmann::json fit_result_to_json(const FitResult& fit);

void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace wgspec
