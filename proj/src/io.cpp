#include "wgspec/io.hpp"

#include "wgspec/version.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wgspec {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& text, const std::filesystem::path& path,
                    std::size_t line_number) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(text, &consumed);
        while (consumed < text.size() && std::isspace(static_cast<unsigned char>(text[consumed])))
            ++consumed;
        if (consumed != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                 ": malformed numeric field '" + text + "'");
    }
}

std::string trimmed(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;     // parsed numeric rows
    std::vector<std::size_t> line_numbers;     // 1-based source lines
};

CsvTable load_csv(const std::filesystem::path& path, std::size_t expected_min_cols,
                  std::size_t expected_max_cols) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");

    CsvTable table;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trimmed(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (table.header.empty()) {
            for (auto& f : fields) table.header.push_back(trimmed(f));
            if (table.header.size() < expected_min_cols ||
                table.header.size() > expected_max_cols)
                throw std::runtime_error(path.string() +
                                         ": unexpected column count in header");
            continue;
        }
        if (fields.size() != table.header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                     ": expected " + std::to_string(table.header.size()) +
                                     " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double(trimmed(f), path, line_number));
        for (const double v : row)
            if (!std::isfinite(v))
                throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                         ": non-finite value rejected");
        table.rows.push_back(std::move(row));
        table.line_numbers.push_back(line_number);
    }
    if (table.header.empty())
        throw std::runtime_error(path.string() + ": missing header row");
    return table;
}

}  // namespace

Spectrum load_spectrum(const std::filesystem::path& path, Spectrum::XKind x_kind) {
    const CsvTable table = load_csv(path, 2, 3);
    if (table.header[0] != "x" || table.header[1] != "y" ||
        (table.header.size() == 3 && table.header[2] != "sigma"))
        throw std::runtime_error(path.string() + ": expected header 'x,y[,sigma]', got '" +
                                 table.header[0] + ",...'");

    Spectrum s;
    s.x_kind = x_kind;
    const bool with_sigma = table.header.size() == 3;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        s.x.push_back(row[0]);
        s.y.push_back(row[1]);
        if (with_sigma) s.sigma.push_back(row[2]);
        if (i > 0 && s.x[i] <= s.x[i - 1])
            throw std::runtime_error(path.string() + ":" +
                                     std::to_string(table.line_numbers[i]) +
                                     ": x values must be strictly increasing");
    }
    s.validate();
    return s;
}

void save_spectrum(const std::filesystem::path& path, const Spectrum& spectrum) {
    spectrum.validate();
    std::ostringstream out;
    out.precision(17);
    out << (spectrum.has_sigma() ? "x,y,sigma\n" : "x,y\n");
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        out << spectrum.x[i] << ',' << spectrum.y[i];
        if (spectrum.has_sigma()) out << ',' << spectrum.sigma[i];
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

FieldLineSamples load_field_line(const std::filesystem::path& path) {
    const CsvTable table = load_csv(path, 3, 3);
    if (table.header[0] != "z_nm" || table.header[1] != "Ex_re" || table.header[2] != "Ex_im")
        throw std::runtime_error(path.string() + ": expected header 'z_nm,Ex_re,Ex_im'");
    FieldLineSamples out;
    for (const auto& row : table.rows) {
        out.z_nm.push_back(row[0]);
        out.ex.emplace_back(row[1], row[2]);
    }
    return out;
}

std::vector<std::pair<double, double>> load_calibration_points(
    const std::filesystem::path& path) {
    const CsvTable table = load_csv(path, 2, 2);
    if (table.header[0] != "voltage_V" || table.header[1] != "frequency_GHz")
        throw std::runtime_error(path.string() + ": expected header 'voltage_V,frequency_GHz'");
    std::vector<std::pair<double, double>> out;
    for (const auto& row : table.rows) out.emplace_back(row[0], row[1]);
    return out;
}

void GridSpec::validate() const {
    if (!(x_min < x_max)) throw std::invalid_argument("GridSpec: x_min must be below x_max");
    if (points < 8) throw std::invalid_argument("GridSpec: needs at least 8 points");
}

void NoiseSpec::validate() const {
    if (!(sigma >= 0.0)) throw std::invalid_argument("NoiseSpec: sigma must be non-negative");
    if (generator != "mt19937_64-boxmuller")
        throw std::invalid_argument("NoiseSpec: unknown generator '" + generator +
                                    "' (supported: mt19937_64-boxmuller)");
}

double GaussianSampler::operator()() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // (0,1] uniforms from the top 53 bits keep log() finite
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

Spectrum simulate_spectrum(const SpectrumModelParams& params, const GridSpec& grid,
                           const NoiseSpec& noise) {
    params.validate();
    grid.validate();
    noise.validate();

    Spectrum s;
    s.x_kind = Spectrum::XKind::detuning;
    GaussianSampler gauss(noise.seed);
    for (int i = 0; i < grid.points; ++i) {
        const double x =
            grid.x_min + (grid.x_max - grid.x_min) * i / static_cast<double>(grid.points - 1);
        double y = evaluate_spectrum_model(params, x);
        if (noise.sigma > 0.0) y += noise.sigma * gauss();
        s.x.push_back(x);
        s.y.push_back(y);
    }
    if (noise.sigma > 0.0) s.sigma.assign(s.x.size(), noise.sigma);
    return s;
}

std::string digest_bytes(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return std::string("fnv1a64:") + buf;
}

std::string digest_file(const std::filesystem::path& path) {
    return digest_bytes(read_text(path));
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) {
            std::filesystem::remove(tmp);
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

nlohmann::json make_record_header(std::string_view kind, std::string_view input_digest,
                                  std::string_view config_digest,
                                  std::string_view timestamp) {
    json record;
    record["record_kind"] = std::string(kind);
    record["software_version"] = version_string;
    record["timestamp"] = std::string(timestamp);
    record["input_digest"] = std::string(input_digest);
    record["config_digest"] = std::string(config_digest);
    return record;
}

nlohmann::json fit_result_to_json(const FitResult& fit) {
    json parameters = json::object();
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        parameters[fit.names[i]] = {{"value", fit.params[i]},
                                    {"sigma", fit.uncertainty(fit.names[i])}};
    }
    json out;
    out["parameters"] = parameters;
    out["chi_squared"] = fit.chi_squared;
    out["iterations"] = fit.iterations;
    out["converged"] = fit.converged;
    out["residuals"] = fit.residuals;
    out["warnings"] = fit.warnings;
    return out;
}

void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& value) {
    write_text_atomic(path, value.dump(2) + "\n");
}

nlohmann::json load_json(const std::filesystem::path& path) {
    return json::parse(read_text(path));
}

}  // namespace wgspec
