#include "pgfrog/trace_io.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "pgfrog/error.hpp"
#include "pgfrog/pulse_io.hpp"

namespace pgfrog {

using nlohmann::json;

std::string trace_to_text(const FrogTrace& trace) {
  std::string out = "FROG-PG 1 " + std::to_string(trace.n) + " " + std::to_string(trace.n) + " " +
                    format_double(trace.dtau) + " " + format_double(trace.domega) + "\n";
  for (std::size_t i = 0; i < trace.n; ++i) {
    for (std::size_t j = 0; j < trace.n; ++j) {
      if (j) out += ' ';
      out += format_double(trace.at(i, j));
    }
    out += '\n';
  }
  return out;
}

FrogTrace trace_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string magic, version, token;
  std::size_t rows = 0, cols = 0;
  in >> magic >> version >> rows >> cols;
  if (!in || magic != "FROG-PG" || version != "1") throw Error(Errc::ParseError, "not a FROG-PG v1 trace");
  if (rows != cols) throw Error(Errc::ParseError, "trace must be square");
  std::string dtau_s, domega_s;
  in >> dtau_s >> domega_s;
  if (!in) throw Error(Errc::ParseError, "truncated trace header");
  const double dtau = parse_double(dtau_s), domega = parse_double(domega_s);
  if (!is_power_of_two(rows) || rows < 16 || !(dtau > 0.0) || !(domega > 0.0))
    throw Error(Errc::ParseError, "invalid trace geometry");
  FrogTrace trace = FrogTrace::zeros(rows, dtau, domega);
  for (auto& v : trace.values) {
    if (!(in >> token)) throw Error(Errc::ParseError, "truncated trace data");
    v = parse_double(token);
    if (!std::isfinite(v) || v < 0.0) throw Error(Errc::ParseError, "trace values must be finite and >= 0");
  }
  if (in >> token) throw Error(Errc::ParseError, "trailing data after trace");
  if (!(trace.peak() > 0.0)) throw Error(Errc::ParseError, "trace is all zero");
  return trace.peak_normalized();
}

void save_trace(const std::filesystem::path& path, const FrogTrace& trace) {
  write_text_file(path, trace_to_text(trace));
}

FrogTrace load_trace(const std::filesystem::path& path) { return trace_from_text(read_text_file(path)); }

std::string metadata_to_json(const TraceMetadata& meta) {
  json j = {{"provenance", meta.provenance}};
  if (meta.seed) j["seed"] = *meta.seed;
  if (meta.noise)
    j["noise"] = {{"multiplicative_fraction", format_double(meta.noise->multiplicative_fraction)},
                  {"additive_fraction", format_double(meta.noise->additive_fraction)},
                  {"seed", meta.noise->seed}};
  return j.dump(1) + "\n";
}

TraceMetadata metadata_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    TraceMetadata meta;
    meta.provenance = j.value("provenance", std::string());
    if (j.contains("seed")) meta.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      meta.noise = NoiseSpec{parse_double(n.at("multiplicative_fraction").get<std::string>()),
                             parse_double(n.at("additive_fraction").get<std::string>()),
                             n.at("seed").get<std::uint64_t>()};
    }
    return meta;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("trace metadata: ") + e.what());
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& trace_path) {
  return std::filesystem::path(trace_path.string() + ".json");
}

void save_trace_with_metadata(const std::filesystem::path& path, const FrogTrace& trace, const TraceMetadata& meta) {
  save_trace(path, trace);
  write_text_file(sidecar_path(path), metadata_to_json(meta));
}

void save_spectrum(const std::filesystem::path& csv_path, const Spectrum& spectrum,
                   const SpectrumRetrievalOptions& options, const std::string& trace_file) {
  std::string csv = "omega_rad_per_fs,intensity\n";
  for (std::size_t k = 0; k < spectrum.size(); ++k)
    csv += format_double(spectrum.omega(k)) + "," + format_double(spectrum.intensity[k]) + "\n";
  write_text_file(csv_path, csv);
  json meta = {{"p", options.p}, {"delta", options.delta}, {"trace_file", trace_file}};
  write_text_file(std::filesystem::path(csv_path.string() + ".json"), meta.dump(1) + "\n");
}

Spectrum load_spectrum_csv(const std::filesystem::path& csv_path) {
  std::istringstream in(read_text_file(csv_path));
  std::string line;
  if (!std::getline(in, line) || line != "omega_rad_per_fs,intensity")
    throw Error(Errc::ParseError, "unexpected spectrum CSV header");
  std::vector<double> omega, intensity;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(Errc::ParseError, "malformed spectrum row");
    omega.push_back(parse_double(line.substr(0, comma)));
    intensity.push_back(parse_double(line.substr(comma + 1)));
  }
  if (omega.size() < 16 || !is_power_of_two(omega.size()))
    throw Error(Errc::ParseError, "spectrum length must be a power of two >= 16");
  const double dw = omega[1] - omega[0];
  const auto n = omega.size();
  const TimeGrid grid = TimeGrid::make(n, 2.0 * std::numbers::pi / (static_cast<double>(n) * dw));
  return Spectrum{grid, std::move(intensity), {}};
}

}  // namespace pgfrog
