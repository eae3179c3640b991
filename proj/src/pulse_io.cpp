#include "pgfrog/pulse_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "pgfrog/error.hpp"

namespace pgfrog {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  if (first < last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw Error(Errc::ParseError, "not a number: '" + s + "'");
  return v;
}

std::string pulse_to_json(const PulseRecord& record) {
  const auto& f = record.field;
  json re = json::array(), im = json::array();
  for (const auto& s : f.samples()) {
    re.push_back(format_double(s.real()));
    im.push_back(format_double(s.imag()));
  }
  json j = {{"n", f.size()}, {"dt_fs", format_double(f.grid().dt)}, {"samples_re", re}, {"samples_im", im}};
  if (f.grid().t0 != 0.0) j["t0_fs"] = format_double(f.grid().t0);
  if (record.seed) j["seed"] = *record.seed;
  if (record.target_tbp) j["target_tbp"] = format_double(*record.target_tbp);
  return j.dump(1) + "\n";
}

namespace {

double number_field(const json& v) {
  if (v.is_string()) return parse_double(v.get<std::string>());
  if (v.is_number()) return v.get<double>();
  throw Error(Errc::ParseError, "expected a number or numeric string");
}

}  // namespace

PulseRecord pulse_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const auto n = j.at("n").get<std::size_t>();
    const double dt = number_field(j.at("dt_fs"));
    const double t0 = j.contains("t0_fs") ? number_field(j.at("t0_fs")) : 0.0;
    const auto& re = j.at("samples_re");
    const auto& im = j.at("samples_im");
    if (re.size() != n || im.size() != n) throw Error(Errc::ParseError, "sample count does not match n");
    std::vector<cplx> samples(n);
    for (std::size_t i = 0; i < n; ++i) samples[i] = {number_field(re[i]), number_field(im[i])};
    PulseRecord r{ComplexField(TimeGrid::make(n, dt, t0), std::move(samples)), std::nullopt, std::nullopt};
    if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("target_tbp")) r.target_tbp = number_field(j.at("target_tbp"));
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("pulse JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidArgument) throw Error(Errc::ParseError, e.what());
    throw;
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

void save_pulse(const std::filesystem::path& path, const PulseRecord& record) {
  write_text_file(path, pulse_to_json(record));
}

PulseRecord load_pulse(const std::filesystem::path& path) { return pulse_from_json(read_text_file(path)); }

}  // namespace pgfrog
