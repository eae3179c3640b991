#include "pgfrog/schedule.hpp"

#include <fstream>
#include <string>

#include "json.hpp"
#include "pgfrog/error.hpp"
#include "pgfrog/pulse.hpp"

namespace pgfrog {

using nlohmann::json;

const char* to_string(GridLevel level) {
  switch (level) {
    case GridLevel::Quarter: return "quarter";
    case GridLevel::Half: return "half";
    case GridLevel::Full: return "full";
  }
  return "?";
}

const LevelSchedule& GridSchedule::level(GridLevel l) const {
  switch (l) {
    case GridLevel::Quarter: return quarter;
    case GridLevel::Half: return half;
    case GridLevel::Full: return full;
  }
  return full;
}

void GridSchedule::validate() const {
  if (!is_power_of_two(n_full) || n_full < 64)
    throw Error(Errc::InvalidArgument, "schedule n must be a power of two >= 64");
  for (const auto* l : {&quarter, &half, &full})
    if (l->num_initial_guesses == 0 || l->iterations == 0)
      throw Error(Errc::InvalidArgument, "schedule counts must be positive");
  if (full.num_initial_guesses != 4)
    throw Error(Errc::InvalidArgument, "the full grid keeps exactly four candidates");
  if (!(criteria.g_cutoff > 0.0) || !(criteria.g_prime_cutoff > 0.0))
    throw Error(Errc::InvalidArgument, "cutoffs must be positive");
}

const std::vector<GridSchedule>& default_schedules() {
  static const std::vector<GridSchedule> table = [] {
    auto row = [](double tbp, std::size_t n, std::size_t igq, std::size_t itq, std::size_t igh,
                  std::size_t ith, double g) {
      GridSchedule s;
      s.tbp_label = tbp;
      s.n_full = n;
      s.quarter = {igq, itq};
      s.half = {igh, ith};
      s.criteria = {g, 0.2};
      return s;
    };
    return std::vector<GridSchedule>{
        row(2.5, 64, 12, 20, 8, 20, 0.0090),     row(5, 128, 12, 25, 8, 20, 0.0080),
        row(10, 256, 20, 25, 12, 25, 0.0070),    row(20, 512, 24, 30, 16, 25, 0.0065),
        row(40, 1024, 28, 35, 16, 30, 0.0045),   row(80, 2048, 36, 40, 24, 35, 0.0035),
        row(100, 4096, 48, 40, 28, 35, 0.0020),
    };
  }();
  return table;
}

GridSchedule schedule_for_size(const std::vector<GridSchedule>& table, std::size_t n) {
  for (const auto& s : table)
    if (s.n_full == n) return s;
  throw Error(Errc::InvalidArgument, "no schedule for n=" + std::to_string(n));
}

GridSchedule default_schedule_for_size(std::size_t n) { return schedule_for_size(default_schedules(), n); }

namespace {

GridSchedule from_json(const json& j) {
  GridSchedule s;
  s.tbp_label = j.at("tbp").get<double>();
  s.n_full = j.at("n").get<std::size_t>();
  s.quarter = {j.at("igs_quarter").get<std::size_t>(), j.at("iters_quarter").get<std::size_t>()};
  s.half = {j.at("igs_half").get<std::size_t>(), j.at("iters_half").get<std::size_t>()};
  s.full = {j.at("igs_full").get<std::size_t>(), j.value("iters_full", std::size_t{10})};
  s.criteria = {j.at("g_cutoff").get<double>(), j.at("g_prime_cutoff").get<double>()};
  s.validate();
  return s;
}

json to_json(const GridSchedule& s) {
  return json{{"tbp", s.tbp_label},
              {"n", s.n_full},
              {"igs_quarter", s.quarter.num_initial_guesses},
              {"iters_quarter", s.quarter.iterations},
              {"igs_half", s.half.num_initial_guesses},
              {"iters_half", s.half.iterations},
              {"igs_full", s.full.num_initial_guesses},
              {"iters_full", s.full.iterations},
              {"g_cutoff", s.criteria.g_cutoff},
              {"g_prime_cutoff", s.criteria.g_prime_cutoff}};
}

}  // namespace

std::vector<GridSchedule> load_schedules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open schedule file " + path.string());
  try {
    const json doc = json::parse(in);
    std::vector<GridSchedule> out;
    if (doc.is_array()) {
      for (const auto& row : doc) out.push_back(from_json(row));
    } else {
      out.push_back(from_json(doc));
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

void save_schedules(const std::filesystem::path& path, const std::vector<GridSchedule>& table) {
  json doc = json::array();
  for (const auto& s : table) doc.push_back(to_json(s));
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace pgfrog
