#pragma once

// Dataset input and report output. Elections arrive as CSV with the fixed
// header `state,year,district,dem_share,pres_dem_share,incumbency,imputed`;
// coefficient fixtures as `year,gamma0,gamma1,beta0,beta1`. Reports leave as
// JSON objects with a `meta` envelope and flat `rows`, in stable key order.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "declin/core.hpp"
#include "declin/declination.hpp"
#include "declin/regress.hpp"
#include "declin/spc.hpp"

namespace declin {

using json = nlohmann::ordered_json;

class ParseError final : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError final : public Error {
 public:
  using Error::Error;
};

class InconsistentGroup final : public Error {
 public:
  using Error::Error;
};

struct LoadOptions {
  bool contested_only = false;       // drop districts whose share was imputed
  bool require_presidential = false; // drop districts without a presidential share
};

struct DatasetManifest {
  std::string source;
  int row_count = 0;  // districts retained across all records
  std::vector<int> years;
  std::vector<std::string> states;
  int imputed_rows = 0;             // retained districts flagged as imputed
  int dropped_uncontested = 0;      // removed by contested_only
  int dropped_missing_presidential = 0;
};

struct LoadResult {
  std::vector<StateYearRecord> records;
  DatasetManifest manifest;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline double parse_share(std::string_view text, std::size_t line, std::string_view column) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(line, std::string(column) + " is not a number: '" +
                               std::string(text) + "'");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValueOutOfRange(line, "line " + std::to_string(line) + ": " +
                                    std::string(column) + " outside [0,1]: " +
                                    std::string(text));
  }
  return value;
}

inline int parse_int(std::string_view text, std::size_t line, std::string_view column) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, std::string(column) + " is not an integer: '" +
                               std::string(text) + "'");
  }
  return value;
}

inline constexpr std::string_view kElectionHeader =
    "state,year,district,dem_share,pres_dem_share,incumbency,imputed";
inline constexpr std::string_view kCoefficientHeader = "year,gamma0,gamma1,beta0,beta1";

inline void check_header(std::string_view got, std::string_view expected) {
  if (got == expected) return;
  const auto got_cols = split_fields(got);
  for (const auto expected_col : split_fields(expected)) {
    bool found = false;
    for (const auto col : got_cols) {
      if (col == expected_col) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw SchemaError("missing column '" + std::string(expected_col) +
                        "' (header must be '" + std::string(expected) + "')");
    }
  }
  throw SchemaError("header must be exactly '" + std::string(expected) + "'");
}

inline std::string format_share(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

}  // namespace detail

/// Reads, validates, groups, and filters election returns. Records come
/// back sorted by state then year, districts sorted by legislative share.
inline LoadResult load_elections(std::istream& in, LoadOptions options = {},
                                 std::string source_name = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  detail::check_header(line, detail::kElectionHeader);

  struct GroupKey {
    std::string state;
    int year;
    auto operator<=>(const GroupKey&) const = default;
  };
  std::map<GroupKey, std::vector<DistrictReturn>> groups;
  std::map<GroupKey, std::set<int>> district_ids;

  LoadResult out;
  out.manifest.source = std::move(source_name);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto fields = detail::split_fields(line);
    if (fields.size() != 7) {
      throw ParseError(line_no, "expected 7 fields, got " + std::to_string(fields.size()));
    }

    const std::string_view state_field = fields[0];
    if (state_field.size() != 2 ||
        !std::isalpha(static_cast<unsigned char>(state_field[0])) ||
        !std::isalpha(static_cast<unsigned char>(state_field[1]))) {
      throw ParseError(line_no, "state must be a two-letter code, got '" +
                                    std::string(state_field) + "'");
    }
    std::string state{state_field};
    for (char& c : state) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));

    const int year = detail::parse_int(fields[1], line_no, "year");
    if (year % 2 != 0) throw ParseError(line_no, "year must be even");
    const int district = detail::parse_int(fields[2], line_no, "district");

    DistrictReturn entry;
    entry.dem_share = detail::parse_share(fields[3], line_no, "dem_share");
    if (!fields[4].empty()) {
      entry.pres_dem_share = detail::parse_share(fields[4], line_no, "pres_dem_share");
    }

    if (fields[5] == "D") {
      entry.incumbency = Incumbency::DemIncumbent;
    } else if (fields[5] == "R") {
      entry.incumbency = Incumbency::RepIncumbent;
    } else if (fields[5] == "O") {
      entry.incumbency = Incumbency::OpenOrMixed;
    } else {
      throw ParseError(line_no, "incumbency must be D, R, or O, got '" +
                                    std::string(fields[5]) + "'");
    }

    if (fields[6] == "0") {
      entry.imputed = false;
    } else if (fields[6] == "1") {
      entry.imputed = true;
    } else {
      throw ParseError(line_no, "imputed must be 0 or 1, got '" +
                                    std::string(fields[6]) + "'");
    }

    const GroupKey key{state, year};
    if (!district_ids[key].insert(district).second) {
      throw InconsistentGroup("duplicate district " + std::to_string(district) +
                              " for " + state + " " + std::to_string(year));
    }

    if (options.contested_only && entry.imputed) {
      ++out.manifest.dropped_uncontested;
      continue;
    }
    if (options.require_presidential && !entry.pres_dem_share.has_value()) {
      ++out.manifest.dropped_missing_presidential;
      continue;
    }
    groups[key].push_back(entry);
  }

  for (auto& [key, districts] : groups) {
    if (districts.empty()) continue;
    std::stable_sort(districts.begin(), districts.end(),
                     [](const DistrictReturn& a, const DistrictReturn& b) {
                       return a.dem_share < b.dem_share;
                     });
    StateYearRecord record;
    record.state = key.state;
    record.year = key.year;
    record.districts = std::move(districts);
    out.manifest.row_count += static_cast<int>(record.districts.size());
    for (const auto& d : record.districts) {
      if (d.imputed) ++out.manifest.imputed_rows;
    }
    out.records.push_back(std::move(record));
  }

  std::set<int> years;
  std::set<std::string> states;
  for (const auto& record : out.records) {
    years.insert(record.year);
    states.insert(record.state);
  }
  out.manifest.years.assign(years.begin(), years.end());
  out.manifest.states.assign(states.begin(), states.end());
  return out;
}

inline LoadResult load_elections(const std::filesystem::path& path, LoadOptions options = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset: " + path.string());
  return load_elections(in, options, path.string());
}

/// Writes records back out under the election schema. District numbers are
/// ordinals within each state-year; reloading gives structurally identical
/// records.
inline void write_elections(std::ostream& out, std::span<const StateYearRecord> records) {
  out << detail::kElectionHeader << '\n';
  for (const auto& record : records) {
    int ordinal = 0;
    for (const auto& d : record.districts) {
      out << record.state << ',' << record.year << ',' << ++ordinal << ','
          << detail::format_share(d.dem_share) << ',';
      if (d.pres_dem_share.has_value()) out << detail::format_share(*d.pres_dem_share);
      out << ',' << to_string(d.incumbency) << ',' << (d.imputed ? '1' : '0') << '\n';
    }
  }
}

/// States whose delegation has at most four districts anywhere in the given
/// records (one apportionment cycle), sorted alphabetically. Such states can
/// never satisfy the sweep eligibility gates.
inline std::vector<std::string> excluded_small_states(std::span<const StateYearRecord> records) {
  std::map<std::string, std::size_t> max_districts;
  for (const auto& record : records) {
    auto& current = max_districts[record.state];
    current = std::max(current, record.districts.size());
  }
  std::vector<std::string> excluded;
  for (const auto& [state, count] : max_districts) {
    if (count <= 4) excluded.push_back(state);
  }
  return excluded;
}

// ---------------------------------------------------------------------------
// Coefficient fixtures

inline std::vector<YearCoefficients> load_year_coefficients(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  detail::check_header(line, detail::kCoefficientHeader);

  std::vector<YearCoefficients> coefficients;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 5) {
      throw ParseError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    }
    YearCoefficients c;
    c.year = detail::parse_int(fields[0], line_no, "year");
    const std::string_view names[4] = {"gamma0", "gamma1", "beta0", "beta1"};
    double* slots[4] = {&c.gamma0, &c.gamma1, &c.beta0, &c.beta1};
    for (int i = 0; i < 4; ++i) {
      const auto text = fields[static_cast<std::size_t>(i + 1)];
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), *slots[i]);
      if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError(line_no, std::string(names[i]) + " is not a number: '" +
                                      std::string(text) + "'");
      }
    }
    coefficients.push_back(c);
  }
  return coefficients;
}

inline std::vector<YearCoefficients> load_year_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open coefficient fixture: " + path.string());
  return load_year_coefficients(in);
}

// ---------------------------------------------------------------------------
// JSON serialization (stable key order throughout)

inline json to_json(const DatasetManifest& manifest) {
  return json{{"source", manifest.source},
              {"row_count", manifest.row_count},
              {"years", manifest.years},
              {"states", manifest.states},
              {"imputed_rows", manifest.imputed_rows},
              {"dropped_uncontested", manifest.dropped_uncontested},
              {"dropped_missing_presidential", manifest.dropped_missing_presidential}};
}

inline json to_json(const OlsFit& fit) {
  return json{{"intercept", fit.intercept},
              {"slope", fit.slope},
              {"r_squared", fit.r_squared},
              {"rmse", fit.rmse}};
}

inline json to_json(const DirectionSummary& summary) {
  json j{{"count_ok", summary.count_ok}};
  if (summary.central_95.has_value()) {
    j["central_95"] = json::array({summary.central_95->first, summary.central_95->second});
  } else {
    j["central_95"] = nullptr;
  }
  j["delta_vs_n"] = summary.delta_vs_n.has_value() ? to_json(*summary.delta_vs_n) : json(nullptr);
  return j;
}

inline json to_json(const SweepCase& c) {
  json j{{"state", c.state},
         {"year", c.year},
         {"n", c.n},
         {"beneficiary", to_string(c.request.beneficiary)},
         {"method", to_string(c.request.method)},
         {"threshold", c.request.threshold},
         {"strategy", to_string(c.request.strategy)},
         {"status", to_string(c.status)}};
  if (c.status == SweepStatus::Ok) {
    j["delta_metric"] = c.delta_metric;
  } else {
    j["delta_metric"] = nullptr;
  }
  j["plot_x"] = c.plot_x;
  return j;
}

inline json to_json(const SweepReport& report) {
  json cases = json::array();
  for (const auto& c : report.cases) cases.push_back(to_json(c));
  return json{{"metric", report.metric_label},
              {"eligible_state_years", report.eligible_state_years},
              {"total_cases", report.total_cases},
              {"ok_cases", report.ok_cases},
              {"not_enough_room", report.not_enough_room},
              {"constraint_violated", report.constraint_violated},
              {"pro_republican", to_json(report.pro_republican)},
              {"pro_democratic", to_json(report.pro_democratic)},
              {"cases", std::move(cases)}};
}

inline json to_json(const DeclinationResult& r) {
  return json{{"delta", r.delta},
              {"s_declination", r.s_declination},
              {"n", r.n},
              {"k", r.k},
              {"f_point", json::array({r.f_point.x, r.f_point.y})},
              {"g_point", json::array({r.g_point.x, r.g_point.y})},
              {"h_point", json::array({r.h_point.x, r.h_point.y})}};
}

/// Standard report envelope: what ran, with which options, over which data.
inline json report_envelope(std::string_view command, json options,
                            const DatasetManifest* manifest) {
  json meta{{"command", std::string(command)}, {"options", std::move(options)}};
  meta["dataset"] = manifest != nullptr ? to_json(*manifest) : json(nullptr);
  return json{{"meta", std::move(meta)}, {"rows", json::array()}};
}

}  // namespace declin
