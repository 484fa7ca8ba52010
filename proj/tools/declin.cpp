// Command-line surface for the library: dataset ingestion, declination and
// net-seat reports, single packing/cracking traces, ensemble sweeps,
// logistic-model sensitivity runs, and per-year fits.
//
// Every report is a pure function of the input file bytes, the flags, and
// the seed; reports embed the resolved configuration for provenance.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "declin/analysis.hpp"
#include "declin/declination.hpp"
#include "declin/ingest.hpp"
#include "declin/regress.hpp"
#include "declin/spc.hpp"

namespace {

using declin::json;

constexpr int kExitOk = 0;
constexpr int kExitEmptyResult = 1;
constexpr int kExitInputError = 2;

struct CommonOptions {
  std::string input;
  std::string output;
  std::string format = "json";
  std::string years;
  bool presidential_years_only = false;
  bool contested_only = false;
  std::uint64_t seed = 0;
};

void add_common_options(CLI::App& cmd, CommonOptions& options) {
  cmd.add_option("--input", options.input, "input election CSV")->required();
  cmd.add_option("--output", options.output, "output path (stdout when omitted)");
  cmd.add_option("--format", options.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd.add_option("--years", options.years, "comma-separated list of years to keep");
  cmd.add_flag("--presidential-years-only", options.presidential_years_only,
               "keep only years divisible by four");
  cmd.add_flag("--contested-only", options.contested_only,
               "drop districts with imputed legislative shares");
  cmd.add_option("--seed", options.seed, "seed for plot-export jitter");
}

std::vector<int> parse_years(const std::string& text) {
  std::vector<int> years;
  std::size_t start = 0;
  while (start <= text.size() && !text.empty()) {
    const std::size_t comma = text.find(',', start);
    const std::string token =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!token.empty()) {
      int year = 0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), year);
      if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw declin::Error("--years expects integers, got '" + token + "'");
      }
      years.push_back(year);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return years;
}

std::vector<declin::StateYearRecord> filter_records(
    std::vector<declin::StateYearRecord> records, const std::vector<int>& years,
    bool presidential_only) {
  std::erase_if(records, [&](const declin::StateYearRecord& record) {
    if (presidential_only && record.year % 4 != 0) return true;
    if (!years.empty() &&
        std::find(years.begin(), years.end(), record.year) == years.end()) {
      return true;
    }
    return false;
  });
  return records;
}

json options_json(const CommonOptions& options) {
  return json{{"input", options.input},
              {"format", options.format},
              {"years", options.years},
              {"presidential_years_only", options.presidential_years_only},
              {"contested_only", options.contested_only},
              {"seed", options.seed}};
}

std::string csv_number(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

// JSON reports print whole; CSV reports flatten rows under a fixed header.
int emit_report(const json& report, const CommonOptions& options,
                const std::vector<std::string>& csv_header,
                const std::vector<std::vector<std::string>>& csv_rows) {
  std::ostringstream body;
  if (options.format == "json") {
    body << report.dump(2) << '\n';
  } else {
    for (std::size_t i = 0; i < csv_header.size(); ++i) {
      body << (i == 0 ? "" : ",") << csv_header[i];
    }
    body << '\n';
    for (const auto& row : csv_rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        body << (i == 0 ? "" : ",") << row[i];
      }
      body << '\n';
    }
  }

  if (options.output.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream out(options.output, std::ios::binary);
    if (!out) throw declin::Error("cannot open output path: " + options.output);
    out << body.str();
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_declination(const CommonOptions& options) {
  const auto loaded = declin::load_elections(options.input,
                                             {.contested_only = options.contested_only});
  const auto records = filter_records(loaded.records, parse_years(options.years),
                                      options.presidential_years_only);

  json report = declin::report_envelope("declination", options_json(options),
                                        &loaded.manifest);
  std::vector<std::vector<std::string>> csv_rows;
  int defined_rows = 0;
  int undefined_rows = 0;

  for (const auto& record : records) {
    const auto distribution = record.distribution();
    const auto split = declin::seat_split(distribution);
    json row{{"state", record.state},
             {"year", record.year},
             {"n", distribution.size()},
             {"dem_seats", split.dem},
             {"rep_seats", split.rep}};
    std::vector<std::string> csv_row{record.state, std::to_string(record.year),
                                     std::to_string(distribution.size())};
    if (split.dem > 0 && split.rep > 0) {
      const auto result = declin::declination(distribution);
      row["defined"] = true;
      row["delta"] = result.delta;
      row["s_declination"] = result.s_declination;
      row["seat_estimate"] = declin::round_seats(result.s_declination);
      csv_row.insert(csv_row.end(),
                     {"1", csv_number(result.delta), csv_number(result.s_declination),
                      std::to_string(declin::round_seats(result.s_declination))});
      ++defined_rows;
    } else {
      row["defined"] = false;
      row["delta"] = nullptr;
      row["s_declination"] = nullptr;
      row["seat_estimate"] = 0;
      csv_row.insert(csv_row.end(), {"0", "", "", "0"});
      ++undefined_rows;
    }
    report["rows"].push_back(std::move(row));
    csv_rows.push_back(std::move(csv_row));
  }
  report["meta"]["undefined_state_years"] = undefined_rows;

  emit_report(report, options,
              {"state", "year", "n", "defined", "delta", "s_declination", "seat_estimate"},
              csv_rows);
  return defined_rows > 0 ? kExitOk : kExitEmptyResult;
}

int cmd_net_seats(const CommonOptions& options) {
  const auto loaded = declin::load_elections(options.input,
                                             {.contested_only = options.contested_only});
  const auto records = filter_records(loaded.records, parse_years(options.years),
                                      options.presidential_years_only);
  const auto table = declin::net_seats_by_year(records);

  json report = declin::report_envelope("net-seats", options_json(options), &loaded.manifest);
  std::vector<std::vector<std::string>> csv_rows;
  for (const auto& [year, seats] : table.net_seats) {
    report["rows"].push_back(json{{"year", year}, {"net_seats", seats}});
    csv_rows.push_back({std::to_string(year), std::to_string(seats)});
  }

  emit_report(report, options, {"year", "net_seats"}, csv_rows);
  return table.net_seats.empty() ? kExitEmptyResult : kExitOk;
}

int cmd_spc(const CommonOptions& options, const declin::SpcRequest& request) {
  const auto loaded = declin::load_elections(options.input,
                                             {.contested_only = options.contested_only});
  const auto records = filter_records(loaded.records, parse_years(options.years),
                                      options.presidential_years_only);

  json options_with_request = options_json(options);
  options_with_request["beneficiary"] = declin::to_string(request.beneficiary);
  options_with_request["variant"] = declin::to_string(request.method);
  options_with_request["threshold"] = request.threshold;
  options_with_request["strategy"] = declin::to_string(request.strategy);

  json report = declin::report_envelope("spc", options_with_request, &loaded.manifest);
  std::vector<std::vector<std::string>> csv_rows;
  int ok_rows = 0;

  for (const auto& record : records) {
    const auto before = record.distribution();
    json row{{"state", record.state}, {"year", record.year}, {"n", before.size()}};
    std::vector<std::string> csv_row{record.state, std::to_string(record.year),
                                     std::to_string(before.size())};
    try {
      const auto outcome = declin::spc(before, request);
      const double flipped_before =
          before.shares()[static_cast<std::size_t>(outcome.flipped_index)];
      const double predicted = outcome.regression.predict(declin::district_abscissa(
          static_cast<std::size_t>(outcome.flipped_index),
          static_cast<std::size_t>(before.size())));
      const bool clamped =
          std::abs(predicted - outcome.flipped_share_after) > declin::kShareTolerance;

      row["status"] = "ok";
      row["flipped_index"] = outcome.flipped_index;
      row["flipped_before"] = flipped_before;
      row["flipped_after"] = outcome.flipped_share_after;
      row["regression"] = declin::to_json(outcome.regression);
      row["predicted"] = predicted;
      row["clamped"] = clamped;
      row["iterations"] = outcome.iterations;
      row["before"] = before.shares();
      row["after"] = outcome.result.shares();
      csv_row.insert(csv_row.end(),
                     {"ok", std::to_string(outcome.flipped_index),
                      csv_number(flipped_before), csv_number(outcome.flipped_share_after),
                      csv_number(outcome.regression.intercept),
                      csv_number(outcome.regression.slope), clamped ? "1" : "0",
                      std::to_string(outcome.iterations)});
      ++ok_rows;
    } catch (const declin::SpcError& err) {
      row["status"] = declin::to_string(err.kind());
      row["reason"] = err.what();
      csv_row.insert(csv_row.end(),
                     {declin::to_string(err.kind()), "", "", "", "", "", "", ""});
    }
    report["rows"].push_back(std::move(row));
    csv_rows.push_back(std::move(csv_row));
  }

  emit_report(report, options,
              {"state", "year", "n", "status", "flipped_index", "flipped_before",
               "flipped_after", "intercept", "slope", "clamped", "iterations"},
              csv_rows);
  return ok_rows > 0 ? kExitOk : kExitEmptyResult;
}

std::vector<std::vector<std::string>> sweep_csv_rows(const declin::SweepReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : report.cases) {
    rows.push_back({c.state, std::to_string(c.year), std::to_string(c.n),
                    declin::to_string(c.request.beneficiary),
                    declin::to_string(c.request.method), csv_number(c.request.threshold),
                    declin::to_string(c.request.strategy), declin::to_string(c.status),
                    c.status == declin::SweepStatus::Ok ? csv_number(c.delta_metric) : "",
                    csv_number(c.plot_x)});
  }
  return rows;
}

const std::vector<std::string> kSweepCsvHeader{
    "state", "year", "n", "beneficiary", "method", "threshold",
    "strategy", "status", "delta_metric", "plot_x"};

int cmd_sweep(const CommonOptions& options, std::vector<double> thresholds,
              std::vector<std::string> strategy_names, const std::string& metric) {
  if (metric != "s-declination") {
    throw declin::Error("unsupported metric '" + metric + "' (expected s-declination)");
  }
  const auto loaded = declin::load_elections(options.input,
                                             {.contested_only = options.contested_only});
  const auto records = filter_records(loaded.records, parse_years(options.years),
                                      options.presidential_years_only);

  if (thresholds.empty()) thresholds.push_back(0.45);
  std::vector<declin::SpcStrategy> strategies;
  if (strategy_names.empty()) strategy_names.push_back("even");
  for (const auto& name : strategy_names) {
    strategies.push_back(name == "greedy" ? declin::SpcStrategy::Greedy
                                          : declin::SpcStrategy::Even);
  }

  auto reports = declin::declination_sweep(records, thresholds, strategies);
  for (auto& r : reports) declin::apply_plot_jitter(r, options.seed);

  json options_with_settings = options_json(options);
  options_with_settings["metric"] = metric;
  options_with_settings["thresholds"] = thresholds;
  options_with_settings["strategies"] = strategy_names;

  json report = declin::report_envelope("sweep", options_with_settings, &loaded.manifest);
  std::vector<std::vector<std::string>> csv_rows;
  int ok_cases = 0;
  for (const auto& r : reports) {
    report["rows"].push_back(declin::to_json(r));
    const auto rows = sweep_csv_rows(r);
    csv_rows.insert(csv_rows.end(), rows.begin(), rows.end());
    ok_cases += r.ok_cases;
  }

  emit_report(report, options, kSweepCsvHeader, csv_rows);
  return ok_cases > 0 ? kExitOk : kExitEmptyResult;
}

int cmd_sensitivity(const CommonOptions& options, const std::string& link_name,
                    const std::string& coeffs_path) {
  // The expected-seat model always works from contested districts.
  const auto loaded = declin::load_elections(options.input, {.contested_only = true});
  const auto records = filter_records(loaded.records, parse_years(options.years),
                                      options.presidential_years_only);

  std::vector<declin::YearCoefficients> coefficients;
  if (coeffs_path.empty()) {
    const auto bundled = declin::bundled_year_coefficients();
    coefficients.assign(bundled.begin(), bundled.end());
  } else {
    coefficients = declin::load_year_coefficients(coeffs_path);
  }
  const auto link = link_name == "fitted" ? declin::LinkChoice::Fitted
                                          : declin::LinkChoice::Identity;

  auto sweep = declin::sensitivity_sweep(records, coefficients, link);
  declin::apply_plot_jitter(sweep, options.seed);

  json options_with_link = options_json(options);
  options_with_link["link"] = link_name;
  options_with_link["coeffs"] = coeffs_path.empty() ? "<bundled>" : coeffs_path;

  json report = declin::report_envelope("sensitivity", options_with_link, &loaded.manifest);
  report["rows"].push_back(declin::to_json(sweep));

  emit_report(report, options, kSweepCsvHeader, sweep_csv_rows(sweep));
  return sweep.ok_cases > 0 ? kExitOk : kExitEmptyResult;
}

int cmd_fit(const CommonOptions& options, const std::string& coeffs_path) {
  const auto loaded = declin::load_elections(options.input,
                                             {.contested_only = options.contested_only});
  const auto records = filter_records(loaded.records, parse_years(options.years),
                                      options.presidential_years_only);

  std::vector<declin::YearCoefficients> reference;
  if (coeffs_path.empty()) {
    const auto bundled = declin::bundled_year_coefficients();
    reference.assign(bundled.begin(), bundled.end());
  } else {
    reference = declin::load_year_coefficients(coeffs_path);
  }

  std::vector<int> years;
  for (const auto& record : records) {
    if (std::find(years.begin(), years.end(), record.year) == years.end()) {
      years.push_back(record.year);
    }
  }
  std::sort(years.begin(), years.end());

  json options_with_path = options_json(options);
  options_with_path["coeffs"] = coeffs_path.empty() ? "<bundled>" : coeffs_path;
  json report = declin::report_envelope("fit", options_with_path, &loaded.manifest);
  std::vector<std::vector<std::string>> csv_rows;
  int fitted_rows = 0;

  for (int year : years) {
    const std::vector<int> one_year{year};

    std::vector<declin::LogisticObservation> observations;
    for (const auto& record : records) {
      if (record.year != year) continue;
      for (const auto& d : record.districts) {
        if (d.imputed || !d.pres_dem_share.has_value()) continue;
        observations.push_back({*d.pres_dem_share, declin::democrats_win(d.dem_share)});
      }
    }

    json row{{"year", year}, {"districts", observations.size()}};
    std::vector<std::string> csv_row{std::to_string(year),
                                     std::to_string(observations.size())};
    try {
      const auto link = declin::pres_vs_leg_fit(records, one_year);
      const auto logistic = declin::fit_logistic(observations);
      row["link"] = declin::to_json(link.fit);
      row["logistic"] = json{{"beta0", logistic.beta0},
                             {"beta1", logistic.beta1},
                             {"converged", logistic.converged},
                             {"iterations", logistic.iterations}};
      csv_row.insert(csv_row.end(),
                     {csv_number(link.fit.intercept), csv_number(link.fit.slope),
                      csv_number(link.fit.r_squared), csv_number(logistic.beta0),
                      csv_number(logistic.beta1)});
      ++fitted_rows;
    } catch (const declin::Error& err) {
      row["error"] = err.what();
      csv_row.insert(csv_row.end(), {"", "", "", "", ""});
    }

    const auto ref = std::find_if(reference.begin(), reference.end(),
                                  [year](const auto& c) { return c.year == year; });
    if (ref != reference.end()) {
      row["reference"] = json{{"gamma0", ref->gamma0},
                              {"gamma1", ref->gamma1},
                              {"beta0", ref->beta0},
                              {"beta1", ref->beta1}};
    } else {
      row["reference"] = nullptr;
    }
    report["rows"].push_back(std::move(row));
    csv_rows.push_back(std::move(csv_row));
  }

  emit_report(report, options,
              {"year", "districts", "gamma0", "gamma1", "link_r2", "beta0", "beta1"},
              csv_rows);
  return fitted_rows > 0 ? kExitOk : kExitEmptyResult;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"district vote-distribution asymmetry toolkit"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* declination_cmd =
      app.add_subcommand("declination", "per-state-year declination and seat estimates");
  add_common_options(*declination_cmd, common);

  auto* net_seats_cmd =
      app.add_subcommand("net-seats", "yearly net seats from rounded S-declinations");
  add_common_options(*net_seats_cmd, common);

  auto* spc_cmd = app.add_subcommand("spc", "trace one packing/cracking per state-year");
  add_common_options(*spc_cmd, common);
  std::string beneficiary = "rep";
  std::string variant = "crack";
  std::string strategy = "even";
  double threshold = 0.45;
  spc_cmd->add_option("--beneficiary", beneficiary, "party gaining the seat")
      ->required()
      ->check(CLI::IsMember({"rep", "dem", "republicans", "democrats"}));
  spc_cmd->add_option("--variant", variant, "pack or crack")
      ->required()
      ->check(CLI::IsMember({"pack", "crack"}));
  spc_cmd->add_option("--threshold", threshold, "competitiveness threshold");
  spc_cmd->add_option("--strategy", strategy, "vote distribution strategy")
      ->check(CLI::IsMember({"even", "greedy"}));

  auto* sweep_cmd =
      app.add_subcommand("sweep", "S-declination deltas across all variants");
  add_common_options(*sweep_cmd, common);
  std::vector<double> thresholds;
  std::vector<std::string> strategies;
  std::string metric = "s-declination";
  sweep_cmd->add_option("--threshold", thresholds, "competitiveness thresholds");
  sweep_cmd->add_option("--strategy", strategies, "vote distribution strategies")
      ->check(CLI::IsMember({"even", "greedy"}));
  sweep_cmd->add_option("--metric", metric, "metric to difference");

  auto* sensitivity_cmd =
      app.add_subcommand("sensitivity", "expected-seat deltas under the logistic model");
  add_common_options(*sensitivity_cmd, common);
  std::string link = "identity";
  std::string coeffs_path;
  sensitivity_cmd->add_option("--link", link, "legislative-to-presidential link")
      ->check(CLI::IsMember({"identity", "fitted"}));
  sensitivity_cmd->add_option("--coeffs", coeffs_path, "coefficient fixture CSV");

  auto* fit_cmd = app.add_subcommand("fit", "per-year link and logistic fits");
  add_common_options(*fit_cmd, common);
  std::string fit_coeffs_path;
  fit_cmd->add_option("--coeffs", fit_coeffs_path, "reference coefficient CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (declination_cmd->parsed()) return cmd_declination(common);
    if (net_seats_cmd->parsed()) return cmd_net_seats(common);
    if (spc_cmd->parsed()) {
      declin::SpcRequest request;
      request.beneficiary = beneficiary.starts_with("rep") ? declin::Party::Republicans
                                                           : declin::Party::Democrats;
      request.method =
          variant == "pack" ? declin::SpcMethod::Pack : declin::SpcMethod::Crack;
      request.threshold = threshold;
      request.strategy =
          strategy == "greedy" ? declin::SpcStrategy::Greedy : declin::SpcStrategy::Even;
      return cmd_spc(common, request);
    }
    if (sweep_cmd->parsed()) return cmd_sweep(common, thresholds, strategies, metric);
    if (sensitivity_cmd->parsed()) return cmd_sensitivity(common, link, coeffs_path);
    if (fit_cmd->parsed()) return cmd_fit(common, fit_coeffs_path);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
