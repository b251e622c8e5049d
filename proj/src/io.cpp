#include "hamsel/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace hamsel::io {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, std::size_t line) {
  const std::string text = trim(field);
  if (text.empty()) throw ParseError(line, "empty field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError(line, "not a finite number: '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

// Non-blank lines with their 1-based numbers; blank lines may only trail.
std::vector<std::pair<std::size_t, std::string>> content_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string raw;
  std::size_t number = 0;
  std::size_t first_blank = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = trim(raw);
    if (line.empty()) {
      if (first_blank == 0) first_blank = number;
      continue;
    }
    if (first_blank != 0) throw ParseError(first_blank, "blank line inside data");
    lines.emplace_back(number, std::move(line));
  }
  return lines;
}

void put_optional(nlohmann::json& j, const char* key, const std::optional<double>& v) {
  j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string optional_cell(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::invalid_argument(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

Observations read_observations(std::istream& in) {
  Observations out;
  for (const auto& [number, line] : content_lines(in)) {
    if (line.find(',') != std::string::npos) {
      throw ParseError(number, "expected one value per line");
    }
    out.push_back(parse_double(line, number));
  }
  if (out.empty()) throw ParseError(0, "no observations in input");
  return out;
}

VoteMatrix read_votes(std::istream& in) {
  VoteMatrix vm;
  for (const auto& [number, line] : content_lines(in)) {
    const auto fields = split_commas(line);
    if (vm.m == 0) {
      vm.d = fields.size();
    } else if (fields.size() != vm.d) {
      throw ParseError(number, "expected " + std::to_string(vm.d) + " votes, got " +
                                   std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      const std::string v = trim(f);
      if (v != "0" && v != "1") throw ParseError(number, "vote must be 0 or 1, got '" + v + "'");
      vm.votes.push_back(v == "1" ? 1 : 0);
    }
    ++vm.m;
  }
  if (vm.m == 0) throw ParseError(0, "no votes in input");
  return vm;
}

std::vector<WorkerRates> read_rates(std::istream& in) {
  std::vector<WorkerRates> out;
  for (const auto& [number, line] : content_lines(in)) {
    const auto fields = split_commas(line);
    if (fields.size() != 2) throw ParseError(number, "expected 'a0,a1'");
    out.push_back({parse_double(fields[0], number), parse_double(fields[1], number)});
  }
  if (out.empty()) throw ParseError(0, "no rates in input");
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json support_json(const SupportVector& support) {
  nlohmann::json selected = nlohmann::json::array();
  for (std::size_t j : support.indices()) selected.push_back(j + 1);
  return {{"selected", selected}, {"bits", support.bitstring()}};
}

nlohmann::json report_json(const RiskReport& r) {
  nlohmann::json j;
  put_optional(j, "closed_form", r.closed_form);
  put_optional(j, "bound_lower", r.bound_lower);
  put_optional(j, "bound_upper", r.bound_upper);
  put_optional(j, "estimate", r.mc_estimate);
  put_optional(j, "stderr", r.mc_stderr);
  j["replications"] = r.replications;
  j["seed"] = r.seed;
  j["loss_kind"] = std::string(to_string(r.loss_kind));
  return j;
}

void write_mc_csv(std::ostream& out, const std::vector<McRow>& rows) {
  out << kMcCsvHeader << '\n';
  for (const auto& row : rows) {
    const auto& p = row.instance;
    out << p.d << ',' << p.s << ',' << format_number(p.signal_level()) << ','
        << format_number(p.sigma) << ',' << format_number(row.rho) << ',' << to_string(p.family)
        << ',' << row.selector << ',' << to_string(row.report.loss_kind) << ','
        << optional_cell(row.report.mc_estimate) << ',' << optional_cell(row.report.mc_stderr)
        << ',' << row.report.replications << ',' << row.report.seed << ','
        << optional_cell(row.report.closed_form) << '\n';
  }
}

nlohmann::json mc_row_json(const McRow& row) {
  const auto& p = row.instance;
  nlohmann::json j = report_json(row.report);
  j["d"] = p.d;
  j["s"] = p.s;
  j["a"] = p.signal_level();
  j["sigma"] = p.sigma;
  j["rho"] = row.rho;
  j["family"] = std::string(to_string(p.family));
  j["selector"] = row.selector;
  return j;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.d << ',' << r.s << ',' << format_number(r.a) << ',' << format_number(r.sigma) << ','
        << format_number(r.rho) << ',' << to_string(r.family) << ',' << r.selector << ','
        << to_string(r.loss_kind) << ',' << format_number(r.estimate) << ','
        << format_number(r.stderr_) << ',' << r.replications << ',' << r.seed << ','
        << format_number(r.a_multiplier) << ',' << format_number(r.a_almost_full) << ','
        << format_number(r.a_exact) << ',' << format_number(r.t_star) << ','
        << optional_cell(r.closed_form) << '\n';
  }
}

nlohmann::json sweep_record_json(const SweepRecord& r) {
  nlohmann::json j{{"d", r.d},
                   {"s", r.s},
                   {"a", r.a},
                   {"sigma", r.sigma},
                   {"rho", r.rho},
                   {"family", std::string(to_string(r.family))},
                   {"selector", r.selector},
                   {"loss_kind", std::string(to_string(r.loss_kind))},
                   {"estimate", r.estimate},
                   {"stderr", r.stderr_},
                   {"replications", r.replications},
                   {"seed", r.seed},
                   {"a_multiplier", r.a_multiplier},
                   {"a_almost_full", r.a_almost_full},
                   {"a_exact", r.a_exact},
                   {"t_star", r.t_star}};
  put_optional(j, "closed_form", r.closed_form);
  return j;
}

}  // namespace hamsel::io
