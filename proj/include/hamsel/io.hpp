#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hamsel/model.hpp"
#include "hamsel/simulate.hpp"

namespace hamsel::io {

/// Malformed input; `line` is 1-based (0 when not tied to a line).
class ParseError : public std::invalid_argument {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// One number per line, no header. Trailing blank lines are ignored; an
/// input with no values is an error.
Observations read_observations(std::istream& in);

struct VoteMatrix {
  std::size_t m = 0;
  std::size_t d = 0;
  std::vector<std::uint8_t> votes;  // row-major (worker, item)
};

/// m header-less rows of d comma-separated 0/1 values.
VoteMatrix read_votes(std::istream& in);

/// m rows "a_i0,a_i1".
std::vector<WorkerRates> read_rates(std::istream& in);

/// Numbers in CSV output: 17 significant digits.
std::string format_number(double v);

/// {"selected": [1-based indices], "bits": "0101..."}
nlohmann::json support_json(const SupportVector& support);

nlohmann::json report_json(const RiskReport& report);

/// One Monte Carlo result with the instance it came from.
struct McRow {
  ProblemInstance instance;
  std::string selector;
  double rho = 0.0;
  RiskReport report;
};

inline constexpr const char* kMcCsvHeader =
    "d,s,a,sigma,rho,family,selector,loss_kind,estimate,stderr,replications,seed,closed_form";
inline constexpr const char* kSweepCsvHeader =
    "d,s,a,sigma,rho,family,selector,loss_kind,estimate,stderr,replications,seed,"
    "a_multiplier,a_almost_full,a_exact,t_star,closed_form";

void write_mc_csv(std::ostream& out, const std::vector<McRow>& rows);
nlohmann::json mc_row_json(const McRow& row);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& rows);
nlohmann::json sweep_record_json(const SweepRecord& row);

}  // namespace hamsel::io
