#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hamsel/io.hpp"
#include "hamsel/model.hpp"
#include "hamsel/risk.hpp"
#include "hamsel/selectors.hpp"
#include "hamsel/simulate.hpp"

namespace hamsel::cli {

namespace {

using nlohmann::json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct InstanceOptions {
  std::string klass = "plus";
  std::size_t d = 0;
  std::size_t s = 0;
  std::optional<double> a;
  std::optional<double> a0;
  std::optional<double> a1;
  double sigma = 1.0;

  void attach(CLI::App& app) {
    app.add_option("--class", klass, "signal class")
        ->check(CLI::IsMember({"plus", "two-sided", "interval", "bernoulli", "poisson"}));
    app.add_option("--d", d, "dimension")->required();
    app.add_option("--s", s, "sparsity")->required();
    app.add_option("--a", a, "signal level (plus, two-sided)");
    app.add_option("--a0", a0, "lower level / class-0 rate");
    app.add_option("--a1", a1, "upper level / class-1 rate");
    app.add_option("--sigma", sigma, "noise level");
  }

  bool single_level() const { return klass == "plus" || klass == "two-sided"; }

  ProblemInstance build() const {
    ProblemInstance p;
    p.d = d;
    p.s = s;
    p.sigma = sigma;
    if (single_level()) {
      if (!a) throw UsageError("--class " + klass + " needs --a");
      p.signal = klass == "plus" ? Signal{LowerBound{*a}} : Signal{TwoSided{*a}};
    } else {
      if (!a0 || !a1) throw UsageError("--class " + klass + " needs --a0 and --a1");
      p.signal = Interval{*a0, *a1};
      if (klass == "bernoulli") p.family = Family::Bernoulli;
      if (klass == "poisson") p.family = Family::Poisson;
    }
    p.validate();
    return p;
  }
};

std::uint64_t pick_seed(const std::optional<std::uint64_t>& seed, std::ostream& err) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t chosen = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed: " << chosen << '\n';
  return chosen;
}

// ---------------------------------------------------------------- risk

struct RiskCommand {
  InstanceOptions inst;
  std::optional<std::string> which;

  void attach(CLI::App& app) {
    inst.attach(app);
    app.add_option("--which", which, "quantity to evaluate")
        ->check(CLI::IsMember({"psi-plus", "psi", "psi-bar", "general", "bounds", "wrong-recovery"}));
  }

  int run(std::ostream& out) const {
    const ProblemInstance p = inst.build();
    const std::string what =
        which.value_or(inst.klass == "plus" ? "psi-plus"
                                            : inst.klass == "two-sided" ? "psi-bar" : "general");
    json result;
    if (what == "general") {
      const FamilyParams family = p.family_params();
      result["psi"] = psi_general(p.d, p.s, family);
      result["t"] = mlr_threshold(family, log_odds(p.d, p.s));
    } else {
      if (!inst.single_level()) {
        throw UsageError("--which " + what + " needs --class plus or two-sided");
      }
      const double a = p.signal_level();
      if (what == "psi-plus") {
        result["psi_plus"] = psi_plus(p.d, p.s, a, p.sigma);
      } else if (what == "psi") {
        result["psi"] = psi_two_sided(p.d, p.s, a, p.sigma);
      } else if (what == "psi-bar") {
        result["psi_bar"] = psi_bar(p.d, p.s, a, p.sigma);
      } else if (what == "bounds") {
        const auto b = delta_bounds(p.d, p.s, a, p.sigma);
        result["W"] = b.W;
        result["delta"] = b.delta ? json(*b.delta) : json(nullptr);
        result["lower"] = b.lower;
        result["upper"] = b.upper;
      } else {
        const auto b = wrong_recovery_bounds(p.d, p.s, a, p.sigma);
        result["upper_plus"] = b.upper_plus;
        result["upper_bar"] = b.upper_bar;
        result["upper_two_sided"] = b.upper_two_sided;
        result["lower_plus"] = b.lower_plus;
        result["lower_bar"] = b.lower_bar;
      }
    }
    out << result.dump() << '\n';
    return kExitOk;
  }
};

// ---------------------------------------------------------------- select

json adaptive_json(const AdaptiveDiagnostics& d) {
  return {{"chosen_m", d.chosen_m}, {"M", d.grid_size},         {"tau", d.tau},
          {"grid", d.grid},         {"thresholds", d.thresholds}, {"counts", d.counts}};
}

template <class T>
T need(const std::optional<T>& v, const char* flag, const std::string& method) {
  if (!v) throw UsageError("--method " + method + " needs " + flag);
  return *v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return in;
}

struct SelectCommand {
  std::optional<std::string> input;
  std::string method = "threshold";
  std::optional<double> t;
  std::optional<std::size_t> s;
  std::optional<double> a;
  std::optional<double> a0;
  std::optional<double> a1;
  double sigma = 1.0;
  std::string family = "gaussian";
  std::optional<std::size_t> s_star;
  bool abs = false;
  std::optional<std::string> votes;
  std::optional<std::string> rates;

  void attach(CLI::App& app) {
    app.add_option("--input", input, "observations CSV (one value per line)");
    app.add_option("--method", method, "selection rule")
        ->check(CLI::IsMember(
            {"threshold", "threshold-abs", "cosh", "llr", "tops", "universal", "adaptive", "crowd"}));
    app.add_option("--t", t, "explicit threshold");
    app.add_option("--s", s, "sparsity");
    app.add_option("--a", a, "signal level");
    app.add_option("--a0", a0, "class-0 level / rate");
    app.add_option("--a1", a1, "class-1 level / rate");
    app.add_option("--sigma", sigma, "noise level");
    app.add_option("--family", family, "llr family")
        ->check(CLI::IsMember({"gaussian", "bernoulli", "poisson"}));
    app.add_option("--s-star", s_star, "largest sparsity for the adaptive grid");
    app.add_flag("--abs", abs, "tops: rank by |x|");
    app.add_option("--votes", votes, "crowd votes CSV (m rows of d 0/1 values)");
    app.add_option("--rates", rates, "crowd rates CSV (m rows a0,a1)");
  }

  int run(std::ostream& out) const {
    if (votes || rates || method == "crowd") return run_crowd(out);
    if (!input) throw UsageError("select needs --input (or --votes/--rates)");
    auto in = open_input(*input);
    const Observations x = io::read_observations(in);
    const std::size_t d = x.size();

    Selection sel;
    if (method == "threshold" || method == "threshold-abs") {
      double thr = 0.0;
      if (t) {
        thr = *t;
      } else {
        thr = minimax_threshold(d, need(s, "--s", method), need(a, "--a", method), sigma);
        if (method == "threshold-abs") thr = std::max(0.0, thr);
      }
      sel = apply_selector(method == "threshold" ? SelectorSpec{OneSidedThreshold{thr}}
                                                 : SelectorSpec{TwoSidedThreshold{thr}},
                           x);
    } else if (method == "cosh") {
      const double lvl = need(a, "--a", method);
      sel = apply_selector(
          CoshLlr{lvl, sigma, cosh_log_threshold(d, need(s, "--s", method), lvl, sigma)}, x);
    } else if (method == "llr") {
      const double lo = need(a0, "--a0", method);
      const double hi = need(a1, "--a1", method);
      FamilyParams fp = GaussianShift{lo, hi, sigma};
      if (family == "bernoulli") fp = BernoulliRates{lo, hi};
      if (family == "poisson") fp = PoissonRates{lo, hi};
      const std::size_t k = need(s, "--s", method);
      sel.support = llr_selector(x, fp, d, k);
      sel.threshold_used = mlr_threshold(fp, log_odds(d, k));
    } else if (method == "tops") {
      sel = apply_selector(TopS{need(s, "--s", method), !abs}, x);
    } else if (method == "universal") {
      sel = apply_selector(Universal{sigma}, x);
    } else {
      sel = apply_selector(Adaptive{need(s_star, "--s-star", method), sigma}, x);
    }

    json result = io::support_json(sel.support);
    result["threshold_used"] = sel.threshold_used ? json(*sel.threshold_used) : json(nullptr);
    result["diagnostics"] = sel.adaptive ? adaptive_json(*sel.adaptive) : json::object();
    out << result.dump() << '\n';
    return kExitOk;
  }

  int run_crowd(std::ostream& out) const {
    if (!votes || !rates) throw UsageError("crowd selection needs --votes and --rates");
    auto vin = open_input(*votes);
    auto rin = open_input(*rates);
    auto vm = io::read_votes(vin);
    auto r = io::read_rates(rin);
    const CrowdInstance c(vm.m, vm.d, std::move(vm.votes), std::move(r));
    const std::size_t k = need(s, "--s", "crowd");
    json result = io::support_json(crowd_selector(c, k));
    result["threshold_used"] = log_odds(c.items(), k);
    json llr = json::array();
    for (std::size_t j = 0; j < c.items(); ++j) llr.push_back(crowd_llr(c, j));
    result["diagnostics"] = {{"llr", llr}};
    out << result.dump() << '\n';
    return kExitOk;
  }
};

// ---------------------------------------------------------------- mc

struct McOptions {
  std::size_t reps = 0;
  std::optional<std::uint64_t> seed;
  double rho = 0.0;
  std::string loss = "hamming";
  unsigned threads = 0;
  bool stress = false;

  void attach(CLI::App& app, const char* default_loss) {
    loss = default_loss;
    app.add_option("--reps", reps, "Monte Carlo replications")->required();
    app.add_option("--seed", seed, "64-bit seed (auto-chosen and printed if absent)");
    app.add_option("--rho", rho, "noise equicorrelation in [0, 1)");
    app.add_option("--loss", loss, "loss kind")
        ->check(CLI::IsMember({"hamming", "normalized", "wrong-recovery"}));
    app.add_option("--threads", threads, "worker threads (default $HAMSEL_THREADS or all cores)");
    app.add_flag("--stress", stress, "draw signal magnitudes from {a, 2a, 10a}");
  }

  MCConfig build(std::ostream& err) const {
    MCConfig cfg;
    cfg.replications = reps;
    cfg.rho = rho;
    cfg.loss_kind = parse_loss_kind(loss);
    cfg.threads = threads;
    cfg.stress = stress;
    cfg.validate();
    cfg.seed = pick_seed(seed, err);
    return cfg;
  }
};

struct McCommand {
  InstanceOptions inst;
  McOptions mc;
  std::string selector = "plus";
  std::optional<std::size_t> s_star;
  std::string format = "json";

  void attach(CLI::App& app) {
    inst.attach(app);
    mc.attach(app, "hamming");
    app.add_option("--selector", selector, "selector name")
        ->check(CLI::IsMember(
            {"plus", "abs", "cosh", "llr", "tops", "tops-abs", "universal", "adaptive"}));
    app.add_option("--s-star", s_star, "adaptive grid bound");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));
  }

  int run(std::ostream& out, std::ostream& err) const {
    const ProblemInstance p = inst.build();
    const MCConfig cfg = mc.build(err);
    const SelectorSpec sel = make_selector(selector, p, s_star);
    const io::McRow row{p, selector, cfg.rho, estimate_risk(p, sel, cfg)};
    if (format == "csv") {
      io::write_mc_csv(out, {row});
    } else {
      out << io::mc_row_json(row).dump() << '\n';
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------- phase / sweep

void emit_sweep(const std::vector<SweepRecord>& rows, const std::string& format,
                const std::optional<std::string>& output, std::ostream& out) {
  std::ostringstream buf;
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(io::sweep_record_json(r));
    buf << arr.dump() << '\n';
  } else {
    io::write_sweep_csv(buf, rows);
  }
  if (output) {
    std::ofstream f(*output, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + *output + "'");
    f << buf.str();
  } else {
    out << buf.str();
  }
}

PhaseBase parse_base(const std::string& name) {
  if (name == "almost-full") return PhaseBase::AlmostFull;
  if (name == "exact") return PhaseBase::Exact;
  throw UsageError("base must be almost-full or exact");
}

struct PhaseCommand {
  std::vector<std::size_t> d_list;
  std::string s_rule;
  std::vector<double> a_mult;
  std::vector<std::string> selectors;
  std::string base = "almost-full";
  std::string klass = "two-sided";
  double sigma = 1.0;
  std::optional<std::size_t> s_star;
  McOptions mc;
  std::optional<std::string> output;
  std::string format = "csv";

  void attach(CLI::App& app) {
    app.add_option("--d-list", d_list, "dimensions")->delimiter(',')->required();
    app.add_option("--s-rule", s_rule, "fixed:k or power:beta")->required();
    app.add_option("--a-mult", a_mult, "multipliers of the critical level")
        ->delimiter(',')
        ->required();
    app.add_option("--selectors", selectors, "selector names")->delimiter(',')->required();
    app.add_option("--base", base, "critical level: almost-full or exact recovery")
        ->check(CLI::IsMember({"almost-full", "exact"}));
    app.add_option("--class", klass, "signal class")->check(CLI::IsMember({"plus", "two-sided"}));
    app.add_option("--sigma", sigma, "noise level");
    app.add_option("--s-star", s_star, "adaptive grid bound");
    mc.attach(app, "normalized");
    app.add_option("--output", output, "write CSV here instead of stdout");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));
  }

  int run(std::ostream& out, std::ostream& err) const {
    PhaseSweepConfig cfg;
    cfg.d_list = d_list;
    cfg.s_rule = SparsityRule::parse(s_rule);
    cfg.a_multipliers = a_mult;
    cfg.selectors = selectors;
    cfg.base = parse_base(base);
    cfg.two_sided = klass == "two-sided";
    cfg.sigma = sigma;
    cfg.s_star = s_star;
    cfg.mc = mc.build(err);
    emit_sweep(phase_sweep(cfg), format, output, out);
    return kExitOk;
  }
};

// Declarative sweep config; every error names the offending key path.
class ConfigReader {
 public:
  explicit ConfigReader(const json& root) : root_(root) {}

  PhaseSweepConfig read(std::string& format) {
    if (!root_.is_object()) fail("", "config must be a JSON object");
    check_keys(root_, "", {"d_list", "s_rule", "a_multipliers", "selectors", "base", "class",
                           "sigma", "s_star", "mc", "format"});
    PhaseSweepConfig cfg;
    for (std::size_t i = 0; const auto& v : array_at(root_, "", "d_list")) {
      cfg.d_list.push_back(positive_integer(v, "/d_list/" + std::to_string(i++)));
    }
    try {
      cfg.s_rule = SparsityRule::parse(string_at(root_, "", "s_rule"));
    } catch (const UsageError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      fail("/s_rule", e.what());
    }
    for (std::size_t i = 0; const auto& v : array_at(root_, "", "a_multipliers")) {
      const std::string path = "/a_multipliers/" + std::to_string(i++);
      if (!v.is_number()) fail(path, "expected a number");
      cfg.a_multipliers.push_back(v.get<double>());
    }
    for (std::size_t i = 0; const auto& v : array_at(root_, "", "selectors")) {
      const std::string path = "/selectors/" + std::to_string(i++);
      if (!v.is_string()) fail(path, "expected a string");
      cfg.selectors.push_back(v.get<std::string>());
    }
    if (root_.contains("base")) {
      const std::string b = string_at(root_, "", "base");
      if (b != "almost-full" && b != "exact") fail("/base", "expected almost-full or exact");
      cfg.base = parse_base(b);
    }
    if (root_.contains("class")) {
      const std::string c = string_at(root_, "", "class");
      if (c != "plus" && c != "two-sided") fail("/class", "expected plus or two-sided");
      cfg.two_sided = c == "two-sided";
    }
    if (root_.contains("sigma")) cfg.sigma = number_at(root_, "", "sigma");
    if (root_.contains("s_star")) cfg.s_star = positive_integer(root_["s_star"], "/s_star");
    if (root_.contains("format")) {
      format = string_at(root_, "", "format");
      if (format != "csv" && format != "json") fail("/format", "expected csv or json");
    }

    if (!root_.contains("mc")) fail("/mc", "missing required key");
    const json& mc = root_["mc"];
    if (!mc.is_object()) fail("/mc", "expected an object");
    check_keys(mc, "/mc", {"replications", "seed", "rho", "loss", "threads", "stress"});
    if (!mc.contains("replications")) fail("/mc/replications", "missing required key");
    cfg.mc.replications = positive_integer(mc["replications"], "/mc/replications");
    if (!mc.contains("seed")) fail("/mc/seed", "missing required key");
    if (!mc["seed"].is_number_unsigned()) fail("/mc/seed", "expected a nonnegative integer");
    cfg.mc.seed = mc["seed"].get<std::uint64_t>();
    if (mc.contains("rho")) {
      cfg.mc.rho = number_at(mc, "/mc", "rho");
      if (!(cfg.mc.rho >= 0.0 && cfg.mc.rho < 1.0)) fail("/mc/rho", "must lie in [0, 1)");
    }
    cfg.mc.loss_kind = LossKind::NormalizedHamming;
    if (mc.contains("loss")) {
      try {
        cfg.mc.loss_kind = parse_loss_kind(string_at(mc, "/mc", "loss"));
      } catch (const UsageError&) {
        throw;
      } catch (const std::invalid_argument& e) {
        fail("/mc/loss", e.what());
      }
    }
    if (mc.contains("threads")) {
      cfg.mc.threads = static_cast<unsigned>(positive_integer(mc["threads"], "/mc/threads"));
    }
    if (mc.contains("stress")) {
      if (!mc["stress"].is_boolean()) fail("/mc/stress", "expected true or false");
      cfg.mc.stress = mc["stress"].get<bool>();
    }
    return cfg;
  }

 private:
  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw UsageError("config " + (path.empty() ? std::string("/") : path) + ": " + what);
  }

  static void check_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) fail(path + "/" + key, "unknown key");
    }
  }

  static const json& array_at(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(path + "/" + key, "missing required key");
    const json& v = obj[key];
    if (!v.is_array() || v.empty()) fail(path + "/" + key, "expected a non-empty array");
    return v;
  }

  static std::string string_at(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(path + "/" + key, "missing required key");
    if (!obj[key].is_string()) fail(path + "/" + key, "expected a string");
    return obj[key].get<std::string>();
  }

  static double number_at(const json& obj, const std::string& path, const char* key) {
    if (!obj[key].is_number()) fail(path + "/" + key, "expected a number");
    return obj[key].get<double>();
  }

  static std::size_t positive_integer(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
      fail(path, "expected a positive integer");
    }
    return v.get<std::size_t>();
  }

  const json& root_;
};

struct SweepCommand {
  std::string config;
  std::optional<std::string> output;

  void attach(CLI::App& app) {
    app.add_option("--config", config, "sweep configuration (JSON)")->required();
    app.add_option("--output", output, "write results here instead of stdout");
  }

  int run(std::ostream& out) const {
    auto in = open_input(config);
    json root;
    try {
      root = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("config: invalid JSON: ") + e.what());
    }
    std::string format = "csv";
    const PhaseSweepConfig cfg = ConfigReader(root).read(format);
    emit_sweep(phase_sweep(cfg), format, output, out);
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimax support recovery under Hamming loss", "hamsel"};
  app.require_subcommand(1);

  RiskCommand risk;
  SelectCommand select;
  McCommand mc;
  PhaseCommand phase;
  SweepCommand sweep;
  auto* risk_app = app.add_subcommand("risk", "closed-form minimax risks and bounds");
  auto* select_app = app.add_subcommand("select", "run a selector on data");
  auto* mc_app = app.add_subcommand("mc", "Monte Carlo risk of one selector");
  auto* phase_app = app.add_subcommand("phase", "phase-transition table");
  auto* sweep_app = app.add_subcommand("sweep", "grid sweep from a config file");
  risk.attach(*risk_app);
  select.attach(*select_app);
  mc.attach(*mc_app);
  phase.attach(*phase_app);
  sweep.attach(*sweep_app);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (risk_app->parsed()) return risk.run(out);
    if (select_app->parsed()) return select.run(out);
    if (mc_app->parsed()) return mc.run(out, err);
    if (phase_app->parsed()) return phase.run(out, err);
    return sweep.run(out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace hamsel::cli
