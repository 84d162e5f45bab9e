#include "iirl/cli/dispatch.hpp"

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iirl/cli/output.hpp"
#include "iirl/errors.hpp"
#include "iirl/irl_strategy.hpp"
#include "iirl/irl_utility.hpp"
#include "iirl/masking.hpp"
#include "iirl/radar.hpp"
#include "iirl/sample_complexity.hpp"
#include "iirl/serialize.hpp"
#include "iirl/synthetic.hpp"

namespace iirl::cli {

using nlohmann::json;

namespace {

std::string num(double v) { return format_number(v); }
std::string idx(std::size_t i) { return std::to_string(i); }
std::string flag(bool b) { return b ? "1" : "0"; }

CsvDocument document(const std::string& command, const std::string& seed, const json& config) {
  CsvDocument doc;
  doc.comments.push_back(std::string("iirl ") + kVersion);
  doc.comments.push_back("command: " + command);
  doc.comments.push_back("seed: " + seed);
  doc.comments.push_back("config: " + config.dump());
  return doc;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--eta-grid", "expected lo:hi:step, got '" + spec + "'");
    }
  }
  if (parts.size() != 3) throw CLI::ValidationError("--eta-grid", "expected lo:hi:step, got '" + spec + "'");
  try {
    return eta_grid(parts[0], parts[1], parts[2]);
  } catch (const Error& e) {
    throw CLI::ValidationError("--eta-grid", e.what());
  }
}

void add_cycle(CsvDocument& doc, const GarpResult& g) {
  if (!g.cycle) return;
  for (std::size_t i = 0; i < g.cycle->size(); ++i) doc.add_row({"cycle", idx(i), "", idx((*g.cycle)[i])});
}

void add_pair_terms(CsvDocument& doc, const Mat& terms) {
  for (Eigen::Index j = 0; j < terms.rows(); ++j)
    for (Eigen::Index k = 0; k < terms.cols(); ++k)
      if (j != k)
        doc.add_row({"pair_term", idx(static_cast<std::size_t>(j)), idx(static_cast<std::size_t>(k)),
                     num(terms(j, k))});
}

// ---- irl-utility ----------------------------------------------------------

struct UtilityArgs {
  std::string dataset, u_true, out;
  double tol = kGarpTolerance;
};

int run_irl_utility(const UtilityArgs& a, std::ostream& out) {
  const Dataset d = load_dataset(a.dataset);
  const GarpResult garp = garp_check(d, a.tol);
  const AfriatResult afr = afriat_test(d);
  json config = {{"dataset", a.dataset}, {"u_true", a.u_true}, {"tol", a.tol}};
  CsvDocument doc = document("irl-utility", "none", config);
  doc.header = {"record", "i", "j", "value"};
  doc.add_row({"garp_passes", "", "", flag(garp.passes)});
  doc.add_row({"afriat_feasible", "", "", flag(afr.lp.feasible)});
  add_cycle(doc, garp);
  if (afr.reconstruction) {
    for (Eigen::Index t = 0; t < afr.reconstruction->levels.size(); ++t) {
      doc.add_row({"level", idx(static_cast<std::size_t>(t)), "", num(afr.reconstruction->levels[t])});
      doc.add_row({"multiplier", idx(static_cast<std::size_t>(t)), "", num(afr.reconstruction->multipliers[t])});
    }
  }
  std::optional<MarginReport> margin;
  if (!a.u_true.empty()) {
    margin = margin_utility(d, load_function(a.u_true));
    doc.add_row({"psi_u", idx(margin->arg_j), idx(margin->arg_k), num(margin->value)});
    add_pair_terms(doc, margin->pair_terms);
  }
  write_text_file(a.out, doc.render());
  out << "GARP: " << (garp.passes ? "pass" : "fail") << "\n";
  out << "Afriat LP: " << (afr.lp.feasible ? "feasible" : "infeasible") << "\n";
  if (garp.passes != afr.lp.feasible) out << "warning: GARP and LP verdicts disagree\n";
  if (margin) out << "psi_u: " << num(margin->value) << "\n";
  return 0;
}

// ---- irl-strategy ---------------------------------------------------------

struct StrategyArgs {
  std::string dataset, g_true, out;
  std::vector<double> thresholds;
  double tol = kGarpTolerance;
};

int run_irl_strategy(const StrategyArgs& a, std::ostream& out) {
  const Dataset d = load_dataset(a.dataset);
  const GarpResult garp = garp_transformed(d, a.tol);
  const StrategyResult res = strategy_feasibility_test(d);
  json config = {{"dataset", a.dataset}, {"g_true", a.g_true}, {"thresholds", a.thresholds}, {"tol", a.tol}};
  CsvDocument doc = document("irl-strategy", "none", config);
  doc.header = {"record", "i", "j", "value"};
  doc.add_row({"transformed_garp_passes", "", "", flag(garp.passes)});
  doc.add_row({"feasible", "", "", flag(res.lp.feasible)});
  add_cycle(doc, garp);
  if (res.reconstruction) {
    for (Eigen::Index t = 0; t < res.reconstruction->thresholds.size(); ++t) {
      doc.add_row({"threshold", idx(static_cast<std::size_t>(t)), "", num(res.reconstruction->thresholds[t])});
      doc.add_row({"multiplier", idx(static_cast<std::size_t>(t)), "", num(res.reconstruction->multipliers[t])});
    }
  }
  std::optional<MarginReport> margin;
  if (!a.g_true.empty()) {
    if (!a.thresholds.empty() && a.thresholds.size() != d.horizon())
      throw ConfigError("cli.irl-strategy", "--thresholds needs one value per observation");
    std::vector<Vec> xs;
    std::vector<FunctionSpec> us;
    for (const auto& e : d.entries) {
      xs.push_back(e.response);
      us.push_back(e.function);
    }
    margin = margin_strategy(xs, us, a.thresholds, load_function(a.g_true));
    doc.add_row({"psi_g", idx(margin->arg_j), idx(margin->arg_k), num(margin->value)});
    if (margin->threshold_value) doc.add_row({"psi_g_threshold_form", "", "", num(*margin->threshold_value)});
    add_pair_terms(doc, margin->pair_terms);
  }
  write_text_file(a.out, doc.render());
  out << "transformed GARP: " << (garp.passes ? "pass" : "fail") << "\n";
  out << "budget LP: " << (res.lp.feasible ? "feasible" : "infeasible") << "\n";
  if (garp.passes != res.lp.feasible) out << "warning: GARP and LP verdicts disagree\n";
  if (margin) out << "psi_g: " << num(margin->value) << "\n";
  return 0;
}

// ---- mask -----------------------------------------------------------------

struct MaskArgs {
  std::string scenario, out, eta_grid;
  std::optional<double> eta;
  std::optional<std::uint64_t> seed;
};

int run_mask(const MaskArgs& a, std::ostream& out) {
  MaskingProblem p = load_scenario(a.scenario);
  if (a.seed) p.options.inner.seed = *a.seed;
  const std::vector<double> etas = a.eta ? std::vector<double>{*a.eta} : parse_grid(a.eta_grid);
  for (double e : etas)
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("cli.mask", "eta must lie in [0, 1]");
  json config = {{"scenario", a.scenario}, {"etas", etas}, {"solver", scenario_to_json(p)["solver"]}};
  CsvDocument doc = document("mask", std::to_string(p.options.inner.seed), config);
  doc.header = {"eta", "t", "gamma", "gamma_star", "violation_norm", "psi_true", "psi_masked", "feasible"};

  const auto curve = violation_curve(p, etas);
  bool failed = false;
  for (const auto& c : curve) {
    if (!c.result) {
      failed = true;
      doc.comments.push_back("eta " + num(c.eta) + " failed: " + c.error);
      for (std::size_t t = 0; t < p.horizon(); ++t)
        doc.add_row({num(c.eta), idx(t), num(p.thresholds[t]), "nan", "nan", num(c.psi_true), "nan", "0"});
      out << "eta " << num(c.eta) << ": failed: " << c.error << "\n";
      continue;
    }
    const MaskingResult& r = *c.result;
    for (std::size_t t = 0; t < p.horizon(); ++t)
      doc.add_row({num(c.eta), idx(t), num(r.thresholds[t]), num(r.masked_thresholds[t]), num(r.violation_norm),
                   num(r.psi_true), num(r.psi_masked), flag(r.feasible)});
    for (const auto& w : r.warnings) doc.comments.push_back("eta " + num(c.eta) + ": " + w);
    out << "eta " << num(c.eta) << ": violation " << num(r.violation_norm) << ", psi_true " << num(r.psi_true)
        << ", psi_masked " << num(r.psi_masked) << (r.feasible ? "" : " (target missed)") << "\n";
  }
  write_text_file(a.out, doc.render());
  if (failed && etas.size() == 1) throw MaskingInfeasible("iirl.mask_strategy", curve.front().error);
  return 0;
}

// ---- bound ----------------------------------------------------------------

struct BoundArgs {
  std::string scenario, out, form = "appendix";
  double sigma2 = 0.01;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::optional<double> eta;
};

int run_bound(const BoundArgs& a, std::ostream& out) {
  MaskingProblem p = load_scenario(a.scenario);
  if (a.eta) p.eta = *a.eta;
  validate_problem(p);
  if (!(a.sigma2 > 0.0)) throw ConfigError("cli.bound", "--sigma2 must be positive");
  const NoiseModel noise = NoiseModel::isotropic(p.budget.dimension(), a.sigma2, a.seed);
  StudyOptions opts;
  opts.form = error_form_from_string(a.form);
  const NoiseStudy s = empirical_error_probability(p, noise, a.trials, opts);

  json config = {{"scenario", a.scenario}, {"sigma2", a.sigma2}, {"trials", a.trials},
                 {"form", a.form},         {"eta", p.eta},       {"solver", scenario_to_json(p)["solver"]}};
  CsvDocument doc = document("bound", std::to_string(a.seed), config);
  doc.header = {"trial", "valid", "exceed", "margin", "spread", "kappa"};
  for (const auto& t : s.trials)
    doc.add_row({idx(t.id), flag(t.valid), flag(t.exceed), num(t.margin), num(t.spread), num(t.kappa)});
  doc.add_row({"summary", "p_err", "wilson_lower", "wilson_upper", "bound", "bound_with_safety"});
  doc.add_row({"summary", num(s.p_err), num(s.wilson.lower), num(s.wilson.upper), num(s.bound),
               num(s.bound_with_safety)});
  doc.add_row({"constants", "L", "delta_max", "kappa", "n_valid", "n_invalid"});
  doc.add_row({"constants", num(s.constants.L), num(s.constants.delta_max), num(s.constants.kappa),
               idx(s.n_valid), idx(s.n_invalid)});
  if (s.bound_heuristic) doc.comments.push_back("anisotropic noise: bound is heuristic");
  write_text_file(a.out, doc.render());
  out << "P_err " << num(s.p_err) << " [" << num(s.wilson.lower) << ", " << num(s.wilson.upper) << "]"
      << ", bound " << num(s.bound) << " (x" << num(s.safety) << " safety: " << num(s.bound_with_safety) << ")\n";
  out << "L " << num(s.constants.L) << ", Delta_max " << num(s.constants.delta_max) << ", kappa "
      << num(s.constants.kappa) << "\n";
  return 0;
}

// ---- radar-fig2 -----------------------------------------------------------

struct RadarArgs {
  std::size_t k = 100;
  Eigen::Index m = 6;
  std::uint64_t seed = 0;
  std::string eta_grid = "0.05:0.95:0.05";
  std::string out_dir;
  bool no_zero = false;
  double gamma_lo = RadarConfig{}.gamma_lo;
  double gamma_hi = RadarConfig{}.gamma_hi;
};

int run_radar(const RadarArgs& a, std::ostream& out) {
  RadarConfig c;
  c.K = a.k;
  c.m = a.m;
  c.seed = a.seed;
  c.etas = parse_grid(a.eta_grid);
  c.prepend_zero = !a.no_zero;
  c.gamma_lo = a.gamma_lo;
  c.gamma_hi = a.gamma_hi;
  const Fig2Result r = run_fig2_experiment(c);

  std::filesystem::create_directories(a.out_dir);
  json config = {{"k", a.k}, {"m", a.m}, {"eta_grid", a.eta_grid}, {"prepend_zero", c.prepend_zero},
                 {"q_diag", c.q_diag}, {"p_diag", {c.p_diag_lo, c.p_diag_hi}}, {"p_off", c.p_off},
                 {"zeta", c.zeta}, {"price", {c.price_lo, c.price_hi}}, {"gamma", {c.gamma_lo, c.gamma_hi}},
                 {"candidate_pairs", c.masking.candidate_pairs}, {"polish_evals", c.masking.polish_evals},
                 {"n_starts", c.masking.inner.n_starts}};
  CsvDocument doc = document("radar-fig2", std::to_string(a.seed), config);
  doc.comments.push_back("violation_norm = sqrt(sum_t (gamma*_t - gamma_t)^2)");
  doc.comments.push_back("spearman: " + num(r.spearman) + ", trend_ok: " + flag(r.trend_ok));
  doc.comments.push_back("sinr monotonicity spot-check: " + idx(r.monotonicity.violations) + " of " +
                         idx(r.monotonicity.checked) + " pairs decreasing");
  doc.header = {"eta", "violation_norm", "psi_true", "psi_masked", "ok"};
  PlotSeries plot;
  plot.title = "Deliberate constraint violation vs masking extent";
  plot.x_label = "eta";
  plot.y_label = "violation norm";
  for (const auto& p : r.curve) {
    doc.add_row({num(p.eta), p.ok ? num(p.violation_norm) : "nan", num(p.psi_true),
                 p.ok ? num(p.psi_masked) : "nan", flag(p.ok)});
    if (!p.ok) doc.comments.push_back("eta " + num(p.eta) + ": " + p.error);
    plot.x.push_back(p.eta);
    plot.y.push_back(p.ok ? p.violation_norm : std::nan(""));
  }
  const std::filesystem::path dir(a.out_dir);
  write_text_file(dir / "curve.csv", doc.render());
  emit_plot(plot, dir / "curve.svg");
  out << "spearman " << num(r.spearman) << ", trend " << (r.trend_ok ? "nondecreasing" : "NOT nondecreasing")
      << "\n";
  if (r.monotonicity.flagged())
    out << "note: SINR decreased along " << r.monotonicity.violations << " of " << r.monotonicity.checked
        << " componentwise increases (scenario flagged)\n";
  return 0;
}

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
  std::string kind, out, truth_out;
  std::size_t k = 10;
  Eigen::Index m = 2;
  std::uint64_t seed = 0;
  double eta = 0.5;
};

const std::vector<std::string> kKinds = {"utility-rational",      "utility-irrational",  "strategy-rational",
                                         "strategy-irrational",   "scenario-cobb-douglas", "scenario-quadratic",
                                         "scenario-radar"};

int run_generate(const GenerateArgs& a, std::ostream& out) {
  Rng rng(a.seed);
  auto save_truth = [&](const FunctionSpec& f) {
    if (!a.truth_out.empty()) save_function(f, a.truth_out);
  };
  if (a.kind == "utility-rational" || a.kind == "utility-irrational") {
    Generated g = rational_utility_dataset(rng, a.k, a.m, UtilityFamily::cobb_douglas);
    if (a.kind == "utility-irrational") g.data = irrational_utility_dataset(rng, g.data);
    save_dataset(g.data, a.out);
    save_truth(g.truth);
  } else if (a.kind == "strategy-rational" || a.kind == "strategy-irrational") {
    GeneratedStrategy g = rational_strategy_dataset(rng, a.k, a.m);
    if (a.kind == "strategy-irrational") g.data = irrational_strategy_dataset(rng, g.data);
    save_dataset(g.data, a.out);
    save_truth(g.budget);
  } else if (a.kind == "scenario-cobb-douglas") {
    save_scenario(cobb_douglas_scenario(rng, a.k, a.m, a.eta), a.out);
  } else if (a.kind == "scenario-quadratic") {
    save_scenario(quadratic_scenario(rng, a.k, a.m, a.eta), a.out);
  } else {
    RadarConfig c;
    c.K = a.k;
    c.m = a.m;
    c.seed = a.seed;
    Rng radar_rng(a.seed);
    MaskingProblem p = radar_masking_problem(sample_scenario(c, radar_rng), a.eta, c.masking);
    p.options.inner.seed = mix_seed(a.seed, 2);
    save_scenario(p, a.out);
  }
  out << "wrote " << a.kind << " to " << a.out << "\n";
  return 0;
}

// ---- validate -------------------------------------------------------------

struct ValidateArgs {
  std::string dataset, scenario;
  double tol = kActivityTolerance;
};

int run_validate(const ValidateArgs& a, std::ostream& out) {
  if (!a.scenario.empty()) {
    const MaskingProblem p = load_scenario(a.scenario);
    out << "scenario valid: K=" << p.horizon() << ", m=" << p.budget.dimension() << "\n";
    return 0;
  }
  const Dataset d = load_dataset(a.dataset);
  const auto violations = validate_dataset(d, a.tol);
  if (violations.empty()) {
    out << "dataset valid: mode=" << to_string(d.mode) << ", K=" << d.horizon() << ", m=" << d.dimension() << "\n";
    return 0;
  }
  std::ostringstream msg;
  msg << violations.size() << " violation(s)";
  for (const auto& v : violations)
    msg << "; " << (v.index ? "t=" + std::to_string(*v.index) + " " : "") << v.field << ": " << v.message
        << " (" << num(v.magnitude) << ")";
  throw ValidationError("core.validate_dataset", msg.str());
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Revealed-preference IRL tests and strategy masking", "iirl"};
  app.set_version_flag("--version", std::string("iirl ") + kVersion);
  app.require_subcommand(1);

  UtilityArgs ua;
  auto* cu = app.add_subcommand("irl-utility", "GARP and Afriat tests of a utility-test dataset");
  cu->add_option("--dataset", ua.dataset, "dataset JSON")->required();
  cu->add_option("--u-true", ua.u_true, "function JSON of the true utility, for the margin");
  cu->add_option("--out", ua.out, "output CSV")->required();
  cu->add_option("--tol", ua.tol, "strictness tolerance")->capture_default_str();

  StrategyArgs sa;
  auto* cs = app.add_subcommand("irl-strategy", "budget (strategy) test of a strategy-test dataset");
  cs->add_option("--dataset", sa.dataset, "dataset JSON")->required();
  cs->add_option("--g-true", sa.g_true, "function JSON of the true budget base, for the margin");
  cs->add_option("--thresholds", sa.thresholds, "true thresholds, for the threshold-form margin")->delimiter(',');
  cs->add_option("--out", sa.out, "output CSV")->required();
  cs->add_option("--tol", sa.tol, "strictness tolerance")->capture_default_str();

  MaskArgs ma;
  auto* cm = app.add_subcommand("mask", "minimal threshold violation for a masking extent");
  cm->add_option("--scenario", ma.scenario, "scenario JSON")->required();
  auto* eta_opt = cm->add_option("--eta", ma.eta, "masking extent in [0, 1]");
  auto* grid_opt = cm->add_option("--eta-grid", ma.eta_grid, "lo:hi:step");
  eta_opt->excludes(grid_opt);
  cm->add_option("--seed", ma.seed, "overrides the inner solver seed");
  cm->add_option("--out", ma.out, "output CSV")->required();

  BoundArgs ba;
  auto* cb = app.add_subcommand("bound", "Monte Carlo error probability against the analytic bound");
  cb->add_option("--scenario", ba.scenario, "scenario JSON")->required();
  cb->add_option("--sigma2", ba.sigma2, "isotropic noise variance")->required();
  cb->add_option("--trials", ba.trials, "number of trials")->capture_default_str();
  cb->add_option("--seed", ba.seed, "noise seed")->required();
  cb->add_option("--eta", ba.eta, "overrides the scenario's masking extent");
  cb->add_option("--form", ba.form, "error event: appendix or literal")
      ->check(CLI::IsMember({"appendix", "literal"}))
      ->capture_default_str();
  cb->add_option("--out", ba.out, "output CSV")->required();

  RadarArgs ra;
  auto* cr = app.add_subcommand("radar-fig2", "radar masking curve: violation against eta");
  cr->add_option("--k", ra.k, "horizon K")->capture_default_str();
  cr->add_option("--m", ra.m, "response dimension m")->capture_default_str();
  cr->add_option("--seed", ra.seed, "scenario seed")->required();
  cr->add_option("--eta-grid", ra.eta_grid, "lo:hi:step")->capture_default_str();
  cr->add_flag("--no-zero", ra.no_zero, "omit the eta = 0 row");
  cr->add_option("--gamma-lo", ra.gamma_lo, "lower end of the threshold distribution")->capture_default_str();
  cr->add_option("--gamma-hi", ra.gamma_hi, "upper end of the threshold distribution")->capture_default_str();
  cr->add_option("--out-dir", ra.out_dir, "directory for curve.csv and curve.svg")->required();

  GenerateArgs ga;
  auto* cg = app.add_subcommand("generate", "synthetic datasets and scenarios");
  cg->add_option("--kind", ga.kind, "what to generate")->required()->check(CLI::IsMember(kKinds));
  cg->add_option("--k", ga.k, "horizon K")->capture_default_str();
  cg->add_option("--m", ga.m, "dimension m")->capture_default_str();
  cg->add_option("--seed", ga.seed, "generator seed")->required();
  cg->add_option("--eta", ga.eta, "masking extent stored in scenarios")->capture_default_str();
  cg->add_option("--truth-out", ga.truth_out, "also write the generating function (datasets only)");
  cg->add_option("--out", ga.out, "output JSON")->required();

  ValidateArgs va;
  auto* cv = app.add_subcommand("validate", "schema and invariant checks of an input file");
  auto* vd = cv->add_option("--dataset", va.dataset, "dataset JSON");
  auto* vs = cv->add_option("--scenario", va.scenario, "scenario JSON");
  vd->excludes(vs);
  cv->add_option("--tol", va.tol, "activity tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (cm->parsed() && !ma.eta && ma.eta_grid.empty())
      throw CLI::RequiredError("mask needs --eta or --eta-grid");
    if (cv->parsed() && va.dataset.empty() && va.scenario.empty())
      throw CLI::RequiredError("validate needs --dataset or --scenario");
    if (cr->parsed()) parse_grid(ra.eta_grid);
    if (cm->parsed() && !ma.eta) parse_grid(ma.eta_grid);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "iirl " << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (cu->parsed()) return run_irl_utility(ua, out);
    if (cs->parsed()) return run_irl_strategy(sa, out);
    if (cm->parsed()) return run_mask(ma, out);
    if (cb->parsed()) return run_bound(ba, out);
    if (cr->parsed()) return run_radar(ra, out);
    if (cg->parsed()) return run_generate(ga, out);
    if (cv->parsed()) return run_validate(va, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error: core.serialize: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: cli.output: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace iirl::cli
