// wfgraph: command-line front end. Every command reads a JSON model config
// (except `bounds` and `figures`), writes CSV with %.17g numbers and prints a
// JSON summary on stdout. Failures print {"error": {...}} on stderr.

#include <concepts>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wfgraph/config.hpp"
#include "wfgraph/dfe.hpp"
#include "wfgraph/figures.hpp"
#include "wfgraph/multilocus.hpp"
#include "wfgraph/random_models.hpp"
#include "wfgraph/simulator.hpp"
#include "wfgraph/stationary.hpp"

using nlohmann::ordered_json;
using namespace wfg;

namespace {

enum Exit { kOk = 0, kUsage = 64, kConfig = 2, kDomain = 3, kNumerical = 4, kRefused = 5, kInternal = 70 };

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DomainError("cannot open output file '" + path + "'");
  }
  void header(const std::vector<std::string>& cols) { row_text(cols); }
  template <class... Ts>
  void row(const Ts&... cells) {
    std::vector<std::string> v{cell(cells)...};
    row_text(v);
  }

 private:
  static std::string cell(double v) { return fmt17(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <std::integral T>
  static std::string cell(T v) {
    return std::to_string(v);
  }
  void row_text(const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
    out_ << '\n';
  }
  std::ofstream out_;
};

void print(const ordered_json& j) { std::cout << j.dump(2) << '\n'; }

StationaryMeasure measure_for(const ModelConfig& c, std::size_t cls, double exact_x) {
  const auto& s = c.selection_class(cls).selection;
  if (exact_x > 0.0) return exact_stationary(c.lambda().scaled(1.0 / exact_x), s, exact_x);
  return approx_stationary(c.lambda(), s, c.N);
}

ordered_json warnings_json(const StationaryMeasure& m) {
  ordered_json w = ordered_json::array();
  for (const auto& s : m.warnings()) w.push_back(s);
  return w;
}

// ---------------------------------------------------------------------------

int cmd_validate(const ModelConfig& c) {
  ordered_json j;
  j["ok"] = true;
  j["schema_version"] = c.schema_version;
  j["vertices"] = c.theta.size();
  j["edges"] = c.theta.edges().size();
  j["convention"] = c.convention;
  j["N"] = c.N;
  j["L"] = c.L;
  j["assumptions"] = {{"i", true}, {"ii", true}, {"iii", true}, {"antisymmetry", true}};
  ordered_json classes = ordered_json::array();
  const auto e = c.ensemble();
  for (std::size_t k = 0; k < e.classes().size(); ++k) {
    const auto& cl = e.classes()[k];
    classes.push_back({{"multiplicity", cl.multiplicity},
                       {"neutral", cl.selection.is_neutral()},
                       {"potential", cl.selection.is_potential()},
                       {"cycle_defect", cl.selection.cycle_defect()},
                       {"max_abs_gamma", cl.selection.max_abs()},
                       {"reversible_boundary", cl.eta.reversible}});
  }
  j["selection_classes"] = classes;
  print(j);
  return kOk;
}

int cmd_stationary(const ModelConfig& c, double exact_x, std::size_t cls, int grid, const std::string& out) {
  if (grid < 2) throw DomainError("--grid must be >= 2");
  const auto m = measure_for(c, cls, exact_x);
  const auto& g = m.graph();
  CsvWriter csv(out);
  csv.header({"quantity", "from", "to", "y", "value"});
  for (std::size_t u = 0; u < g.size(); ++u) csv.row("boundary_mass", g.label(u), g.label(u), "", m.boundary_mass(u));
  for (const Edge& e : g.edges()) csv.row("edge_mass", g.label(e.from), g.label(e.to), "", m.edge_mass(e.from, e.to));
  for (const Edge& e : g.edges()) {
    for (int i = 1; i < grid; ++i) {
      const double y = static_cast<double>(i) / grid;
      csv.row("density", g.label(e.from), g.label(e.to), fmt17(y), m.density(e.from, e.to, y));
    }
  }
  ordered_json j;
  j["mode"] = exact_x > 0.0 ? "exact" : "large_n";
  if (exact_x > 0.0) j["x"] = exact_x;
  else j["N"] = c.N;
  j["selection_class"] = cls;
  j["total_mass"] = m.total_mass();
  j["normalizer"] = m.normalizer();
  j["reversible"] = m.reversible();
  j["warnings"] = warnings_json(m);
  j["out"] = out;
  print(j);
  return kOk;
}

int cmd_afs(const ModelConfig& c, bool folded, double exact_x, std::size_t cls, int grid, const std::string& out) {
  const auto m = measure_for(c, cls, exact_x);
  const auto pts = afs(m, folded ? AfsKind::folded : AfsKind::unfolded, grid);
  CsvWriter csv(out);
  csv.header({"y", "density"});
  for (const auto& p : pts) csv.row(p.y, p.density);
  ordered_json j;
  j["kind"] = folded ? "folded" : "unfolded";
  j["mode"] = exact_x > 0.0 ? "exact" : "large_n";
  j["points"] = pts.size();
  j["warnings"] = warnings_json(m);
  j["out"] = out;
  print(j);
  return kOk;
}

int cmd_stats(const ModelConfig& c, int m, const std::string& out) {
  const auto e = c.ensemble();
  const auto sw = theta_sandwich(e);
  const double L = e.length();
  const double c1 = 1.0 + std::log(e.population_size());
  const auto poly = upper_bound(e, FrequencyFunctional::polymorphic_indicator());
  const auto seg = upper_bound(e, FrequencyFunctional::segregating_in_sample(m));
  const auto het = upper_bound(e, FrequencyFunctional::pairwise_difference(2));
  const double mono = expectation(e, FrequencyFunctional::boundary_indicator());
  const double pi = e.all_reversible() ? diversity_pi(e) : het.value / L;

  std::vector<std::pair<std::string, double>> cols = {
      {"N", e.population_size()},
      {"L", L},
      {"theta_min", e.theta_min()},
      {"theta_max", sw.theta_max},
      {"theta_hat", sw.theta_hat},
      {"theta_hat_eff", sw.theta_hat_eff},
      {"theta_eff_lower", sw.lower},
      {"monomorphic", mono},
      {"monomorphic_lower_bound", L - poly.bound_frequency_only},
      {"polymorphic", poly.value},
      {"polymorphic_bound", poly.bound_frequency_only},
      {"polymorphic_bound_theta_hat", 2.0 * c1 * sw.theta_hat},
      {"sample_size", static_cast<double>(m)},
      {"segregating_sample", seg.value},
      {"segregating_sample_bound", *seg.bound_integrable},
      {"segregating_sample_bound_theta_hat", *seg.bound_integrable_theta_hat},
      {"pi", pi},
      {"pi_bound", 2.0 * sw.theta_hat_eff / L},
      {"pi_bound_theta_hat", 2.0 * sw.theta_hat / L},
  };
  if (!out.empty()) {
    CsvWriter csv(out);
    std::vector<std::string> head;
    for (const auto& [k, v] : cols) head.push_back(k);
    csv.header(head);
    std::vector<std::string> vals;
    for (const auto& [k, v] : cols) vals.push_back(fmt17(v));
    csv.header(vals);  // single data row
  }
  ordered_json j;
  for (const auto& [k, v] : cols) j[k] = v;
  j["sandwich_holds"] = sw.holds();
  j["bounds_hold"] = poly.holds() && seg.holds() && het.holds();
  if (e.is_neutral()) {
    const auto n = neutral_statistics(e, m);
    j["neutral"] = {{"theta_hat0", n.theta_hat0},
                    {"omega_n", n.omega_n},
                    {"theta_eff", n.theta_eff},
                    {"theta_eff_linear", n.theta_eff_linear},
                    {"monomorphic", n.monomorphic},
                    {"monomorphic_linear", n.monomorphic_linear},
                    {"polymorphic", n.polymorphic},
                    {"polymorphic_bound", n.polymorphic_bound},
                    {"harmonic", n.harmonic},
                    {"segregating_sample", n.segregating_sample},
                    {"segregating_sample_bound", n.segregating_sample_bound},
                    {"pi", n.pi},
                    {"pi_bound", n.pi_bound}};
  }
  if (!out.empty()) j["out"] = out;
  print(j);
  return kOk;
}

int cmd_bounds(std::size_t sweep, std::uint64_t seed, const std::string& out) {
  if (sweep < 1) throw DomainError("--sweep must be >= 1");
  std::unique_ptr<CsvWriter> csv;
  if (!out.empty()) {
    csv = std::make_unique<CsvWriter>(out);
    csv->header({"index", "seed", "types", "classes", "L", "N", "sandwich", "f_polymorphic", "g_2", "g_5", "g_10",
                 "h_2", "worst"});
  }
  const std::vector<FrequencyFunctional> fs = {
      FrequencyFunctional::polymorphic_indicator(), FrequencyFunctional::segregating_in_sample(2),
      FrequencyFunctional::segregating_in_sample(5), FrequencyFunctional::segregating_in_sample(10),
      FrequencyFunctional::pairwise_difference(2)};
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_index = 0, failures = 0;
  for (std::size_t k = 0; k < sweep; ++k) {
    const std::uint64_t s = seed + k;
    const auto e = random_ensemble(s);
    std::vector<double> slack = {theta_sandwich(e).worst_slack};
    for (const auto& f : fs) slack.push_back(upper_bound(e, f).slack);
    const double w = *std::min_element(slack.begin(), slack.end());
    if (w < -1e-9) ++failures;
    if (w < worst) {
      worst = w;
      worst_index = k;
    }
    if (csv) {
      csv->row(k, s, e.size(), e.classes().size(), e.length(), e.population_size(), slack[0], slack[1], slack[2],
               slack[3], slack[4], slack[5], w);
    }
  }
  ordered_json j;
  j["ensembles"] = sweep;
  j["seed"] = seed;
  j["min_slack"] = worst;
  j["max_violation"] = std::max(0.0, -worst);
  j["worst_index"] = worst_index;
  j["failures"] = failures;
  j["tolerance"] = 1e-9;
  j["holds"] = failures == 0;
  if (!out.empty()) j["out"] = out;
  print(j);
  return kOk;
}

int cmd_dfe(const ModelConfig& c, bool polymorphic, bool continuous, int grid, const std::string& out) {
  ordered_json j;
  if (continuous) {
    if (!c.dfe) throw DomainError("dfe --continuous needs a 'dfe' block in the config");
    const auto d = c.dfe->build();
    CsvWriter csv(out);
    csv.header({"gamma", "density"});
    for (int i = 0; i <= grid; ++i) {
      const double x = -10.0 + 20.0 * static_cast<double>(i) / grid;
      if (x != 0.0) csv.row(x, d.density(x));
    }
    j["family"] = d.name();
    j["mean_load"] = d.mean();
    j["negative_mass"] = d.negative_mass();
    j["positive_mass"] = d.positive_mass();
    j["neutral_weight"] = d.neutral_weight();
    j["tail_error_bound"] = d.tail_error_bound();
  } else {
    const auto e = c.ensemble();
    DfeDistribution d = polymorphic ? h_pdfe(e).conditional : h_dfe(e);
    CsvWriter csv(out);
    csv.header({"gamma", "weight", "cdf"});
    for (const DfeAtom& a : d.atoms()) csv.row(a.gamma, a.weight, d.cdf(a.gamma));
    const auto sk = check_skewness(d);
    j["kind"] = polymorphic ? "polymorphic" : "novel";
    j["atoms"] = d.atoms().size();
    j["mean_load"] = mean_load(d);
    j["positive_mass"] = d.positive_mass();
    j["skewness_holds"] = sk.holds();
    if (polymorphic) j["sufficient_condition"] = check_skewness_pdfe(e).sufficient_condition;
  }
  j["out"] = out;
  print(j);
  return kOk;
}

int cmd_simulate(const ModelConfig& c, std::size_t cls, unsigned threads, const std::string& out) {
  const SimConfig sc = c.sim_config(cls, threads);
  const auto m = simulate_paths(sc);
  const auto& g = sc.graph;
  CsvWriter csv(out);
  csv.header({"quantity", "from", "to", "bin", "lower", "upper", "value"});
  for (std::size_t u = 0; u < g.size(); ++u)
    csv.row("boundary_fraction", g.label(u), g.label(u), "", "", "", m.boundary_fraction(u));
  for (const auto& e : m.edges) {
    for (std::size_t b = 0; b < m.bins + 2; ++b) {
      const double lo = e.lower(b, m.x, m.bins), hi = e.upper(b, m.x, m.bins);
      csv.row("time_fraction", g.label(e.from), g.label(e.to), b, lo, hi, e.time[b] / m.recorded_time);
      csv.row("hits", g.label(e.from), g.label(e.to), b, lo, hi, static_cast<double>(e.hits[b]));
    }
  }
  const auto exact = exact_stationary(g.scaled(1.0 / sc.x), sc.selection, sc.x);
  ordered_json j;
  j["x"] = sc.x;
  j["dt"] = sc.dt;
  j["horizon"] = sc.horizon;
  j["replicates"] = sc.replicates;
  j["seed"] = sc.seed;
  j["recorded_time"] = m.recorded_time;
  j["steps"] = m.steps;
  j["excursions"] = m.excursions;
  j["fixations"] = m.fixations;
  ordered_json b = ordered_json::array();
  std::vector<double> expected;
  for (std::size_t u = 0; u < g.size(); ++u) {
    expected.push_back(exact.boundary_mass(u));
    b.push_back({{"vertex", g.label(u)},
                 {"fraction", m.boundary_fraction(u)},
                 {"standard_error", sc.replicates > 1 ? m.boundary_fraction_se(u) : 0.0},
                 {"exact", exact.boundary_mass(u)}});
  }
  j["boundary"] = b;
  if (sc.replicates > g.size() + 1) {
    const auto chi = boundary_chi_square(m, expected);
    j["chi_square"] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}};
  }
  j["out"] = out;
  print(j);
  return kOk;
}

int cmd_figures(int which, const std::string& dir) {
  const FigureData d = figure(which);
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / ("figure" + std::to_string(which) + ".csv")).string();
  CsvWriter csv(path);
  csv.header({"quantity", "curve", "index", "x", "value"});
  for (const FigureRow& r : d.rows) csv.row(r.quantity, r.curve, r.index, r.x, r.value);
  ordered_json j;
  j["figure"] = which;
  ordered_json p;
  for (const auto& [k, v] : d.parameters) p[k] = v;
  j["parameters"] = p;
  j["rows"] = d.rows.size();
  j["out"] = path;
  print(j);
  return kOk;
}

int fail(int code, const std::string& kind, const std::string& message, const std::string& assumption = "") {
  ordered_json e;
  e["kind"] = kind;
  if (!assumption.empty()) e["assumption"] = assumption;
  e["message"] = message;
  std::cerr << ordered_json{{"error", e}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wright-Fisher graph model: stationary measures, spectra, bounds, DFEs and simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  unsigned threads = 0;
  app.add_option("-c,--config", config_path, "model config (JSON)");
  app.add_option("--threads", threads, "worker threads (default: WFGRAPH_THREADS or hardware)");

  auto* validate = app.add_subcommand("validate", "check a config against the model assumptions");

  auto* stationary = app.add_subcommand("stationary", "boundary masses, edge masses and densities");
  double exact_x = 0.0;
  std::size_t cls = 0;
  int grid = 100;
  std::string out;
  auto* ex = stationary->add_option("--exact-x", exact_x, "exact measure with entry frequency x");
  auto* ln = stationary->add_flag("--large-n", "large-N measure (default)");
  ex->excludes(ln);
  stationary->add_option("--class", cls, "selection class index");
  stationary->add_option("--grid", grid, "density grid y = i/G");
  stationary->add_option("--out", out, "CSV output")->required();

  auto* afs_cmd = app.add_subcommand("afs", "allele frequency spectrum");
  auto* folded = afs_cmd->add_flag("--folded", "minor-allele spectrum on (0, 1/2]");
  auto* unfolded = afs_cmd->add_flag("--unfolded", "derived-allele spectrum (default)");
  folded->excludes(unfolded);
  afs_cmd->add_option("--exact-x", exact_x, "use the exact measure with entry frequency x");
  afs_cmd->add_option("--class", cls, "selection class index");
  afs_cmd->add_option("--grid", grid, "grid y = i/G")->required();
  afs_cmd->add_option("--out", out, "CSV output")->required();

  auto* stats = app.add_subcommand("stats", "multi-locus statistics with their upper bounds");
  int sample_size = 2;
  stats->add_option("--sample-size", sample_size, "sample size m for S^m");
  stats->add_option("--out", out, "wide CSV output");

  auto* bounds = app.add_subcommand("bounds", "random-ensemble audit of the upper bounds");
  std::size_t sweep = 200;
  std::uint64_t seed = 1;
  bounds->add_option("--sweep", sweep, "number of random ensembles")->required();
  bounds->add_option("--seed", seed, "first seed")->required();
  bounds->add_option("--out", out, "per-ensemble CSV");

  auto* dfe = app.add_subcommand("dfe", "distribution of fitness effects");
  auto* poly = dfe->add_flag("--polymorphic", "conditional polymorphic DFE");
  auto* cont = dfe->add_flag("--continuous", "density of the config's continuous 'dfe' block");
  poly->excludes(cont);
  dfe->add_option("--grid", grid, "grid for --continuous");
  dfe->add_option("--out", out, "CSV output")->required();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo paths of the jump-diffusion");
  simulate->add_option("--class", cls, "selection class index");
  simulate->add_option("--out", out, "CSV output")->required();

  auto* figures = app.add_subcommand("figures", "data behind the published figures");
  int which = 0;
  figures->add_option("--which", which, "figure number")->required()->check(CLI::IsMember({2, 4, 5, 6}));
  figures->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  try {
    const bool needs_config = !bounds->parsed() && !figures->parsed();
    ModelConfig config;
    if (needs_config) {
      if (config_path.empty()) return fail(kUsage, "usage", "--config is required for this command");
      config = load_config(config_path);
    }
    if (validate->parsed()) return cmd_validate(config);
    if (stationary->parsed()) return cmd_stationary(config, exact_x, cls, grid, out);
    if (afs_cmd->parsed()) return cmd_afs(config, folded->count() > 0, exact_x, cls, grid, out);
    if (stats->parsed()) return cmd_stats(config, sample_size, out);
    if (bounds->parsed()) return cmd_bounds(sweep, seed, out);
    if (dfe->parsed()) return cmd_dfe(config, poly->count() > 0, cont->count() > 0, grid, out);
    if (simulate->parsed()) return cmd_simulate(config, cls, threads, out);
    if (figures->parsed()) return cmd_figures(which, out);
  } catch (const AssumptionError& e) {
    return fail(kConfig, e.kind(), e.what(), e.assumption());
  } catch (const StructuralError& e) {
    return fail(kConfig, e.kind(), e.what());
  } catch (const DomainError& e) {
    return fail(kDomain, e.kind(), e.what());
  } catch (const NumericalError& e) {
    return fail(kNumerical, e.kind(), e.what());
  } catch (const Error& e) {
    return fail(kRefused, e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what());
  }
  return fail(kUsage, "usage", "no command given");
}
