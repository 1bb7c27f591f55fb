#pragma once

// L-locus ensembles with shared mutation intensities theta_uv = lambda_uv L and
// per-locus selection, grouped into classes of identical loci.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wfgraph/errors.hpp"
#include "wfgraph/graph_model.hpp"
#include "wfgraph/kernels.hpp"
#include "wfgraph/quadrature.hpp"
#include "wfgraph/stationary.hpp"

namespace wfg {

struct SelectionClass {
  SelectionSpec selection;
  std::uint64_t multiplicity = 1;
};

/// Per-class state: scaled boundary measure, K_gamma per edge and Omega_N.
struct LocusClass {
  SelectionSpec selection;
  std::uint64_t multiplicity = 1;
  BoundaryMeasure eta;
  SquareMatrix k;
  double omega_n = 1.0;
  double theta_hat = 0.0;  // sum_u eta_u theta_u
};

class LocusEnsemble {
 public:
  LocusEnsemble(AlleleGraph theta, std::vector<SelectionClass> classes, std::uint64_t loci, double N)
      : theta_(std::move(theta)), loci_(loci), n_(N) {
    require_valid(theta_);
    if (loci_ == 0) throw DomainError("number of loci must be positive");
    if (!(N >= kMinPopulationSize) || !std::isfinite(N)) {
      std::ostringstream msg;
      msg << "population size N must be >= " << kMinPopulationSize << ", got " << N;
      throw DomainError(msg.str());
    }
    if (classes.empty()) throw StructuralError("ensemble needs at least one selection class");
    std::uint64_t total = 0;
    for (const SelectionClass& c : classes) {
      if (c.multiplicity == 0) throw StructuralError("selection class multiplicity must be positive");
      if (c.selection.size() != theta_.size()) throw StructuralError("selection class size differs from graph");
      total += c.multiplicity;
    }
    if (total != loci_) {
      std::ostringstream msg;
      msg << "class multiplicities sum to " << total << " but L = " << loci_;
      throw StructuralError(msg.str());
    }
    const double log_n = std::log(N);
    const double inv_l = 1.0 / static_cast<double>(loci_);
    for (SelectionClass& c : classes) {
      LocusClass lc;
      lc.selection = std::move(c.selection);
      lc.multiplicity = c.multiplicity;
      lc.eta = boundary_measure(theta_, lc.selection, BoundaryMode::scaled);
      lc.k = SquareMatrix(theta_.size());
      double sum = 0.0;
      for (const Edge& e : theta_.edges()) {
        const double kk = K(Gamma(lc.selection.gamma(e.from, e.to)));
        lc.k(e.from, e.to) = kk;
        sum += lc.eta[e.from] * theta_.rate(e.from, e.to) * (1.0 + log_n + kk);
      }
      lc.omega_n = 1.0 + 2.0 * inv_l * sum;
      for (std::size_t u = 0; u < theta_.size(); ++u) lc.theta_hat += lc.eta[u] * theta_.total_rate(u);
      classes_.push_back(std::move(lc));
    }
  }

  /// Graph carrying theta_uv as rates.
  const AlleleGraph& theta_graph() const { return theta_; }
  double theta(std::size_t u, std::size_t v) const { return theta_.rate(u, v); }
  double theta_total(std::size_t u) const { return theta_.total_rate(u); }
  std::uint64_t loci() const { return loci_; }
  double length() const { return static_cast<double>(loci_); }
  double population_size() const { return n_; }
  const std::vector<LocusClass>& classes() const { return classes_; }
  std::size_t size() const { return theta_.size(); }

  double theta_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < size(); ++u) m = std::min(m, theta_total(u));
    return m;
  }
  double theta_max() const {
    double m = 0.0;
    for (std::size_t u = 0; u < size(); ++u) m = std::max(m, theta_total(u));
    return m;
  }

  /// Per-locus mutation graph lambda_uv = theta_uv / L.
  AlleleGraph lambda_graph() const { return theta_.scaled(1.0 / length()); }

  /// Large-N stationary measure of one class, consistent with this ensemble.
  StationaryMeasure class_measure(std::size_t j) const {
    return approx_stationary(lambda_graph(), classes_.at(j).selection, n_);
  }

  bool all_reversible() const {
    for (const LocusClass& c : classes_)
      if (!c.eta.reversible) return false;
    return true;
  }

  bool is_neutral() const {
    for (const LocusClass& c : classes_)
      if (!c.selection.is_neutral()) return false;
    return true;
  }

 private:
  AlleleGraph theta_;
  std::uint64_t loci_;
  double n_;
  std::vector<LocusClass> classes_;
};

/// theta-hat = L^{-1} sum_j sum_u eta^j_u theta_u.
inline double theta_hat(const LocusEnsemble& e) {
  double s = 0.0;
  for (const LocusClass& c : e.classes()) s += static_cast<double>(c.multiplicity) * c.theta_hat;
  return s / e.length();
}

/// theta-hat_eff = sum_u mu-hat_u theta_u, mu-hat_u = L^{-1} sum_j eta^j_u / Omega^j_N.
inline double theta_hat_eff(const LocusEnsemble& e) {
  double s = 0.0;
  for (const LocusClass& c : e.classes()) s += static_cast<double>(c.multiplicity) * c.theta_hat / c.omega_n;
  return s / e.length();
}

struct ThetaSandwich {
  double lower;  // theta_min / (1 + 2 L^{-1} (1 + ln N) theta_min)
  double theta_hat_eff;
  double theta_hat;
  double theta_max;
  /// Smallest gap in the chain lower <= eff <= hat <= max, relative to theta_max.
  double worst_slack;
  bool holds(double tol = 1e-9) const { return worst_slack >= -tol; }
};

inline ThetaSandwich theta_sandwich(const LocusEnsemble& e) {
  ThetaSandwich s;
  const double tmin = e.theta_min();
  s.lower = tmin / (1.0 + 2.0 * (1.0 + std::log(e.population_size())) * tmin / e.length());
  s.theta_hat_eff = theta_hat_eff(e);
  s.theta_hat = theta_hat(e);
  s.theta_max = e.theta_max();
  const double scale = s.theta_max;
  s.worst_slack = std::min({s.theta_hat_eff - s.lower, s.theta_hat - s.theta_hat_eff, s.theta_max - s.theta_hat}) /
                  scale;
  return s;
}

// ---------------------------------------------------------------------------
// Functionals

/// f on D: boundary values f_uu(0) and edge functions f_uv(y). The edge
/// function evaluated at y = 0 is taken as the right limit f_uv(0+).
class FrequencyFunctional {
 public:
  enum class Kind { custom, boundary_indicator, polymorphic_indicator, segregating_sample, pairwise_difference };

  static FrequencyFunctional boundary_indicator() {
    FrequencyFunctional f("f_boundary", Kind::boundary_indicator);
    f.boundary_ = [](std::size_t) { return 1.0; };
    f.edge_ = [](std::size_t, std::size_t, double) { return 0.0; };
    f.integrable_ = true;
    f.type_independent_ = false;
    return f;
  }

  static FrequencyFunctional polymorphic_indicator() {
    FrequencyFunctional f("f_polymorphic", Kind::polymorphic_indicator);
    f.edge_ = [](std::size_t, std::size_t, double) { return 1.0; };
    f.integrable_ = false;
    return f;
  }

  /// g_m(y) = 1 - y^m - (1 - y)^m.
  static FrequencyFunctional segregating_in_sample(int m) {
    if (m < 2 || m > 10000) throw DomainError("sample size m must lie in [2, 10000]");
    FrequencyFunctional f("g_" + std::to_string(m), Kind::segregating_sample);
    f.m_ = m;
    f.edge_ = [m](std::size_t, std::size_t, double y) { return g_m(m, y); };
    f.integrable_ = true;
    return f;
  }

  /// h_m(y) = 2 y (1 - y), identical for every sample size m >= 2.
  static FrequencyFunctional pairwise_difference(int m = 2) {
    if (m < 2 || m > 10000) throw DomainError("sample size m must lie in [2, 10000]");
    FrequencyFunctional f("h_" + std::to_string(m), Kind::pairwise_difference);
    f.m_ = m;
    f.edge_ = [](std::size_t, std::size_t, double y) { return 2.0 * y * (1.0 - y); };
    f.integrable_ = true;
    return f;
  }

  /// f_uu(0) = values[u], zero on edges.
  static FrequencyFunctional boundary_values(std::vector<double> values, std::string name = "boundary_values") {
    FrequencyFunctional f(std::move(name), Kind::custom);
    f.boundary_ = [values = std::move(values)](std::size_t u) { return values.at(u); };
    f.edge_ = [](std::size_t, std::size_t, double) { return 0.0; };
    f.integrable_ = true;
    f.type_independent_ = false;
    return f;
  }

  /// Type-independent f(y) on edges, zero on vertices.
  static FrequencyFunctional frequency_only(std::string name, std::function<double(double)> fy, bool integrable) {
    FrequencyFunctional f(std::move(name), Kind::custom);
    f.edge_ = [fy = std::move(fy)](std::size_t, std::size_t, double y) { return fy(y); };
    f.integrable_ = integrable;
    return f;
  }

  static FrequencyFunctional custom(std::string name, std::function<double(std::size_t)> boundary,
                                    std::function<double(std::size_t, std::size_t, double)> edge, bool integrable) {
    FrequencyFunctional f(std::move(name), Kind::custom);
    f.boundary_ = std::move(boundary);
    f.edge_ = std::move(edge);
    f.integrable_ = integrable;
    f.type_independent_ = false;
    return f;
  }

  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }
  int sample_size() const { return m_; }
  bool integrable() const { return integrable_; }
  bool type_independent() const { return type_independent_; }
  double boundary(std::size_t u) const { return boundary_(u); }
  double edge(std::size_t u, std::size_t v, double y) const { return edge_(u, v, y); }
  double right_limit(std::size_t u, std::size_t v) const { return edge_(u, v, 0.0); }

  static double g_m(int m, double y) {
    if (y <= 0.0 || y >= 1.0) return 0.0;
    return -std::expm1(m * std::log1p(-y)) - std::pow(y, m);
  }

 private:
  FrequencyFunctional(std::string name, Kind kind) : name_(std::move(name)), kind_(kind) {}

  std::string name_;
  Kind kind_;
  int m_ = 0;
  bool integrable_ = false;
  bool type_independent_ = true;
  std::function<double(std::size_t)> boundary_ = [](std::size_t) { return 0.0; };
  std::function<double(std::size_t, std::size_t, double)> edge_;
};

enum class ExpectationMethod {
  automatic,   // closed forms for f_boundary, f_polymorphic, h_m, neutral g_m
  quadrature,  // always integrate the edge kernel
};

namespace multilocus_detail {

/// int_a^1 f(y) q_gamma(1 - y) / (y (1 - y)) dy, a = 0 or 1/N.
template <class Fn>
double edge_integral(double gamma, const Fn& f, double a) {
  const Gamma g(gamma);
  auto integrand = [&](double y) {
    if (y <= 0.0 || y >= 1.0) return 0.0;
    const double fy = f(y);
    if (fy == 0.0) return 0.0;
    return fy * edge_kernel(g, y);
  };
  quad::Options opt;
  opt.abs_tol = 1e-300;
  opt.rel_tol = 1e-12;
  opt.singular_left = a == 0.0;
  if (a > 0.0)
    for (double p = a * 4.0; p < 0.5; p *= 4.0) opt.breakpoints.push_back(p);
  const double ag = std::abs(gamma);
  if (ag > 0.5) {
    for (double k : {1.0, 4.0, 16.0}) {
      const double s = k / (2.0 * ag);
      if (s < 0.5) opt.breakpoints.push_back(gamma > 0.0 ? 1.0 - s : s);
    }
  }
  opt.breakpoints.push_back(0.5);
  const quad::Result r = quad::integrate(integrand, a, 1.0, opt);
  if (!r.converged && !(r.error <= 1e-14 * std::max(1.0, std::abs(r.value)))) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "edge functional integral (gamma=" << gamma << ", lower=" << a << ") did not converge: value=" << r.value
        << " error=" << r.error;
    throw NumericalError(msg.str());
  }
  return r.value;
}

/// int_0^1 q_gamma(t) dt = (omega_gamma - 1) / (2 gamma).
inline double mean_fixation(double gamma) {
  const double z = 2.0 * gamma;
  if (std::abs(z) < 1e-3) return 0.5 + z / 12.0 - z * z * z / 720.0;
  return (omega(Gamma(gamma)) - 1.0) / z;
}

inline double harmonic(int n) {
  double s = 0.0;
  for (int k = n; k >= 1; --k) s += 1.0 / k;
  return s;
}

}  // namespace multilocus_detail

/// Steady-state expectation E_N<X_inf, f> summed over loci.
///
/// Per locus: sum_u f_uu(0) eta_u / Omega_N plus, per directed edge,
/// (2 eta_u theta_uv / (L Omega_N)) times
///   int_0^1 f q_gamma(1-y)/(y(1-y)) dy                    if f is flagged integrable,
///   f(0+) + int_{1/N}^1 f q_gamma(1-y)/(y(1-y)) dy        otherwise.
/// The polymorphic indicator uses 1 + ln N + K_gamma for the bracket.
inline double expectation(const LocusEnsemble& e, const FrequencyFunctional& f,
                          ExpectationMethod method = ExpectationMethod::automatic) {
  using Kind = FrequencyFunctional::Kind;
  const AlleleGraph& g = e.theta_graph();
  const double L = e.length();
  const double N = e.population_size();
  const bool closed = method == ExpectationMethod::automatic;

  if (closed && f.kind() == Kind::boundary_indicator) {
    double s = 0.0;
    for (const LocusClass& c : e.classes()) s += static_cast<double>(c.multiplicity) / c.omega_n;
    return s;
  }
  if (closed && f.kind() == Kind::polymorphic_indicator) {
    double s = 0.0;
    for (const LocusClass& c : e.classes()) s += static_cast<double>(c.multiplicity) * (c.omega_n - 1.0) / c.omega_n;
    return s;
  }

  if (f.integrable()) {
    for (const Edge& ed : g.edges()) {
      if (f.right_limit(ed.from, ed.to) != 0.0) {
        throw RefusedError("functional '" + f.name() + "' is flagged integrable but f(0+) != 0");
      }
    }
  }

  // Edge brackets depend only on (gamma, edge) for type-dependent f and on
  // gamma alone otherwise.
  std::map<std::pair<double, std::size_t>, double> cache;
  auto bracket = [&](const LocusClass& c, std::size_t u, std::size_t v) {
    const double gamma = c.selection.gamma(u, v);
    if (closed && f.kind() == Kind::pairwise_difference) return 2.0 * multilocus_detail::mean_fixation(gamma);
    if (closed && f.kind() == Kind::segregating_sample && gamma == 0.0) {
      return multilocus_detail::harmonic(f.sample_size() - 1);
    }
    const std::size_t key_edge = f.type_independent() ? 0 : u * g.size() + v + 1;
    const auto key = std::make_pair(gamma, key_edge);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    auto fy = [&](double y) { return f.edge(u, v, y); };
    double val;
    if (f.kind() == Kind::polymorphic_indicator || !f.integrable()) {
      val = f.right_limit(u, v) + multilocus_detail::edge_integral(gamma, fy, 1.0 / N);
    } else {
      val = multilocus_detail::edge_integral(gamma, fy, 0.0);
    }
    cache.emplace(key, val);
    return val;
  };

  double total = 0.0;
  for (const LocusClass& c : e.classes()) {
    double locus = 0.0;
    for (std::size_t u = 0; u < g.size(); ++u) {
      const double fb = f.boundary(u);
      if (fb != 0.0) locus += fb * c.eta[u] / c.omega_n;
    }
    for (const Edge& ed : g.edges()) {
      const double pref = 2.0 * std::exp(c.eta.log_weights[ed.from]) * g.rate(ed.from, ed.to) / (L * c.omega_n);
      locus += pref * bracket(c, ed.from, ed.to);
    }
    total += static_cast<double>(c.multiplicity) * locus;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Neutral reference statistics

struct NeutralStatistics {
  double theta_hat0;
  double theta_eff;            // theta0 / (1 + 2 L^{-1} (1 + ln N) theta0)
  double theta_eff_linear;     // theta0 (1 - 2 (1 + ln N) theta0 / L)
  double monomorphic;          // L / Omega_N
  double monomorphic_linear;   // L - 2 (1 + ln N) theta0
  double polymorphic;          // L - L / Omega_N = 2 (1 + ln N) theta_eff
  double polymorphic_bound;    // 2 (1 + ln N) theta0
  int sample_size;
  double harmonic;             // sum_{k=1}^{m-1} 1/k
  double segregating_sample;   // 2 theta_eff H_{m-1}
  double segregating_sample_cutoff;  // 2 theta_eff int_{1/N}^1 g_m / y
  double segregating_sample_bound;   // 2 theta0 H_{m-1}
  double pi;                   // 2 theta_eff / L
  double pi_bound;             // 2 theta0 / L
  double omega_n;
};

inline NeutralStatistics neutral_statistics(const LocusEnsemble& e, int m = 2) {
  if (!e.is_neutral()) throw RefusedError("neutral_statistics requires gamma = 0 at every locus; use expectation()");
  if (m < 2 || m > 10000) throw DomainError("sample size m must lie in [2, 10000]");
  NeutralStatistics s;
  const double L = e.length();
  const double c = 1.0 + std::log(e.population_size());
  s.theta_hat0 = theta_hat(e);
  s.omega_n = 1.0 + 2.0 * c * s.theta_hat0 / L;
  s.theta_eff = s.theta_hat0 / s.omega_n;
  s.theta_eff_linear = s.theta_hat0 * (1.0 - 2.0 * c * s.theta_hat0 / L);
  s.monomorphic = L / s.omega_n;
  s.monomorphic_linear = L - 2.0 * c * s.theta_hat0;
  s.polymorphic = 2.0 * c * s.theta_eff;
  s.polymorphic_bound = 2.0 * c * s.theta_hat0;
  s.sample_size = m;
  s.harmonic = multilocus_detail::harmonic(m - 1);
  s.segregating_sample = 2.0 * s.theta_eff * s.harmonic;
  const double inv_n = 1.0 / e.population_size();
  quad::Options opt;
  opt.rel_tol = 1e-13;
  opt.abs_tol = 1e-300;
  for (double p = inv_n * 4.0; p < 1.0; p *= 4.0) opt.breakpoints.push_back(p);
  const double cutoff = quad::integrate_checked(
      [m](double y) { return FrequencyFunctional::g_m(m, y) / y; }, inv_n, 1.0, opt, "g_m cutoff integral");
  s.segregating_sample_cutoff = 2.0 * s.theta_eff * cutoff;
  s.segregating_sample_bound = 2.0 * s.theta_hat0 * s.harmonic;
  s.pi = 2.0 * s.theta_eff / L;
  s.pi_bound = 2.0 * s.theta_hat0 / L;
  return s;
}

// ---------------------------------------------------------------------------
// Upper bounds

struct UpperBoundReport {
  std::string functional;
  double value;           // expectation() in its default representation
  double value_cutoff;    // f(0+) + int_{1/N}^1 representation
  double f0_plus;
  double cutoff_integral;                     // int_{1/N}^1 f(y)/y dy
  double bound_frequency_only;                // 2 theta_eff {f(0+) + int_{1/N}^1 f/y}
  double bound_frequency_only_theta_hat;      // same with theta-hat
  std::optional<double> integral;             // int_0^1 f(y)/y dy
  std::optional<double> bound_integrable;     // 2 theta_eff int_0^1 f/y
  std::optional<double> bound_integrable_theta_hat;
  double slack;  // smallest (bound - matching value), relative to max(1, bound)

  bool holds(double tol = 1e-9) const { return slack >= -tol; }
};

/// Theorem-type bounds for a type-independent, nonnegative f with f(0) = 0.
/// The frequency-only bound is compared with the cutoff representation and
/// the integrable bound with the integrable representation; f_polymorphic
/// uses its closed-form value.
inline UpperBoundReport upper_bound(const LocusEnsemble& e, const FrequencyFunctional& f) {
  if (!f.type_independent()) throw RefusedError("upper_bound requires a type-independent functional");
  for (std::size_t u = 0; u < e.size(); ++u) {
    if (f.boundary(u) != 0.0) throw RefusedError("upper_bound requires f(0) = 0 on the boundary");
  }
  const double f0 = f.right_limit(0, 1 % e.size());
  if (f0 < 0.0) throw RefusedError("upper_bound requires f(0+) >= 0");
  for (int i = 1; i < 64; ++i) {
    const double y = i / 64.0;
    if (f.edge(0, 1 % e.size(), y) < 0.0) throw RefusedError("upper_bound requires f >= 0");
  }
  using Kind = FrequencyFunctional::Kind;
  const double N = e.population_size();
  auto fy = [&](double y) { return f.edge(0, 1 % e.size(), y); };

  UpperBoundReport r;
  r.functional = f.name();
  r.f0_plus = f0;
  r.value = expectation(e, f);
  {
    quad::Options opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 1e-300;
    for (double p = 4.0 / N; p < 1.0; p *= 4.0) opt.breakpoints.push_back(p);
    r.cutoff_integral =
        quad::integrate_checked([&](double y) { return fy(y) / y; }, 1.0 / N, 1.0, opt, "bound cutoff integral");
  }
  const double teff = theta_hat_eff(e);
  const double that = theta_hat(e);
  r.bound_frequency_only = 2.0 * teff * (f0 + r.cutoff_integral);
  r.bound_frequency_only_theta_hat = 2.0 * that * (f0 + r.cutoff_integral);

  double slack = std::numeric_limits<double>::infinity();
  auto rel = [](double bound, double value) { return (bound - value) / std::max(1.0, std::abs(bound)); };

  if (f.kind() == Kind::polymorphic_indicator) {
    r.value_cutoff = expectation(e, f, ExpectationMethod::quadrature);
    slack = std::min({slack, rel(r.bound_frequency_only, r.value), rel(r.bound_frequency_only, r.value_cutoff)});
  } else if (f.integrable()) {
    // Evaluate the cutoff representation by quadrature on a non-integrable copy.
    auto copy = FrequencyFunctional::frequency_only(f.name(), fy, false);
    r.value_cutoff = expectation(e, copy, ExpectationMethod::quadrature);
    slack = std::min(slack, rel(r.bound_frequency_only, r.value_cutoff));
    quad::Options opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 1e-300;
    opt.singular_left = true;
    opt.breakpoints.push_back(0.5);
    r.integral = quad::integrate_checked([&](double y) { return y <= 0.0 ? 0.0 : fy(y) / y; }, 0.0, 1.0, opt,
                                         "bound integral");
    r.bound_integrable = 2.0 * teff * *r.integral;
    r.bound_integrable_theta_hat = 2.0 * that * *r.integral;
    slack = std::min(slack, rel(*r.bound_integrable, r.value));
  } else {
    r.value_cutoff = r.value;
    slack = std::min(slack, rel(r.bound_frequency_only, r.value));
  }
  r.slack = slack;
  return r;
}

// ---------------------------------------------------------------------------
// Explicit statistics

/// Expected number of segregating sites, sum_j P_j / (L + P_j) with
/// P_j = 2 sum_<u,v> eta_u theta_uv {(1 + ln N + K) + e^{2 gamma}(1 + ln N - K)}.
inline double segregating_sites(const LocusEnsemble& e) {
  if (!e.all_reversible()) throw RefusedError("segregating_sites needs reversible boundary measures");
  const AlleleGraph& g = e.theta_graph();
  const double c = 1.0 + std::log(e.population_size());
  const auto pairs = unordered_pairs(g);
  double total = 0.0;
  for (const LocusClass& cl : e.classes()) {
    double p = 0.0;
    for (const VertexPair& pr : pairs) {
      const double gamma = cl.selection.gamma(pr.u, pr.v);
      const double kk = cl.k(pr.u, pr.v);
      const double base = cl.eta.log_weights[pr.u] + std::log(g.rate(pr.u, pr.v));
      p += std::exp(base) * (c + kk) + std::exp(base + 2.0 * gamma) * (c - kk);
    }
    p *= 2.0;
    total += static_cast<double>(cl.multiplicity) * p / (e.length() + p);
  }
  return total;
}

/// Per-site diversity pi = sum_<u,v> (2 theta_uv / L) L^{-1} sum_j (2 / Omega_N^j) eta_u^j / omega_{gamma_vu}.
inline double diversity_pi(const LocusEnsemble& e) {
  if (!e.all_reversible()) throw RefusedError("diversity_pi needs reversible boundary measures");
  const AlleleGraph& g = e.theta_graph();
  const double L = e.length();
  double total = 0.0;
  for (const VertexPair& pr : unordered_pairs(g)) {
    double inner = 0.0;
    for (const LocusClass& cl : e.classes()) {
      const double gamma_vu = cl.selection.gamma(pr.v, pr.u);
      inner += static_cast<double>(cl.multiplicity) * 2.0 / cl.omega_n *
               std::exp(cl.eta.log_weights[pr.u] - log_omega(Gamma(gamma_vu)));
    }
    total += 2.0 * g.rate(pr.u, pr.v) / L * inner / L;
  }
  return total;
}

namespace multilocus_detail {

inline void require_two_type_single_class(const LocusEnsemble& e, const char* op) {
  if (e.size() != 2) throw RefusedError(std::string(op) + " is defined for two-type ensembles only");
  if (e.classes().size() != 1) throw RefusedError(std::string(op) + " needs a common selection coefficient across loci");
}

}  // namespace multilocus_detail

/// Two-type closed form pi = (1/(L Omega_N)) 4 theta_u theta_v / (theta_v + theta_u e^{2 gamma})
/// (e^{2 gamma} - 1)/(2 gamma), with gamma = gamma_uv for u = vertex 0, v = vertex 1.
inline double diversity_pi_two_type(const LocusEnsemble& e) {
  multilocus_detail::require_two_type_single_class(e, "diversity_pi_two_type");
  const double tu = e.theta(0, 1);
  const double tv = e.theta(1, 0);
  const double gamma = e.classes()[0].selection.gamma(0, 1);
  const double omega_n = e.classes()[0].omega_n;
  const double ag = 2.0 * std::abs(gamma);
  const double e_fac = kernel_detail::one_minus_exp_over(ag);  // (1 - e^{-2|gamma|}) / (2|gamma|)
  double ratio;
  if (gamma > 0.0) {
    ratio = 4.0 * tu * tv / (tv * std::exp(-2.0 * gamma) + tu) * e_fac;
  } else {
    ratio = 4.0 * tu * tv / (tv + tu * std::exp(2.0 * gamma)) * e_fac;
  }
  return ratio / (e.length() * omega_n);
}

enum class BiasRegime { amplified, neutral_equal, reduced };

inline const char* to_string(BiasRegime r) {
  switch (r) {
    case BiasRegime::amplified: return "greater";
    case BiasRegime::neutral_equal: return "equal";
    case BiasRegime::reduced: return "less";
  }
  return "?";
}

struct BiasRatio {
  double ratio;       // theta-hat / theta-hat^0
  BiasRegime regime;  // sign of (theta_v - theta_u) gamma
};

/// theta-hat / theta-hat^0 = (theta_u + theta_v)(1 + e^{-2 gamma}) / (2 (theta_u + theta_v e^{-2 gamma})).
inline BiasRatio bias_ratio(double theta_u, double theta_v, double gamma) {
  if (!(theta_u > 0.0 && theta_v > 0.0)) throw DomainError("bias_ratio needs positive mutation intensities");
  (void)Gamma(gamma);
  BiasRatio b;
  if (gamma >= 0.0) {
    const double a = std::exp(-2.0 * gamma);
    b.ratio = (theta_u + theta_v) * (1.0 + a) / (2.0 * (theta_u + theta_v * a));
  } else {
    const double a = std::exp(2.0 * gamma);
    b.ratio = (theta_u + theta_v) * (a + 1.0) / (2.0 * (theta_u * a + theta_v));
  }
  const double sign = (theta_v - theta_u) * gamma;
  b.regime = sign > 0.0 ? BiasRegime::amplified : (sign < 0.0 ? BiasRegime::reduced : BiasRegime::neutral_equal);
  return b;
}

inline BiasRatio bias_ratio(const LocusEnsemble& e, double gamma) {
  if (e.size() != 2) throw RefusedError("bias_ratio is defined for two-type ensembles only");
  return bias_ratio(e.theta(0, 1), e.theta(1, 0), gamma);
}

/// Per-locus selection reproducing a target boundary distribution:
/// gamma_uv = (1/2) ln(eta_v theta_vu / (eta_u theta_uv)).
inline SelectionSpec eta_gamma_inversion(const std::vector<double>& target, const AlleleGraph& theta) {
  require_valid(theta);
  if (target.size() != theta.size()) throw StructuralError("target distribution size differs from graph");
  double sum = 0.0;
  for (double t : target) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("target distribution must be strictly positive");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("target distribution must sum to 1");
  SquareMatrix gamma(theta.size());
  for (const Edge& e : theta.edges()) {
    const double back = theta.rate(e.to, e.from);
    if (!(back > 0.0)) throw DomainError("inversion impossible: reverse rate is zero on edge " + theta.label(e.from) +
                                         "->" + theta.label(e.to));
    gamma(e.from, e.to) =
        0.5 * (std::log(target[e.to]) + std::log(back) - std::log(target[e.from]) - std::log(theta.rate(e.from, e.to)));
  }
  // Exact antisymmetry by construction.
  for (const Edge& e : theta.edges())
    if (e.from > e.to) gamma(e.from, e.to) = -gamma(e.to, e.from);
  return SelectionSpec::from_matrix(theta, gamma);
}

inline std::vector<SelectionSpec> eta_gamma_inversion(const std::vector<std::vector<double>>& targets,
                                                      const AlleleGraph& theta) {
  std::vector<SelectionSpec> out;
  out.reserve(targets.size());
  for (const auto& t : targets) out.push_back(eta_gamma_inversion(t, theta));
  return out;
}

}  // namespace wfg
