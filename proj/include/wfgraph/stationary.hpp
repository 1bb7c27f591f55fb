#pragma once

// Boundary (monomorphic) invariant measures of the embedded vertex chain,
// the exact stationary distribution built from the Green's function, and the
// large-N approximation with its pair/folded densities and spectra.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "wfgraph/errors.hpp"
#include "wfgraph/graph_model.hpp"
#include "wfgraph/kernels.hpp"
#include "wfgraph/quadrature.hpp"

namespace wfg {

enum class BoundaryMode {
  exact_x,  // rates h_uv = lambda_uv q_{gamma_uv}(x)
  scaled,   // rates h_uv = lambda_uv omega_{gamma_uv}
};

struct BoundaryMeasure {
  std::vector<double> weights;
  std::vector<double> log_weights;
  BoundaryMode mode = BoundaryMode::scaled;
  double x = std::numeric_limits<double>::quiet_NaN();
  bool reversible = true;
  std::vector<std::string> warnings;

  double operator[](std::size_t u) const { return weights[u]; }
  std::size_t size() const { return weights.size(); }
};

/// Log of the embedded-chain rate h_uv; -inf off the edge set.
inline double embedded_log_rate(const AlleleGraph& g, const SelectionSpec& s, BoundaryMode mode,
                                double x, std::size_t u, std::size_t v) {
  if (!g.has_edge(u, v)) return -std::numeric_limits<double>::infinity();
  const Gamma gamma(s.gamma(u, v));
  const double log_fix = mode == BoundaryMode::scaled
                             ? log_omega(gamma)
                             : log_scale(gamma, Frequency(x)) - log_scale(gamma, Frequency(1.0));
  return std::log(g.rate(u, v)) + log_fix;
}

namespace stationary_detail {

inline void normalize_logs(std::vector<double>& logw, std::vector<double>& w) {
  const double mx = *std::max_element(logw.begin(), logw.end());
  double sum = 0.0;
  for (double l : logw) sum += std::exp(l - mx);
  const double log_total = mx + std::log(sum);
  w.resize(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) {
    logw[i] -= log_total;
    w[i] = std::exp(logw[i]);
  }
}

}  // namespace stationary_detail

/// Invariant distribution of the embedded vertex chain. When the Kolmogorov
/// cycle condition holds it is the detailed-balance solution (spanning-tree
/// products); otherwise the generator's null vector, flagged non-reversible.
inline BoundaryMeasure boundary_measure(const AlleleGraph& g, const SelectionSpec& s, BoundaryMode mode,
                                        double x = std::numeric_limits<double>::quiet_NaN()) {
  require_valid(g);
  if (s.size() != g.size()) throw StructuralError("selection and graph sizes differ");
  if (mode == BoundaryMode::exact_x && !(x > 0.0 && x < 1.0)) {
    std::ostringstream msg;
    msg << "exact-x boundary measure needs 0 < x < 1, got " << x;
    throw DomainError(msg.str());
  }
  const std::size_t n = g.size();
  SquareMatrix logh(n, -std::numeric_limits<double>::infinity());
  for (const Edge& e : g.edges()) logh(e.from, e.to) = embedded_log_rate(g, s, mode, x, e.from, e.to);

  BoundaryMeasure out;
  out.mode = mode;
  out.x = mode == BoundaryMode::exact_x ? x : std::numeric_limits<double>::quiet_NaN();

  std::vector<double> phi(n, std::numeric_limits<double>::quiet_NaN());
  phi[0] = 0.0;
  std::queue<std::size_t> todo;
  todo.push(0);
  while (!todo.empty()) {
    const std::size_t u = todo.front();
    todo.pop();
    for (std::size_t v = 0; v < n; ++v) {
      if (g.has_edge(u, v) && std::isnan(phi[v])) {
        phi[v] = phi[u] + logh(u, v) - logh(v, u);
        todo.push(v);
      }
    }
  }
  double scale = 1.0;
  for (double p : phi) scale = std::max(scale, std::abs(p));
  double defect = 0.0;
  for (const Edge& e : g.edges()) {
    defect = std::max(defect, std::abs(phi[e.from] + logh(e.from, e.to) - logh(e.to, e.from) - phi[e.to]));
  }

  if (defect <= 1e-11 * scale) {
    out.log_weights = phi;
    stationary_detail::normalize_logs(out.log_weights, out.weights);
    out.reversible = true;
    return out;
  }

  // Global balance eta Q = 0 with sum(eta) = 1.
  double mx = -std::numeric_limits<double>::infinity();
  for (const Edge& e : g.edges()) mx = std::max(mx, logh(e.from, e.to));
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const Edge& e : g.edges()) {
    const double r = std::exp(logh(e.from, e.to) - mx);
    q(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) += r;
    q(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.from)) -= r;
  }
  Eigen::MatrixXd a = q.transpose();
  a.row(static_cast<Eigen::Index>(n - 1)).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  b(static_cast<Eigen::Index>(n - 1)) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (lu.rank() < static_cast<Eigen::Index>(n)) {
    throw NumericalError("embedded-chain generator is reducible; graph validation should have caught this");
  }
  Eigen::VectorXd eta = lu.solve(b);
  out.weights.resize(n);
  out.log_weights.resize(n);
  double sum = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    out.weights[u] = std::max(0.0, eta(static_cast<Eigen::Index>(u)));
    sum += out.weights[u];
  }
  for (std::size_t u = 0; u < n; ++u) {
    out.weights[u] /= sum;
    out.log_weights[u] = std::log(out.weights[u]);
  }
  out.reversible = false;
  std::ostringstream msg;
  msg.precision(3);
  msg << "Kolmogorov cycle condition fails (max log-defect " << defect
      << "); boundary measure is the non-reversible invariant vector and Theorem-1-based outputs are approximate";
  out.warnings.push_back(msg.str());
  return out;
}

enum class MeasureMode { exact, large_n };

/// Stationary distribution on vertices plus directed-edge interiors.
///
/// Exact mode: boundary mass eta^x_u / Omega, edge density
/// eta^x_u lambda_uv G_gamma(x, y) / Omega with Omega = 1 + sum eta lambda int G.
///
/// Large-N mode: boundary mass eta_u / Omega_N, interior density
/// (2 eta_u lambda_uv / Omega_N) q_gamma(1 - y) / (y (1 - y)) on (1/N, 1) and the
/// constant layer (2 eta_u lambda_uv / Omega_N)(N - omega_gamma) on (0, 1/N).
/// Edge masses are the analytic (2 eta lambda / Omega_N)(1 + ln N + K_gamma), so
/// the declared masses sum to one; integrating the density instead differs by
/// O(lambda ln N / N) (see edge_mass_quadrature()).
class StationaryMeasure {
 public:
  MeasureMode mode() const { return mode_; }
  const AlleleGraph& graph() const { return graph_; }
  const SelectionSpec& selection() const { return selection_; }
  const BoundaryMeasure& boundary() const { return boundary_; }
  double normalizer() const { return omega_norm_; }
  /// Entry frequency x (exact mode) or 1/N (large-N mode).
  double entry_point() const { return x_; }
  /// Population-size proxy; only meaningful in large-N mode.
  double population_size() const { return population_; }
  bool reversible() const { return boundary_.reversible; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  double boundary_mass(std::size_t u) const { return std::exp(boundary_.log_weights[u] - log_norm_); }

  double edge_mass(std::size_t u, std::size_t v) const { return edge_mass_(u, v); }

  double total_mass() const {
    double t = 0.0;
    for (std::size_t u = 0; u < graph_.size(); ++u) t += boundary_mass(u);
    for (const Edge& e : graph_.edges()) t += edge_mass_(e.from, e.to);
    return t;
  }

  /// Density of (u, v, y) for 0 < y < 1; zero off the edge set.
  double density(std::size_t u, std::size_t v, double y) const {
    if (!(y > 0.0 && y < 1.0)) throw DomainError("density: y must lie in (0, 1)");
    if (!graph_.has_edge(u, v)) return 0.0;
    const Gamma gamma(selection_.gamma(u, v));
    if (mode_ == MeasureMode::exact) {
      return std::exp(log_prefactor_(u, v)) * green(gamma, Frequency(x_), Frequency(y));
    }
    if (y < x_) return std::exp(log_prefactor_(u, v)) * (population_ - omega(gamma));
    return std::exp(log_prefactor_(u, v)) * edge_kernel(gamma, y);
  }

  /// log of the edge prefactor: eta_u lambda_uv / Omega (exact) or
  /// 2 eta_u lambda_uv / Omega_N (large-N).
  double log_prefactor(std::size_t u, std::size_t v) const { return log_prefactor_(u, v); }

  /// Direct quadrature of the edge density over (0, 1).
  double edge_mass_quadrature(std::size_t u, std::size_t v) const {
    if (!graph_.has_edge(u, v)) return 0.0;
    const Gamma gamma(selection_.gamma(u, v));
    if (mode_ == MeasureMode::exact) {
      return std::exp(log_prefactor_(u, v)) * occupation_integral(gamma, Frequency(x_), [](double) { return 1.0; });
    }
    quad::Options opt;
    opt.abs_tol = 1e-300;
    opt.rel_tol = 1e-12;
    opt.singular_right = true;
    for (double f = 4.0; x_ * f < 1.0; f *= 4.0) opt.breakpoints.push_back(x_ * f);
    const double interior = quad::integrate_checked(
        [&](double y) { return y >= 1.0 ? 0.0 : edge_kernel(gamma, y); }, x_, 1.0, opt, "edge mass");
    return std::exp(log_prefactor_(u, v)) * (interior + (population_ - omega(gamma)) * x_);
  }

  friend StationaryMeasure exact_stationary(const AlleleGraph&, const SelectionSpec&, double);
  friend StationaryMeasure approx_stationary(const AlleleGraph&, const SelectionSpec&, double);

 private:
  MeasureMode mode_ = MeasureMode::exact;
  AlleleGraph graph_;
  SelectionSpec selection_;
  BoundaryMeasure boundary_;
  double omega_norm_ = 1.0;
  double log_norm_ = 0.0;
  double x_ = 0.0;
  double population_ = std::numeric_limits<double>::quiet_NaN();
  SquareMatrix log_prefactor_;
  SquareMatrix edge_mass_;
  std::vector<std::string> warnings_;
};

/// Exact stationary measure for entry point x (rates lambda_uv as given).
inline StationaryMeasure exact_stationary(const AlleleGraph& g, const SelectionSpec& s, double x) {
  StationaryMeasure m;
  m.mode_ = MeasureMode::exact;
  m.graph_ = g;
  m.selection_ = s;
  m.boundary_ = boundary_measure(g, s, BoundaryMode::exact_x, x);
  m.warnings_ = m.boundary_.warnings;
  m.x_ = x;
  const std::size_t n = g.size();
  SquareMatrix occupancy(n);
  double interior = 0.0;
  for (const Edge& e : g.edges()) {
    const double occ = occupation_integral(Gamma(s.gamma(e.from, e.to)), Frequency(x), [](double) { return 1.0; }, 1e-12);
    occupancy(e.from, e.to) = occ;
    interior += m.boundary_.weights[e.from] * g.rate(e.from, e.to) * occ;
  }
  m.omega_norm_ = 1.0 + interior;
  m.log_norm_ = std::log(m.omega_norm_);
  m.log_prefactor_ = SquareMatrix(n, -std::numeric_limits<double>::infinity());
  m.edge_mass_ = SquareMatrix(n);
  for (const Edge& e : g.edges()) {
    const double lp = m.boundary_.log_weights[e.from] + std::log(g.rate(e.from, e.to)) - m.log_norm_;
    m.log_prefactor_(e.from, e.to) = lp;
    m.edge_mass_(e.from, e.to) = std::exp(lp) * occupancy(e.from, e.to);
  }
  return m;
}

/// Omega_N = 1 + 2 sum_{u,v} eta_u lambda_uv (1 + ln N + K_{gamma_uv}).
inline double large_n_normalizer(const AlleleGraph& g, const SelectionSpec& s, const BoundaryMeasure& eta,
                                 double N) {
  double sum = 0.0;
  const double log_n = std::log(N);
  for (const Edge& e : g.edges()) {
    sum += eta.weights[e.from] * g.rate(e.from, e.to) * (1.0 + log_n + K(Gamma(s.gamma(e.from, e.to))));
  }
  return 1.0 + 2.0 * sum;
}

inline constexpr double kMinPopulationSize = 100.0;

/// Large-N approximation with x = 1/N and jump rates lambda_uv N.
inline StationaryMeasure approx_stationary(const AlleleGraph& g, const SelectionSpec& s, double N) {
  if (!(N >= kMinPopulationSize) || !std::isfinite(N)) {
    std::ostringstream msg;
    msg << "large-N approximation needs N >= " << kMinPopulationSize << ", got " << N;
    throw DomainError(msg.str());
  }
  StationaryMeasure m;
  m.mode_ = MeasureMode::large_n;
  m.graph_ = g;
  m.selection_ = s;
  m.boundary_ = boundary_measure(g, s, BoundaryMode::scaled);
  m.warnings_ = m.boundary_.warnings;
  m.x_ = 1.0 / N;
  m.population_ = N;
  const std::size_t n = g.size();
  const double log_n = std::log(N);
  SquareMatrix weight(n);
  double sum = 0.0;
  for (const Edge& e : g.edges()) {
    const Gamma gamma(s.gamma(e.from, e.to));
    if (omega(gamma) >= N) {
      std::ostringstream msg;
      msg << "N = " << N << " is too small for gamma = " << gamma.value()
          << ": boundary-layer constant N - omega_gamma would be negative";
      throw DomainError(msg.str());
    }
    weight(e.from, e.to) = 1.0 + log_n + K(gamma);
    sum += m.boundary_.weights[e.from] * g.rate(e.from, e.to) * weight(e.from, e.to);
  }
  m.omega_norm_ = 1.0 + 2.0 * sum;
  m.log_norm_ = std::log(m.omega_norm_);
  m.log_prefactor_ = SquareMatrix(n, -std::numeric_limits<double>::infinity());
  m.edge_mass_ = SquareMatrix(n);
  for (const Edge& e : g.edges()) {
    const double lp =
        std::log(2.0) + m.boundary_.log_weights[e.from] + std::log(g.rate(e.from, e.to)) - m.log_norm_;
    m.log_prefactor_(e.from, e.to) = lp;
    m.edge_mass_(e.from, e.to) = std::exp(lp) * weight(e.from, e.to);
  }
  return m;
}

namespace stationary_detail {

inline void require_large_n(const StationaryMeasure& m, const char* op) {
  if (m.mode() != MeasureMode::large_n) {
    throw UnsupportedModeError(std::string(op) + " is defined for the large-N measure only");
  }
}

inline void require_pair(const StationaryMeasure& m, VertexPair p) {
  if (p.u >= m.graph().size() || p.v >= m.graph().size() || p.u == p.v) {
    throw DomainError("invalid vertex pair");
  }
}

}  // namespace stationary_detail

/// Density on the pair <u, v> when v has frequency y and u has 1 - y:
/// (2 eta_u lambda_uv / Omega_N) times e^{2 gamma y}/(y(1-y)) on the interior,
/// N on (0, 1/N) and N e^{2 gamma} on (1 - 1/N, 1).
inline double pair_density(const StationaryMeasure& m, VertexPair pair, double y) {
  stationary_detail::require_large_n(m, "pair_density");
  stationary_detail::require_pair(m, pair);
  if (!(y > 0.0 && y < 1.0)) throw DomainError("pair_density: y must lie in (0, 1)");
  if (!m.graph().has_edge(pair.u, pair.v)) return 0.0;
  const double gamma = m.selection().gamma(pair.u, pair.v);
  const double lp = m.log_prefactor(pair.u, pair.v);
  const double inv_n = m.entry_point();
  const double big_n = m.population_size();
  if (y < inv_n) return std::exp(lp) * big_n;
  if (y > 1.0 - inv_n) return std::exp(lp + 2.0 * gamma) * big_n;
  return std::exp(lp + 2.0 * gamma * y) / (y * (1.0 - y));
}

/// Folded minor-allele density on <u, v> for 0 < y <= 1/2.
inline double folded_density(const StationaryMeasure& m, VertexPair pair, double y) {
  stationary_detail::require_large_n(m, "folded_density");
  stationary_detail::require_pair(m, pair);
  if (!(y > 0.0 && y <= 0.5)) throw DomainError("folded_density: y must lie in (0, 1/2]");
  if (!m.graph().has_edge(pair.u, pair.v)) return 0.0;
  if (pair.u > pair.v) std::swap(pair.u, pair.v);
  const double gamma = m.selection().gamma(pair.u, pair.v);
  const double lp = m.log_prefactor(pair.u, pair.v);
  if (y < m.entry_point()) {
    return m.population_size() * (std::exp(lp) + std::exp(lp + 2.0 * gamma));
  }
  return (std::exp(lp + 2.0 * gamma * y) + std::exp(lp + 2.0 * gamma * (1.0 - y))) / (y * (1.0 - y));
}

enum class AfsKind { unfolded, folded };

struct AfsPoint {
  double y;
  double density;
};

/// Type-aggregated spectrum on the grid y = i / grid: unfolded over (0, 1),
/// folded over (0, 1/2].
inline std::vector<AfsPoint> afs(const StationaryMeasure& m, AfsKind kind, int grid) {
  if (grid < 2) throw DomainError("afs grid must be >= 2");
  const auto edges = m.graph().edges();
  auto unfolded_at = [&](double y) {
    double s = 0.0;
    for (const Edge& e : edges) s += m.density(e.from, e.to, y);
    return s;
  };
  std::vector<AfsPoint> out;
  if (kind == AfsKind::unfolded) {
    out.reserve(static_cast<std::size_t>(grid - 1));
    for (int i = 1; i < grid; ++i) {
      const double y = static_cast<double>(i) / grid;
      out.push_back({y, unfolded_at(y)});
    }
    return out;
  }
  const auto pairs = unordered_pairs(m.graph());
  for (int i = 1; 2 * i <= grid; ++i) {
    const double y = static_cast<double>(i) / grid;
    double s = 0.0;
    if (m.mode() == MeasureMode::large_n) {
      for (const VertexPair& p : pairs) s += folded_density(m, p, y);
    } else {
      s = unfolded_at(y) + unfolded_at(1.0 - y);
    }
    out.push_back({y, s});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generator

/// One edge component f_uv with its first two derivatives on (0, 1).
struct EdgeTestFunction {
  std::function<double(double)> value;
  std::function<double(double)> first;
  std::function<double(double)> second;
};

/// Test function on D: a value per vertex and a C^2 function per directed edge.
class TestFunction {
 public:
  explicit TestFunction(std::size_t n) : n_(n), vertex_(n, 0.0), edge_(n * n) {}

  std::size_t size() const { return n_; }
  void set_vertex(std::size_t u, double value) { vertex_.at(u) = value; }
  double vertex(std::size_t u) const { return vertex_.at(u); }
  void set_edge(std::size_t u, std::size_t v, EdgeTestFunction f) { edge_.at(u * n_ + v) = std::move(f); }
  const EdgeTestFunction& edge(std::size_t u, std::size_t v) const { return edge_.at(u * n_ + v); }
  bool has_edge(std::size_t u, std::size_t v) const { return static_cast<bool>(edge_.at(u * n_ + v).value); }

 private:
  std::size_t n_;
  std::vector<double> vertex_;
  std::vector<EdgeTestFunction> edge_;
};

/// A point of D: vertex (u, u, 0) or interior (u, v, y).
struct State {
  std::size_t u;
  std::size_t v;
  double y;

  static State vertex(std::size_t u) { return {u, u, 0.0}; }
  static State interior(std::size_t u, std::size_t v, double y) { return {u, v, y}; }
  bool on_boundary() const { return u == v; }
};

/// Checks f_uv(y) -> f_uu(0) as y -> 0 and -> f_vv(0) as y -> 1 by first-order
/// extrapolation from y = 1e-6, to 1e-8.
inline void check_test_function(const AlleleGraph& g, const TestFunction& f) {
  if (f.size() != g.size()) throw DomainError("test function size differs from graph");
  constexpr double delta = 1e-6;
  constexpr double tol = 1e-8;
  for (const Edge& e : g.edges()) {
    if (!f.has_edge(e.from, e.to)) {
      throw DomainError("invalid test function: missing edge component " + g.label(e.from) + "->" +
                        g.label(e.to));
    }
    const auto& fe = f.edge(e.from, e.to);
    const double at0 = fe.value(delta) - delta * fe.first(delta);
    const double at1 = fe.value(1.0 - delta) + delta * fe.first(1.0 - delta);
    if (std::abs(at0 - f.vertex(e.from)) > tol || std::abs(at1 - f.vertex(e.to)) > tol) {
      throw DomainError("invalid test function: edge " + g.label(e.from) + "->" + g.label(e.to) +
                        " does not match its vertex values at the endpoints");
    }
  }
}

/// (L f)(z): at a vertex sum_v lambda_uv (f_uv(x) - f_uu(0)); in the interior
/// gamma y(1-y) f' + y(1-y) f'' / 2.
inline double apply_generator(const AlleleGraph& g, const SelectionSpec& s, double x, const TestFunction& f,
                              State z) {
  if (z.on_boundary()) {
    double out = 0.0;
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (!g.has_edge(z.u, v)) continue;
      out += g.rate(z.u, v) * (f.edge(z.u, v).value(x) - f.vertex(z.u));
    }
    return out;
  }
  if (!(z.y > 0.0 && z.y < 1.0)) throw DomainError("interior state needs 0 < y < 1");
  if (!g.has_edge(z.u, z.v)) throw DomainError("state lies on an edge that is not in the graph");
  const auto& fe = f.edge(z.u, z.v);
  const double w = z.y * (1.0 - z.y);
  return s.gamma(z.u, z.v) * w * fe.first(z.y) + 0.5 * w * fe.second(z.y);
}

struct StationarityResidual {
  double total = 0.0;
  /// Residual restricted to the two directed edges of each pair, with the
  /// vertex terms split by outgoing edge.
  std::vector<std::pair<VertexPair, double>> per_pair;
};

/// int L f dmu for the exact stationary measure, in total and pairwise.
inline StationarityResidual generator_residual(const StationaryMeasure& m, const TestFunction& f) {
  if (m.mode() != MeasureMode::exact) {
    throw UnsupportedModeError("generator_residual is defined for the exact measure");
  }
  check_test_function(m.graph(), f);
  const AlleleGraph& g = m.graph();
  const SelectionSpec& s = m.selection();
  const double x = m.entry_point();
  auto directed = [&](std::size_t u, std::size_t v) {
    if (!g.has_edge(u, v)) return 0.0;
    const auto& fe = f.edge(u, v);
    const double vertex_term = m.boundary_mass(u) * g.rate(u, v) * (fe.value(x) - f.vertex(u));
    const double gamma = s.gamma(u, v);
    const double pref = std::exp(m.log_prefactor(u, v));
    auto integrand = [&](double y) {
      if (y <= 0.0 || y >= 1.0) return 0.0;
      const double w = y * (1.0 - y);
      const double lf = gamma * w * fe.first(y) + 0.5 * w * fe.second(y);
      return lf * green(Gamma(gamma), Frequency(x), Frequency(y));
    };
    quad::Options opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-12;
    opt.breakpoints = {x};
    return vertex_term + pref * quad::integrate_checked(integrand, 0.0, 1.0, opt, "generator residual");
  };
  StationarityResidual r;
  for (const VertexPair& p : unordered_pairs(g)) {
    const double v = directed(p.u, p.v) + directed(p.v, p.u);
    r.per_pair.push_back({p, v});
    r.total += v;
  }
  return r;
}

}  // namespace wfg
