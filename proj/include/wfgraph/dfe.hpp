#pragma once

// Distributions of fitness effects: novel mutations (H_dfe), segregating
// polymorphisms (H_pdfe), continuous approximations and the Poisson random
// field spectrum.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "wfgraph/errors.hpp"
#include "wfgraph/kernels.hpp"
#include "wfgraph/multilocus.hpp"
#include "wfgraph/quadrature.hpp"

namespace wfg {

inline constexpr double kAtomMergeTolerance = 1e-12;

struct DfeAtom {
  double gamma;
  double weight;
};

enum class DfeKind { novel, polymorphic_raw, polymorphic_conditional, custom };

/// Discrete distribution over selection coefficients. Atoms closer than
/// 1e-12 in gamma are merged.
class DfeDistribution {
 public:
  DfeDistribution() = default;

  DfeDistribution(std::vector<DfeAtom> atoms, DfeKind kind) : kind_(kind) {
    for (const DfeAtom& a : atoms) {
      if (!std::isfinite(a.gamma) || !std::isfinite(a.weight) || a.weight < 0.0) {
        throw DomainError("DFE atoms need finite gamma and nonnegative weight");
      }
    }
    std::sort(atoms.begin(), atoms.end(), [](const DfeAtom& a, const DfeAtom& b) { return a.gamma < b.gamma; });
    for (const DfeAtom& a : atoms) {
      if (a.weight == 0.0) continue;
      if (!atoms_.empty() && a.gamma - atoms_.back().gamma <= kAtomMergeTolerance) {
        atoms_.back().weight += a.weight;
      } else {
        atoms_.push_back(a);
      }
    }
    total_ = 0.0;
    for (const DfeAtom& a : atoms_) total_ += a.weight;
  }

  /// Unit mass at gamma.
  static DfeDistribution point(double gamma) { return DfeDistribution({{gamma, 1.0}}, DfeKind::custom); }

  const std::vector<DfeAtom>& atoms() const { return atoms_; }
  DfeKind kind() const { return kind_; }
  double total_mass() const { return total_; }

  /// Right-continuous H(gamma) = sum of weights at atoms <= gamma.
  double cdf(double gamma) const {
    double s = 0.0;
    for (const DfeAtom& a : atoms_) {
      if (a.gamma <= gamma + kAtomMergeTolerance) s += a.weight;
      else break;
    }
    return s;
  }

  double jump(double gamma) const {
    for (const DfeAtom& a : atoms_)
      if (std::abs(a.gamma - gamma) <= kAtomMergeTolerance) return a.weight;
    return 0.0;
  }

  /// Mass on gamma > 0.
  double positive_mass() const {
    double s = 0.0;
    for (const DfeAtom& a : atoms_)
      if (a.gamma > kAtomMergeTolerance) s += a.weight;
    return s;
  }

  /// sum gamma w / sum w.
  double mean() const {
    if (!(total_ > 0.0)) throw DomainError("mean of an empty DFE");
    double s = 0.0;
    for (const DfeAtom& a : atoms_) s += a.gamma * a.weight;
    return s / total_;
  }

  DfeDistribution normalized() const {
    if (!(total_ > 0.0)) throw DomainError("cannot normalize an empty DFE");
    std::vector<DfeAtom> a = atoms_;
    for (DfeAtom& x : a) x.weight /= total_;
    DfeDistribution out(std::move(a), kind_ == DfeKind::polymorphic_raw ? DfeKind::polymorphic_conditional : kind_);
    return out;
  }

 private:
  std::vector<DfeAtom> atoms_;
  DfeKind kind_ = DfeKind::custom;
  double total_ = 0.0;
};

/// H_dfe: atoms at gamma^j_uv with weights (eta^j_u / Omega^j_N) theta_uv / (L theta-hat_eff).
inline DfeDistribution h_dfe(const LocusEnsemble& e) {
  const AlleleGraph& g = e.theta_graph();
  const double norm = e.length() * theta_hat_eff(e);
  std::vector<DfeAtom> atoms;
  for (const LocusClass& c : e.classes()) {
    for (const Edge& ed : g.edges()) {
      const double w = static_cast<double>(c.multiplicity) * c.eta[ed.from] / c.omega_n * g.rate(ed.from, ed.to) / norm;
      atoms.push_back({c.selection.gamma(ed.from, ed.to), w});
    }
  }
  return DfeDistribution(std::move(atoms), DfeKind::novel);
}

struct PolymorphicDfe {
  DfeDistribution raw;          // defective, total L^{-1} sum_j (Omega_j - 1) / Omega_j
  DfeDistribution conditional;  // raw / total
};

/// H_pdfe from the per-edge masses (2 eta_u theta_uv / (L Omega_N)) (1 + ln N + K_gamma).
inline PolymorphicDfe h_pdfe(const LocusEnsemble& e) {
  const AlleleGraph& g = e.theta_graph();
  const double L = e.length();
  const double c0 = 1.0 + std::log(e.population_size());
  std::vector<DfeAtom> atoms;
  for (const LocusClass& c : e.classes()) {
    for (const Edge& ed : g.edges()) {
      const double mass = 2.0 * c.eta[ed.from] * g.rate(ed.from, ed.to) / (L * c.omega_n) * (c0 + c.k(ed.from, ed.to));
      atoms.push_back({c.selection.gamma(ed.from, ed.to), static_cast<double>(c.multiplicity) * mass / L});
    }
  }
  PolymorphicDfe out;
  out.raw = DfeDistribution(std::move(atoms), DfeKind::polymorphic_raw);
  if (!(out.raw.total_mass() > 1e-300)) {
    throw DomainError("polymorphic DFE is undefined: every locus is monomorphic with probability 1");
  }
  out.conditional = out.raw.normalized();
  return out;
}

/// gamma-hat as the DFE mean.
inline double mean_load(const DfeDistribution& d) { return d.mean(); }

/// gamma-hat by the pair sum theta_eff^{-1} L^{-1} sum_j sum_<u,v> (eta_u / Omega) theta_uv gamma (1 - e^{2 gamma}).
inline double mean_load(const LocusEnsemble& e) {
  if (!e.all_reversible()) throw RefusedError("pair-sum mean load needs reversible boundary measures");
  const AlleleGraph& g = e.theta_graph();
  double s = 0.0;
  for (const LocusClass& c : e.classes()) {
    double locus = 0.0;
    for (const VertexPair& p : unordered_pairs(g)) {
      const double gamma = c.selection.gamma(p.u, p.v);
      if (gamma == 0.0) continue;
      // eta_u theta_uv gamma (1 - e^{2 gamma}) computed as -gamma expm1(2 gamma) in log form for the positive side.
      const double base = std::exp(c.eta.log_weights[p.u]) * g.rate(p.u, p.v);
      locus += base * gamma * -std::expm1(2.0 * gamma);
    }
    s += static_cast<double>(c.multiplicity) * locus / c.omega_n;
  }
  return s / (e.length() * theta_hat_eff(e));
}

struct SkewnessReport {
  bool jumps_ok = true;            // i) jump at gamma < 0 >= jump at -gamma
  double worst_jump_deficit = 0.0;  // max over gamma > 0 of (jump(gamma) - jump(-gamma)) / total
  bool mean_ok = true;              // ii) gamma-hat <= 0
  double mean = 0.0;
  bool positive_mass_ok = true;     // iii) 1 - H(0) < 1/2
  double positive_mass = 0.0;
  /// Whether the sufficient condition of the statement holds (always true for H_dfe;
  /// N >= max(2, 4 C^2) for H_pdfe).
  bool sufficient_condition = true;

  bool holds() const { return jumps_ok && mean_ok && positive_mass_ok; }
};

/// Checks i)-iii) on a distribution, normalized by its total mass.
inline SkewnessReport check_skewness(const DfeDistribution& d, double tol = 1e-12) {
  SkewnessReport r;
  const double total = d.total_mass();
  if (!(total > 0.0)) throw DomainError("skewness check on an empty DFE");
  for (const DfeAtom& a : d.atoms()) {
    if (a.gamma <= kAtomMergeTolerance) continue;
    const double deficit = (a.weight - d.jump(-a.gamma)) / total;
    r.worst_jump_deficit = std::max(r.worst_jump_deficit, deficit);
  }
  r.jumps_ok = r.worst_jump_deficit <= tol;
  r.mean = d.mean();
  r.mean_ok = r.mean <= tol;
  r.positive_mass = d.positive_mass() / total;
  r.positive_mass_ok = r.positive_mass < 0.5;
  return r;
}

inline SkewnessReport check_skewness_dfe(const LocusEnsemble& e) { return check_skewness(h_dfe(e)); }

/// Polymorphic variant; sufficient_condition records N >= max(2, 4 C^2).
inline SkewnessReport check_skewness_pdfe(const LocusEnsemble& e) {
  double c = 0.0;
  for (const LocusClass& cl : e.classes()) c = std::max(c, cl.selection.max_abs());
  SkewnessReport r = check_skewness(h_pdfe(e).conditional);
  r.sufficient_condition = e.population_size() >= std::max(2.0, 4.0 * c * c);
  return r;
}

// ---------------------------------------------------------------------------
// Continuous DFE

enum class DfeFamily { exponential, gamma, custom };

inline constexpr double kDfeTruncation = 60.0;

/// Negative side density proportional to g(|x|), positive side proportional to
/// g(x) e^{-2x}, plus an optional neutral atom; truncated at |x| = 60.
class ContinuousDfe {
 public:
  /// g(t) = rate e^{-rate t}.
  static ContinuousDfe exponential(double rate = 1.0, double neutral_weight = 0.0) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential DFE needs rate > 0");
    ContinuousDfe d(DfeFamily::exponential, [rate](double t) { return rate * std::exp(-rate * t); }, neutral_weight,
                    "exponential");
    d.params_ = {rate};
    // int_60^inf (1 + t) g(t) dt
    d.tail_bound_ = std::exp(-rate * kDfeTruncation) * (1.0 + kDfeTruncation + 1.0 / rate);
    return d;
  }

  /// g(t) = t^{a-1} e^{-t/s} / (Gamma(a) s^a).
  static ContinuousDfe gamma(double shape, double scale = 1.0, double neutral_weight = 0.0) {
    if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
      throw DomainError("gamma DFE needs shape > 0 and scale > 0");
    }
    const double log_norm = std::lgamma(shape) + shape * std::log(scale);
    ContinuousDfe d(
        DfeFamily::gamma,
        [shape, scale, log_norm](double t) {
          if (t <= 0.0) return shape < 1.0 ? std::numeric_limits<double>::infinity() : (shape == 1.0 ? 1.0 / scale : 0.0);
          return std::exp((shape - 1.0) * std::log(t) - t / scale - log_norm);
        },
        neutral_weight, "gamma");
    d.params_ = {shape, scale};
    const double x = kDfeTruncation / scale;
    d.tail_bound_ = boost::math::gamma_q(shape, x) + shape * scale * boost::math::gamma_q(shape + 1.0, x);
    return d;
  }

  /// Arbitrary nonnegative g on t > 0 (need not be normalized).
  static ContinuousDfe custom(std::function<double(double)> g, double neutral_weight = 0.0, std::string name = "custom") {
    ContinuousDfe d(DfeFamily::custom, std::move(g), neutral_weight, std::move(name));
    quad::Options opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-300;
    const auto r = quad::integrate(
        [&d](double t) { return (1.0 + t) * d.g_(t); }, kDfeTruncation, 2.0 * kDfeTruncation, opt);
    d.tail_bound_ = std::isfinite(r.value) ? std::abs(r.value) / d.z_ : std::numeric_limits<double>::infinity();
    return d;
  }

  DfeFamily family() const { return family_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& params() const { return params_; }
  double neutral_weight() const { return w0_; }

  /// Density of the continuous part at x != 0 (total continuous mass 1 - w0).
  double density(double x) const {
    if (x == 0.0 || std::abs(x) > kDfeTruncation) return 0.0;
    const double t = std::abs(x);
    const double base = g_(t) * (x > 0.0 ? std::exp(-2.0 * t) : 1.0);
    return (1.0 - w0_) * base / z_;
  }

  double negative_mass() const { return (1.0 - w0_) * neg_ / z_; }
  double positive_mass() const { return (1.0 - w0_) * pos_ / z_; }
  double mean() const { return (1.0 - w0_) * (pos_first_ - neg_first_) / z_; }

  /// Bound on int_{|x| > 60} (1 + |x|) density relative to the normalized mass.
  double tail_error_bound() const { return tail_bound_; }

  /// int_0^60 g(t) h(t) dt with endpoint handling at 0.
  template <class H>
  double integrate_side(const H& h, double rel_tol = 1e-12) const {
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-300;
    opt.singular_left = true;
    opt.breakpoints = {0.5, 2.0, 8.0, 24.0};
    auto f = [&](double t) {
      if (t <= 0.0) return 0.0;
      return g_(t) * h(t);
    };
    const quad::Result r = quad::integrate(f, 0.0, kDfeTruncation, opt);
    if (!r.converged || !std::isfinite(r.value)) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "continuous DFE integral did not converge (value=" << r.value << ", error=" << r.error
          << "); the density may not be integrable";
      throw NumericalError(msg.str());
    }
    return r.value;
  }

  double normalizer() const { return z_; }

 private:
  ContinuousDfe(DfeFamily family, std::function<double(double)> g, double w0, std::string name)
      : family_(family), name_(std::move(name)), g_(std::move(g)), w0_(w0) {
    if (!(w0 >= 0.0 && w0 < 1.0)) throw DomainError("neutral weight must lie in [0, 1)");
    neg_ = integrate_side([](double) { return 1.0; });
    pos_ = integrate_side([](double t) { return std::exp(-2.0 * t); });
    neg_first_ = integrate_side([](double t) { return t; });
    pos_first_ = integrate_side([](double t) { return t * std::exp(-2.0 * t); });
    z_ = neg_ + pos_;
    if (!(z_ > 0.0) || !std::isfinite(z_)) throw DomainError("continuous DFE density is not integrable");
  }

  DfeFamily family_;
  std::string name_;
  std::function<double(double)> g_;
  double w0_;
  std::vector<double> params_;
  double neg_ = 0.0, pos_ = 0.0, neg_first_ = 0.0, pos_first_ = 0.0, z_ = 1.0;
  double tail_bound_ = 0.0;
};

// ---------------------------------------------------------------------------
// Poisson random field spectrum

struct SpectrumPoint {
  double y;
  double density;
};

namespace dfe_detail {

inline std::vector<double> grid_points(int grid) {
  if (grid < 2) throw DomainError("spectrum grid must be >= 2");
  std::vector<double> ys;
  for (int i = 1; i < grid; ++i) ys.push_back(static_cast<double>(i) / grid);
  return ys;
}

}  // namespace dfe_detail

/// 2 theta_eff sum_i w_i q_{gamma_i}(1 - y) / (y (1 - y)), weights normalized.
inline std::vector<SpectrumPoint> prf_afs(double theta_eff, const DfeDistribution& d, int grid) {
  if (!(theta_eff > 0.0)) throw DomainError("prf_afs needs theta_eff > 0");
  const double total = d.total_mass();
  if (!(total > 0.0)) throw DomainError("prf_afs needs a nonempty DFE");
  std::vector<SpectrumPoint> out;
  for (double y : dfe_detail::grid_points(grid)) {
    double s = 0.0;
    for (const DfeAtom& a : d.atoms()) s += a.weight * edge_kernel(Gamma(a.gamma), y);
    out.push_back({y, 2.0 * theta_eff * s / total});
  }
  return out;
}

/// Continuous mixture: neutral atom w0 / y plus the density-weighted edge kernel.
inline std::vector<SpectrumPoint> prf_afs(double theta_eff, const ContinuousDfe& d, int grid) {
  if (!(theta_eff > 0.0)) throw DomainError("prf_afs needs theta_eff > 0");
  std::vector<SpectrumPoint> out;
  const double scale = (1.0 - d.neutral_weight()) / d.normalizer();
  for (double y : dfe_detail::grid_points(grid)) {
    const double neg = d.integrate_side([y](double t) { return edge_kernel(Gamma(-t), y); }, 1e-10);
    const double pos = d.integrate_side([y](double t) { return std::exp(-2.0 * t) * edge_kernel(Gamma(t), y); }, 1e-10);
    const double s = d.neutral_weight() / y + scale * (neg + pos);
    out.push_back({y, 2.0 * theta_eff * s});
  }
  return out;
}

}  // namespace wfg
