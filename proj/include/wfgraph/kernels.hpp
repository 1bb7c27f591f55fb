#pragma once

// Single-edge Wright-Fisher diffusion with selection:
//   dxi = gamma xi (1 - xi) ds + sqrt(xi (1 - xi)) dB.
// Scale, fixation, Green's function and the large-N constants omega and K.
// Everything is evaluated through log S so that |gamma| up to 1e4 neither
// overflows nor cancels.

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wfgraph/errors.hpp"
#include "wfgraph/quadrature.hpp"

namespace wfg {

inline constexpr double kMaxAbsGamma = 1e4;
inline constexpr double kEulerGamma = std::numbers::egamma;

/// Signed selection coefficient on the diffusion scale.
class Gamma {
 public:
  constexpr Gamma() = default;
  explicit Gamma(double value) : value_(value) {
    if (!std::isfinite(value) || std::abs(value) > kMaxAbsGamma) {
      std::ostringstream msg;
      msg << "selection coefficient " << value << " outside [-" << kMaxAbsGamma << ", "
          << kMaxAbsGamma << "]";
      throw DomainError(msg.str());
    }
  }
  constexpr double value() const { return value_; }
  constexpr operator double() const { return value_; }
  Gamma operator-() const { return Gamma(-value_); }

 private:
  double value_ = 0.0;
};

/// Allele frequency in [0, 1].
class Frequency {
 public:
  constexpr Frequency() = default;
  explicit Frequency(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      std::ostringstream msg;
      msg << "frequency " << value << " outside [0, 1]";
      throw DomainError(msg.str());
    }
  }
  constexpr double value() const { return value_; }
  constexpr operator double() const { return value_; }

 private:
  double value_ = 0.0;
};

namespace kernel_detail {

/// (1 - e^{-z}) / z for z >= 0, equal to 1 at z = 0.
inline double one_minus_exp_over(double z) {
  if (std::abs(z) < 1e-4) {
    return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
  }
  return -std::expm1(-z) / z;
}

}  // namespace kernel_detail

/// log S_gamma(x); -inf at x = 0.
inline double log_scale(Gamma gamma, Frequency x) {
  const double g = gamma.value();
  const double y = x.value();
  if (y == 0.0) return -std::numeric_limits<double>::infinity();
  if (g == 0.0) return std::log(y);
  const double z = 2.0 * std::abs(g) * y;
  return std::log(y) + (g < 0.0 ? z : 0.0) + std::log(kernel_detail::one_minus_exp_over(z));
}

/// Scale function S_0(x) = x, S_gamma(x) = (1 - e^{-2 gamma x}) / (2 gamma).
/// Overflows to +inf only for strongly negative gamma where e^{-2 gamma x}
/// itself is unrepresentable.
inline double scale_S(Gamma gamma, Frequency x) {
  if (gamma.value() == 0.0) return x.value();
  return std::exp(log_scale(gamma, x));
}

/// Speed density m_gamma(y) = e^{2 gamma y} / (y (1 - y)).
inline double speed_m(Gamma gamma, Frequency y) {
  return std::exp(2.0 * gamma.value() * y.value()) / (y.value() * (1.0 - y.value()));
}

/// Probability that the diffusion started at x is absorbed at 1.
inline double fixation_prob(Gamma gamma, Frequency x) {
  if (x.value() == 0.0) return 0.0;
  if (x.value() == 1.0) return 1.0;
  const double g = gamma.value();
  if (g == 0.0) return x.value();
  // Direct ratio while e^{2|gamma|} is representable; it is monotone in x
  // under rounding, unlike the log-difference form.
  if (std::abs(g) <= 300.0) return std::expm1(-2.0 * g * x.value()) / std::expm1(-2.0 * g);
  return std::exp(log_scale(gamma, x) - log_scale(gamma, Frequency(1.0)));
}

/// log of omega_gamma = 2 gamma / (1 - e^{-2 gamma}).
inline double log_omega(Gamma gamma) {
  const double g = gamma.value();
  if (g == 0.0) return 0.0;
  const double z = 2.0 * std::abs(g);
  return (g < 0.0 ? -z : 0.0) - std::log(kernel_detail::one_minus_exp_over(z));
}

/// Scaled fixation weight, the limit of N q_gamma(1/N).
inline double omega(Gamma gamma) {
  if (gamma.value() == 0.0) return 1.0;
  return std::exp(log_omega(gamma));
}

/// K_gamma = omega_gamma * int_0^1 (-ln y)(e^{-2 gamma y} - e^{-2 gamma (1-y)}) dy,
/// by adaptive quadrature; odd in gamma.
inline double K(Gamma gamma) {
  const double g = std::abs(gamma.value());
  if (g == 0.0) return 0.0;
  // Factor out the smaller exponential so neither cancellation nor inf * 0 occurs.
  auto integrand = [g](double y) {
    if (y <= 0.0) return 0.0;
    const double d = y <= 0.5 ? -std::exp(-2.0 * g * y) * std::expm1(-2.0 * g * (1.0 - 2.0 * y))
                              : std::exp(-2.0 * g * (1.0 - y)) * std::expm1(-2.0 * g * (2.0 * y - 1.0));
    return -std::log(y) * d;
  };
  quad::Options opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-13;
  opt.singular_left = true;
  const double s = 1.0 / (2.0 * g);
  for (double k : {1.0, 4.0, 16.0, 64.0}) {
    if (k * s < 0.5) {
      opt.breakpoints.push_back(k * s);
      opt.breakpoints.push_back(1.0 - k * s);
    }
  }
  opt.breakpoints.push_back(0.5);
  const double integral = quad::integrate_checked(integrand, 0.0, 1.0, opt, "K_gamma");
  const double value = omega(Gamma(g)) * integral;
  return gamma.value() < 0.0 ? -value : value;
}

/// Green's function of the killed diffusion:
///   x <= y: 2 q(x) (S(1) - S(y)) m(y),  y <= x: 2 (1 - q(x)) (S(y) - S(0)) m(y),
/// rewritten as products of S so the exponentials cancel analytically.
inline double green(Gamma gamma, Frequency x, Frequency y) {
  const double yv = y.value();
  if (yv <= 0.0 || yv >= 1.0) {
    std::ostringstream msg;
    msg << "green: y = " << yv << " must lie in (0, 1); the speed density is singular there";
    throw DomainError(msg.str());
  }
  const double xv = x.value();
  const double g = gamma.value();
  const double denom = yv * (1.0 - yv);
  if (g == 0.0) {
    return xv <= yv ? 2.0 * xv * (1.0 - yv) / denom : 2.0 * (1.0 - xv) * yv / denom;
  }
  const double log_s1 = log_scale(gamma, Frequency(1.0));
  double log_g;
  if (xv <= yv) {
    log_g = log_scale(gamma, x) + log_scale(gamma, Frequency(1.0 - yv)) - log_s1;
  } else {
    log_g = log_scale(gamma, Frequency(1.0 - xv)) + log_scale(gamma, y) + 2.0 * g * (yv - xv) -
            log_s1;
  }
  return 2.0 * std::exp(log_g) / denom;
}

/// int_0^1 G_gamma(x, y) g(y) dy, split at y = x with both endpoints mapped.
template <class Fn>
double occupation_integral(Gamma gamma, Frequency x, const Fn& g, double rel_tol = 1e-9) {
  const double xv = x.value();
  if (xv == 0.0 || xv == 1.0) return 0.0;
  auto integrand = [&](double y) {
    if (y <= 0.0 || y >= 1.0) return 0.0;
    const double gy = g(y);
    if (gy == 0.0) return 0.0;
    return green(gamma, x, Frequency(y)) * gy;
  };
  quad::Options opt;
  opt.abs_tol = 1e-300;
  opt.rel_tol = rel_tol * 0.1;
  opt.singular_left = true;
  opt.singular_right = true;
  opt.breakpoints.push_back(xv);
  // Geometric panels on both sides of x resolve the 1/y and 1/(1-y) tails.
  for (double f = 4.0; xv * f < 1.0; f *= 4.0) opt.breakpoints.push_back(xv * f);
  for (double f = 4.0; (1.0 - xv) * f < 1.0; f *= 4.0) opt.breakpoints.push_back(1.0 - (1.0 - xv) * f);
  const quad::Result r = quad::integrate(integrand, 0.0, 1.0, opt);
  if (!r.converged) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "occupation_integral(gamma=" << gamma.value() << ", x=" << xv
        << ") did not converge: value=" << r.value << " error=" << r.error
        << " intervals=" << r.intervals;
    throw NumericalError(msg.str());
  }
  return r.value;
}

/// Interior large-N edge kernel omega_gamma (1 - e^{-2 gamma (1-y)}) / (2 gamma y (1-y)),
/// which equals q_gamma(1 - y) / (y (1 - y)).
inline double edge_kernel(Gamma gamma, double y) {
  return fixation_prob(gamma, Frequency(1.0 - y)) / (y * (1.0 - y));
}

}  // namespace wfg
