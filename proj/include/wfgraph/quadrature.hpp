#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with interior breakpoints and an
// exponential change of variables for integrable endpoint singularities.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "wfgraph/errors.hpp"

namespace wfg::quad {

struct Options {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  int max_intervals = 4000;
  /// Map the first segment through y = a + (c - a) e^{-t}.
  bool singular_left = false;
  /// Map the last segment through y = b - (b - c) e^{-t}.
  bool singular_right = false;
  /// Interior split points; values outside (a, b) are ignored.
  std::vector<double> breakpoints;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  int piece;
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// One 15-point Kronrod rule with the QUADPACK error heuristic.
template <class F>
std::pair<double, double> kronrod15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    resk += kWgk[j] * (f1[j] + f2[j]);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1[j] + f2[j]);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  double resabs = kWgk[7] * std::abs(fc);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
  }
  const double result = resk * half;
  resasc *= std::abs(half);
  resabs *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {result, err};
}

}  // namespace detail

/// Integrates f over [a, b]. Never throws on non-convergence; inspect
/// Result::converged. Non-finite integrand values make the result non-finite.
template <class F>
Result integrate(const F& f, double a, double b, const Options& opt = {}) {
  Result out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  if (b < a) {
    Options o = opt;
    std::swap(o.singular_left, o.singular_right);
    out = integrate(f, b, a, o);
    out.value = -out.value;
    return out;
  }

  std::vector<double> cuts{a};
  for (double p : opt.breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Each piece is integrated in its own variable.
  std::vector<std::function<double(double)>> pieces;
  std::vector<std::pair<double, double>> ranges;
  const std::size_t nseg = cuts.size() - 1;
  for (std::size_t i = 0; i < nseg; ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const double len = hi - lo;
    if (i == 0 && opt.singular_left) {
      // y = lo + len e^{-t}; resolution is limited by the spacing at lo.
      const double floor_gap = std::max(std::abs(lo) * 4.0 * std::numeric_limits<double>::epsilon(),
                                        1e-300);
      const double tmax = std::min(700.0, std::log(len / floor_gap));
      pieces.emplace_back([&f, lo, len](double t) {
        const double w = len * std::exp(-t);
        return f(lo + w) * w;
      });
      ranges.emplace_back(0.0, tmax);
    } else if (i + 1 == nseg && opt.singular_right) {
      const double floor_gap = std::max(std::abs(hi) * 4.0 * std::numeric_limits<double>::epsilon(),
                                        1e-300);
      const double tmax = std::min(700.0, std::log(len / floor_gap));
      pieces.emplace_back([&f, hi, len](double t) {
        const double w = len * std::exp(-t);
        return f(hi - w) * w;
      });
      ranges.emplace_back(0.0, tmax);
    } else {
      pieces.emplace_back([&f](double y) { return f(y); });
      ranges.emplace_back(lo, hi);
    }
  }

  std::priority_queue<detail::Segment> heap;
  double total = 0.0;
  double total_err = 0.0;
  auto push = [&](int piece, double lo, double hi) {
    auto [v, e] = detail::kronrod15(pieces[piece], lo, hi);
    out.evaluations += 15;
    heap.push({piece, lo, hi, v, e});
    total += v;
    total_err += e;
  };
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    auto [lo, hi] = ranges[i];
    const bool mapped = (i == 0 && opt.singular_left) || (i + 1 == nseg && opt.singular_right);
    if (mapped) {
      // Seed geometric panels in t so the decaying tail is not one panel.
      double t0 = 0.0;
      for (double t1 : {1.0, 4.0, 16.0, 64.0}) {
        if (t1 >= hi) break;
        push(static_cast<int>(i), t0, t1);
        t0 = t1;
      }
      push(static_cast<int>(i), t0, hi);
    } else {
      push(static_cast<int>(i), lo, hi);
    }
  }

  while (true) {
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    if (total_err <= tol) {
      out.converged = true;
      break;
    }
    if (!std::isfinite(total)) break;
    if (static_cast<int>(heap.size()) >= opt.max_intervals) break;
    detail::Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;  // cannot split further
    heap.pop();
    total -= worst.value;
    total_err -= worst.error;
    push(worst.piece, worst.a, mid);
    push(worst.piece, mid, worst.b);
  }

  // Re-sum to drop accumulated cancellation in the running totals.
  out.value = 0.0;
  out.error = 0.0;
  out.intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    out.value += heap.top().value;
    out.error += heap.top().error;
    heap.pop();
  }
  if (!out.converged) {
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(out.value));
    out.converged = std::isfinite(out.value) && out.error <= tol;
  }
  return out;
}

/// Like integrate() but throws NumericalError when the tolerance is missed.
template <class F>
double integrate_checked(const F& f, double a, double b, const Options& opt = {},
                         const char* what = "integral") {
  const Result r = integrate(f, a, b, opt);
  if (!r.converged) {
    std::ostringstream msg;
    msg.precision(6);
    msg << what << " on [" << a << ", " << b << "] did not converge: value=" << r.value
        << " error=" << r.error << " intervals=" << r.intervals
        << " evaluations=" << r.evaluations;
    throw NumericalError(msg.str());
  }
  return r.value;
}

}  // namespace wfg::quad
