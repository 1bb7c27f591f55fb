#pragma once

// Monte Carlo for the hybrid jump-diffusion: exponential holding at vertices
// with rate lambda_u / x, entry at frequency x, Euler-Maruyama on the edge
// until absorption. Each replicate (or chunk) owns a substream keyed by its
// index, so results do not depend on the thread count.

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wfgraph/errors.hpp"
#include "wfgraph/graph_model.hpp"
#include "wfgraph/kernels.hpp"

namespace wfg {

namespace sim_detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Generator for substream `index` of `seed`.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  const std::uint64_t c = splitmix64(b ^ splitmix64(index));
  std::seed_seq seq{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Thread count: explicit value, else WFGRAPH_THREADS, else hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("WFGRAPH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs body(i) for i in [0, count) on a small pool; each index is independent.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace sim_detail

struct SimConfig {
  AlleleGraph graph;
  SelectionSpec selection;
  double x = 1e-3;
  double dt = 1e-5;
  double horizon = 1e3;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  std::size_t thinning = 1;
  double burn_in_fraction = 0.1;
  std::size_t bins = 200;
  unsigned threads = 0;

  void validate() const {
    require_valid(graph);
    if (selection.size() != graph.size()) throw StructuralError("selection and graph sizes differ");
    if (!(x > 0.0 && x < 1.0)) throw DomainError("simulation entry frequency x must lie in (0, 1)");
    if (!(dt > 0.0 && dt <= 1e-3)) throw DomainError("simulation time step must satisfy 0 < dt <= 1e-3");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("simulation horizon must be positive");
    if (replicates < 1) throw DomainError("need at least one replicate");
    if (thinning < 1) throw DomainError("thinning interval must be >= 1");
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) throw DomainError("burn-in fraction must lie in [0, 1)");
    if (bins < 1) throw DomainError("need at least one histogram bin");
    if (2.0 * x >= 1.0) throw DomainError("boundary layers (0, x) and (1 - x, 1) overlap");
  }
};

/// Time spent on one directed edge: bin 0 is (0, x), bins 1..B are uniform
/// over [x, 1 - x], bin B + 1 is (1 - x, 1). hits[b] counts excursions that
/// recorded time in bin b, each at most once.
struct EdgeHistogram {
  std::size_t from = 0;
  std::size_t to = 0;
  std::vector<double> time;
  std::vector<std::uint64_t> hits;

  double lower(std::size_t b, double x, std::size_t bins) const {
    if (b == 0) return 0.0;
    if (b == bins + 1) return 1.0 - x;
    return x + (1.0 - 2.0 * x) * static_cast<double>(b - 1) / static_cast<double>(bins);
  }
  double upper(std::size_t b, double x, std::size_t bins) const {
    if (b == 0) return x;
    if (b == bins + 1) return 1.0;
    return x + (1.0 - 2.0 * x) * static_cast<double>(b) / static_cast<double>(bins);
  }
};

struct EmpiricalMeasure {
  double x = 0.0;
  std::size_t bins = 0;
  std::size_t replicates = 0;
  double recorded_time = 0.0;      // boundary + interior time after burn-in, all replicates
  double expected_time = 0.0;      // replicates * horizon * (1 - burn_in_fraction)
  std::vector<double> boundary_time;
  std::vector<EdgeHistogram> edges;
  /// boundary_fraction_replicate[r][u]: per-replicate fraction of recorded time at u.
  std::vector<std::vector<double>> boundary_fraction_replicate;
  std::uint64_t steps = 0;
  std::uint64_t excursions = 0;
  std::uint64_t fixations = 0;

  double boundary_fraction(std::size_t u) const { return boundary_time[u] / recorded_time; }

  /// Replicate standard error of the boundary fraction at u.
  double boundary_fraction_se(std::size_t u) const {
    const std::size_t r = boundary_fraction_replicate.size();
    if (r < 2) return std::numeric_limits<double>::quiet_NaN();
    double mean = 0.0;
    for (const auto& row : boundary_fraction_replicate) mean += row[u];
    mean /= static_cast<double>(r);
    double ss = 0.0;
    for (const auto& row : boundary_fraction_replicate) ss += (row[u] - mean) * (row[u] - mean);
    return std::sqrt(ss / static_cast<double>(r - 1) / static_cast<double>(r));
  }

  double interior_time() const {
    double s = 0.0;
    for (const auto& e : edges)
      for (double t : e.time) s += t;
    return s;
  }

  /// Mean density on bin b of edge index k: time fraction / bin width.
  double bin_density(std::size_t k, std::size_t b) const {
    const auto& e = edges[k];
    return e.time[b] / recorded_time / (e.upper(b, x, bins) - e.lower(b, x, bins));
  }
};

namespace sim_detail {

struct ReplicateResult {
  std::vector<double> boundary_time;
  std::vector<std::vector<double>> edge_time;
  std::vector<std::vector<std::uint64_t>> edge_hits;
  double recorded = 0.0;
  std::uint64_t steps = 0;
  std::uint64_t excursions = 0;
  std::uint64_t fixations = 0;
};

inline ReplicateResult run_replicate(const SimConfig& c, std::size_t rep, const std::vector<Edge>& edges,
                                     const SquareMatrix& edge_index) {
  const std::size_t n = c.graph.size();
  const std::size_t nb = c.bins + 2;
  ReplicateResult out;
  out.boundary_time.assign(n, 0.0);
  out.edge_time.assign(edges.size(), std::vector<double>(nb, 0.0));
  out.edge_hits.assign(edges.size(), std::vector<std::uint64_t>(nb, 0));
  std::vector<std::vector<std::uint64_t>> last_visit(edges.size(), std::vector<std::uint64_t>(nb, 0));

  std::mt19937_64 rng = substream(c.seed, 1, rep);
  boost::random::normal_distribution<double> normal;
  boost::random::exponential_distribution<double> expo;
  boost::random::uniform_01<double> unif;

  const double burn = c.horizon * c.burn_in_fraction;
  const double T = c.horizon;
  const double sdt = std::sqrt(c.dt);
  const double inner_lo = c.x;
  const double inner_w = (1.0 - 2.0 * c.x) / static_cast<double>(c.bins);
  auto bin_of = [&](double y) -> std::size_t {
    if (y < c.x) return 0;
    if (y > 1.0 - c.x) return c.bins + 1;
    const auto b = static_cast<std::size_t>((y - inner_lo) / inner_w);
    return 1 + std::min(b, c.bins - 1);
  };
  auto overlap = [&](double a, double b) { return std::max(0.0, std::min(b, T) - std::max(a, burn)); };

  std::size_t u = rep % n;
  double t = 0.0;
  while (t < T) {
    // Holding at vertex u.
    const double out_rate = c.graph.total_rate(u) / c.x;
    const double hold = expo(rng) / out_rate;
    const double rec = overlap(t, t + hold);
    out.boundary_time[u] += rec;
    out.recorded += rec;
    t += hold;
    if (t >= T) break;
    double pick = unif(rng) * c.graph.total_rate(u);
    std::size_t v = u;
    for (std::size_t w = 0; w < n; ++w) {
      if (!c.graph.has_edge(u, w)) continue;
      v = w;
      pick -= c.graph.rate(u, w);
      if (pick < 0.0) break;
    }
    const auto k = static_cast<std::size_t>(edge_index(u, v));
    const double gamma = c.selection.gamma(u, v);
    auto& etime = out.edge_time[k];
    auto& ehits = out.edge_hits[k];
    ++out.excursions;
    const std::uint64_t stamp = out.excursions;
    double xi = c.x;
    double pending = 0.0;
    std::size_t since = 0;
    bool fixed = false;
    while (true) {
      const double rec_step = overlap(t, t + c.dt);
      pending += rec_step;
      ++since;
      const double var = xi * (1.0 - xi);
      const double next = xi + gamma * var * c.dt + std::sqrt(var) * sdt * normal(rng);
      t += c.dt;
      ++out.steps;
      const bool absorbed = next <= 0.0 || next >= 1.0;
      if (since == c.thinning || absorbed || t >= T) {
        if (pending > 0.0) {
          const std::size_t b = bin_of(xi);
          etime[b] += pending;
          if (last_visit[k][b] != stamp) {
            last_visit[k][b] = stamp;
            ehits[b] += 1;
          }
          out.recorded += pending;
        }
        pending = 0.0;
        since = 0;
      }
      if (absorbed) {
        fixed = next >= 1.0;
        break;
      }
      xi = next;
      if (t >= T) break;
    }
    if (t >= T) break;
    if (fixed) {
      ++out.fixations;
      u = v;
    }
  }
  return out;
}

}  // namespace sim_detail

/// Simulates c.replicates independent paths on [0, horizon], recording
/// time-weighted occupancy after the burn-in.
inline EmpiricalMeasure simulate_paths(const SimConfig& c) {
  c.validate();
  const auto edges = c.graph.edges();
  SquareMatrix edge_index(c.graph.size(), -1.0);
  for (std::size_t k = 0; k < edges.size(); ++k) edge_index(edges[k].from, edges[k].to) = static_cast<double>(k);

  std::vector<sim_detail::ReplicateResult> results(c.replicates);
  sim_detail::parallel_for(c.replicates, sim_detail::resolve_threads(c.threads),
                           [&](std::size_t r) { results[r] = sim_detail::run_replicate(c, r, edges, edge_index); });

  EmpiricalMeasure m;
  m.x = c.x;
  m.bins = c.bins;
  m.replicates = c.replicates;
  m.expected_time = static_cast<double>(c.replicates) * c.horizon * (1.0 - c.burn_in_fraction);
  m.boundary_time.assign(c.graph.size(), 0.0);
  m.edges.resize(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    m.edges[k].from = edges[k].from;
    m.edges[k].to = edges[k].to;
    m.edges[k].time.assign(c.bins + 2, 0.0);
    m.edges[k].hits.assign(c.bins + 2, 0);
  }
  // Merge in replicate order so the sums are schedule independent.
  for (const auto& r : results) {
    for (std::size_t u = 0; u < c.graph.size(); ++u) m.boundary_time[u] += r.boundary_time[u];
    for (std::size_t k = 0; k < edges.size(); ++k) {
      for (std::size_t b = 0; b < c.bins + 2; ++b) {
        m.edges[k].time[b] += r.edge_time[k][b];
        m.edges[k].hits[b] += r.edge_hits[k][b];
      }
    }
    m.recorded_time += r.recorded;
    m.steps += r.steps;
    m.excursions += r.excursions;
    m.fixations += r.fixations;
    std::vector<double> frac(c.graph.size());
    for (std::size_t u = 0; u < c.graph.size(); ++u) frac[u] = r.boundary_time[u] / r.recorded;
    m.boundary_fraction_replicate.push_back(std::move(frac));
  }
  return m;
}

struct ChiSquareResult {
  double statistic;
  double dof;
  double p_value;
};

/// Upper tail probability of a chi-square with dof degrees of freedom.
inline double chi_square_sf(double statistic, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi-square needs positive degrees of freedom");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

/// Wald statistic of the replicate-mean boundary fractions against expected
/// values, using the replicate covariance; chi-square with n degrees of freedom.
inline ChiSquareResult boundary_chi_square(const EmpiricalMeasure& m, const std::vector<double>& expected) {
  const std::size_t n = expected.size();
  const std::size_t r = m.boundary_fraction_replicate.size();
  if (r <= n + 1) throw DomainError("boundary chi-square needs more replicates than vertices + 1");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (const auto& row : m.boundary_fraction_replicate)
    for (std::size_t u = 0; u < n; ++u) mean(static_cast<Eigen::Index>(u)) += row[u];
  mean /= static_cast<double>(r);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& row : m.boundary_fraction_replicate) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(n));
    for (std::size_t u = 0; u < n; ++u) d(static_cast<Eigen::Index>(u)) = row[u] - mean(static_cast<Eigen::Index>(u));
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(r - 1) * static_cast<double>(r);
  Eigen::VectorXd diff(static_cast<Eigen::Index>(n));
  for (std::size_t u = 0; u < n; ++u) diff(static_cast<Eigen::Index>(u)) = mean(static_cast<Eigen::Index>(u)) - expected[u];
  const double stat = diff.dot(cov.ldlt().solve(diff));
  ChiSquareResult out{stat, static_cast<double>(n), chi_square_sf(stat, static_cast<double>(n))};
  return out;
}

// ---------------------------------------------------------------------------

struct FixationEstimate {
  double probability;
  double standard_error;
  std::size_t replicates;
  double dt;
  /// Heuristic size of the Euler-Maruyama bias, 2 (1 + |gamma|) dt.
  double bias_bound;
};

inline constexpr std::size_t kFixationChunk = 1000;

/// Fraction of Euler-Maruyama paths from x absorbed at 1.
inline FixationEstimate fixation_monte_carlo(double gamma, double x, std::size_t replicates, std::uint64_t seed,
                                             double dt = 1e-3, unsigned threads = 0) {
  (void)Gamma(gamma);
  (void)Frequency(x);
  if (replicates < 1000) throw DomainError("fixation_monte_carlo needs at least 1000 replicates");
  if (!(dt > 0.0 && dt <= 1e-2)) throw DomainError("fixation_monte_carlo needs 0 < dt <= 1e-2");
  FixationEstimate est{0.0, 0.0, replicates, dt, 2.0 * (1.0 + std::abs(gamma)) * dt};
  if (x == 0.0 || x == 1.0) {
    est.probability = x;
    return est;
  }
  const std::size_t chunks = (replicates + kFixationChunk - 1) / kFixationChunk;
  std::vector<std::uint64_t> fixed(chunks, 0);
  const double sdt = std::sqrt(dt);
  sim_detail::parallel_for(chunks, sim_detail::resolve_threads(threads), [&](std::size_t ch) {
    std::mt19937_64 rng = sim_detail::substream(seed, 2, ch);
    boost::random::normal_distribution<double> normal;
    const std::size_t begin = ch * kFixationChunk;
    const std::size_t end = std::min(replicates, begin + kFixationChunk);
    std::uint64_t count = 0;
    for (std::size_t i = begin; i < end; ++i) {
      double xi = x;
      while (true) {
        const double var = xi * (1.0 - xi);
        xi += gamma * var * dt + std::sqrt(var) * sdt * normal(rng);
        if (xi <= 0.0) break;
        if (xi >= 1.0) {
          ++count;
          break;
        }
      }
    }
    fixed[ch] = count;
  });
  std::uint64_t total = 0;
  for (auto f : fixed) total += f;
  const double p = static_cast<double>(total) / static_cast<double>(replicates);
  est.probability = p;
  est.standard_error = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(replicates));
  return est;
}

struct HalvingEstimate {
  FixationEstimate coarse;  // step dt
  FixationEstimate fine;    // step dt / 2
  double difference_se;     // SE of fine - coarse under the coupling
};

/// Coarse (dt) and fine (dt / 2) Euler-Maruyama fixation estimates driven by
/// the same Brownian path: each coarse increment is the sum of two fine ones.
inline HalvingEstimate fixation_dt_halving(double gamma, double x, std::size_t replicates, std::uint64_t seed,
                                           double dt = 1e-3, unsigned threads = 0) {
  (void)Gamma(gamma);
  (void)Frequency(x);
  if (replicates < 1000) throw DomainError("fixation_dt_halving needs at least 1000 replicates");
  if (!(dt > 0.0 && dt <= 1e-2)) throw DomainError("fixation_dt_halving needs 0 < dt <= 1e-2");
  const double bias = 2.0 * (1.0 + std::abs(gamma));
  HalvingEstimate out{{0.0, 0.0, replicates, dt, bias * dt}, {0.0, 0.0, replicates, dt / 2.0, bias * dt / 2.0}, 0.0};
  if (x == 0.0 || x == 1.0) {
    out.coarse.probability = out.fine.probability = x;
    return out;
  }
  const std::size_t chunks = (replicates + kFixationChunk - 1) / kFixationChunk;
  // Per chunk: coarse fixations, fine fixations, paths where they disagree.
  std::vector<std::array<std::uint64_t, 3>> tally(chunks, {0, 0, 0});
  const double h = dt / 2.0;
  const double sh = std::sqrt(h);
  sim_detail::parallel_for(chunks, sim_detail::resolve_threads(threads), [&](std::size_t ch) {
    std::mt19937_64 rng = sim_detail::substream(seed, 4, ch);
    boost::random::normal_distribution<double> normal;
    const std::size_t begin = ch * kFixationChunk;
    const std::size_t end = std::min(replicates, begin + kFixationChunk);
    auto& t = tally[ch];
    for (std::size_t i = begin; i < end; ++i) {
      double xc = x;
      double xf = x;
      int coarse = -1;  // -1 running, 0 lost, 1 fixed
      int fine = -1;
      while (coarse < 0 || fine < 0) {
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        for (const double z : {z1, z2}) {
          if (fine >= 0) break;
          const double var = xf * (1.0 - xf);
          xf += gamma * var * h + std::sqrt(var) * sh * z;
          if (xf <= 0.0) fine = 0;
          else if (xf >= 1.0) fine = 1;
        }
        if (coarse < 0) {
          const double var = xc * (1.0 - xc);
          xc += gamma * var * dt + std::sqrt(var) * sh * (z1 + z2);
          if (xc <= 0.0) coarse = 0;
          else if (xc >= 1.0) coarse = 1;
        }
      }
      t[0] += static_cast<std::uint64_t>(coarse);
      t[1] += static_cast<std::uint64_t>(fine);
      t[2] += coarse != fine ? 1 : 0;
    }
  });
  std::uint64_t c = 0, f = 0, d = 0;
  for (const auto& t : tally) {
    c += t[0];
    f += t[1];
    d += t[2];
  }
  const double r = static_cast<double>(replicates);
  auto fill = [&](FixationEstimate& e, std::uint64_t k) {
    e.probability = static_cast<double>(k) / r;
    e.standard_error = std::sqrt(std::max(e.probability * (1.0 - e.probability), 0.0) / r);
  };
  fill(out.coarse, c);
  fill(out.fine, f);
  // fine - coarse per path takes values in {-1, 0, 1}.
  const double mean = (static_cast<double>(f) - static_cast<double>(c)) / r;
  out.difference_se = std::sqrt(std::max(static_cast<double>(d) / r - mean * mean, 0.0) / r);
  return out;
}

// ---------------------------------------------------------------------------

struct ChainEstimate {
  std::vector<double> frequency;
  std::vector<double> standard_error;  // batch means
  std::uint64_t steps;
  std::uint64_t transitions;
  std::size_t batches;
};

/// Uniformized embedded vertex chain: from u propose v with probability
/// lambda_uv / Lambda (Lambda = max_u lambda_u), accept with q_{gamma_uv}(x).
inline ChainEstimate embedded_chain_sim(const AlleleGraph& g, const SelectionSpec& s, double x, std::uint64_t steps,
                                        std::uint64_t seed, std::size_t batches = 100) {
  require_valid(g);
  if (s.size() != g.size()) throw StructuralError("selection and graph sizes differ");
  if (!(x > 0.0 && x < 1.0)) throw DomainError("embedded_chain_sim needs 0 < x < 1");
  if (steps < 10000) throw DomainError("embedded_chain_sim needs at least 10^4 steps");
  if (batches < 2 || batches > steps) throw DomainError("invalid batch count");
  const std::size_t n = g.size();
  double lambda_max = 0.0;
  for (std::size_t u = 0; u < n; ++u) lambda_max = std::max(lambda_max, g.total_rate(u));
  SquareMatrix accept(n);
  for (const Edge& e : g.edges()) accept(e.from, e.to) = fixation_prob(Gamma(s.gamma(e.from, e.to)), Frequency(x));

  std::mt19937_64 rng = sim_detail::substream(seed, 3, 0);
  boost::random::uniform_01<double> unif;
  std::vector<std::vector<double>> batch_counts(batches, std::vector<double>(n, 0.0));
  const std::uint64_t per_batch = steps / batches;
  std::size_t u = 0;
  ChainEstimate est;
  est.transitions = 0;
  est.steps = per_batch * batches;
  est.batches = batches;
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::uint64_t i = 0; i < per_batch; ++i) {
      batch_counts[b][u] += 1.0;
      double pick = unif(rng) * lambda_max;
      std::size_t v = u;
      for (std::size_t w = 0; w < n; ++w) {
        if (!g.has_edge(u, w)) continue;
        pick -= g.rate(u, w);
        if (pick < 0.0) {
          v = w;
          break;
        }
      }
      if (v != u && unif(rng) < accept(u, v)) {
        u = v;
        ++est.transitions;
      }
    }
  }
  est.frequency.assign(n, 0.0);
  est.standard_error.assign(n, 0.0);
  for (std::size_t w = 0; w < n; ++w) {
    double mean = 0.0;
    for (const auto& bc : batch_counts) mean += bc[w] / static_cast<double>(per_batch);
    mean /= static_cast<double>(batches);
    double ss = 0.0;
    for (const auto& bc : batch_counts) {
      const double d = bc[w] / static_cast<double>(per_batch) - mean;
      ss += d * d;
    }
    est.frequency[w] = mean;
    est.standard_error[w] = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  }
  return est;
}

}  // namespace wfg
