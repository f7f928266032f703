#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "qswitch/errors.hpp"
#include "qswitch/model.hpp"

namespace qswitch {

/// Sparse row-stochastic kernel of the uniformized n-partite chain on the
/// truncated state space {0..cap}^(n-1). Forward transitions that would
/// leave the cap are redirected to self (reflecting truncation), so every
/// row still sums to one.
struct TransitionKernel {
  int k = 0;
  int n = 0;
  int cap = 0;
  std::size_t num_states = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> prob;

  int dims() const { return n - 1; }

  std::size_t index_of(std::span<const int> state) const {
    std::size_t idx = 0;
    for (int c : state) idx = idx * static_cast<std::size_t>(cap + 1) + static_cast<std::size_t>(c);
    return idx;
  }

  void state_of(std::size_t idx, std::vector<int>& out) const {
    out.assign(static_cast<std::size_t>(dims()), 0);
    for (int d = dims() - 1; d >= 0; --d) {
      out[static_cast<std::size_t>(d)] = static_cast<int>(idx % static_cast<std::size_t>(cap + 1));
      idx /= static_cast<std::size_t>(cap + 1);
    }
  }

  /// Entries of one row as (target, probability) pairs.
  std::vector<std::pair<std::size_t, double>> row(std::size_t state) const {
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t e = row_ptr[state]; e < row_ptr[state + 1]; ++e) {
      entries.emplace_back(col[e], prob[e]);
    }
    return entries;
  }
};

/// Builds the uniformized kernel with the transition probabilities read off
/// the chain verbatim: from a state with no zero entries, back-diagonal with
/// probability (k-(n-1))/k and +e_l with 1/k each; from a state with j zero
/// entries (1 <= j <= n-2), +e_l with (k-(n-1-j))/(kj) on zero coordinates
/// and 1/k on nonzero ones; from the origin, +e_l with 1/(n-1) each.
inline TransitionKernel build_uniformized_kernel(int k, int n, int cap,
                                                 std::size_t state_limit = 4000000) {
  if (n < 2) throw invalid_parameter_error("entanglement size n must be >= 2");
  if (k < n) throw invalid_parameter_error("need k >= n links");
  if (cap < 2) throw invalid_parameter_error("truncation cap must be >= 2");

  const int dims = n - 1;
  double size_estimate = 1.0;
  for (int d = 0; d < dims; ++d) size_estimate *= cap + 1;
  if (size_estimate > static_cast<double>(state_limit)) {
    throw resource_error("truncated state space exceeds the configured limit");
  }

  TransitionKernel kernel;
  kernel.k = k;
  kernel.n = n;
  kernel.cap = cap;
  kernel.num_states = static_cast<std::size_t>(size_estimate);
  kernel.row_ptr.reserve(kernel.num_states + 1);
  kernel.row_ptr.push_back(0);

  std::vector<int> state(static_cast<std::size_t>(dims), 0);
  // (target, probability) scratch for one row; self-loop mass accumulated.
  std::vector<std::pair<std::size_t, double>> entries;

  for (std::size_t s = 0; s < kernel.num_states; ++s) {
    entries.clear();
    double self_mass = 0.0;

    int zeros = 0;
    for (int c : state) zeros += (c == 0);

    auto forward = [&](int d, double p) {
      if (state[static_cast<std::size_t>(d)] == cap) {
        self_mass += p;
        return;
      }
      // +e_d moves the index by (cap+1)^(dims-1-d)
      std::size_t stride = 1;
      for (int i = dims - 1; i > d; --i) stride *= static_cast<std::size_t>(cap + 1);
      entries.emplace_back(s + stride, p);
    };

    if (zeros == 0) {
      // measurement-completing arrival: every coordinate decrements
      std::size_t down = s;
      std::size_t stride = 1;
      for (int d = dims - 1; d >= 0; --d) {
        down -= stride;
        stride *= static_cast<std::size_t>(cap + 1);
      }
      entries.emplace_back(down, static_cast<double>(k - (n - 1)) / k);
      for (int d = 0; d < dims; ++d) forward(d, 1.0 / k);
    } else if (zeros == dims) {
      for (int d = 0; d < dims; ++d) forward(d, 1.0 / (n - 1.0));
    } else {
      const double p_zero = static_cast<double>(k - (n - 1 - zeros)) / (static_cast<double>(k) * zeros);
      for (int d = 0; d < dims; ++d) {
        forward(d, state[static_cast<std::size_t>(d)] == 0 ? p_zero : 1.0 / k);
      }
    }

    if (self_mass > 0.0) entries.emplace_back(s, self_mass);

    for (const auto& [target, p] : entries) {
      kernel.col.push_back(static_cast<std::uint32_t>(target));
      kernel.prob.push_back(p);
    }
    kernel.row_ptr.push_back(kernel.col.size());

    // advance mixed-radix state (last coordinate fastest)
    for (int d = dims - 1; d >= 0; --d) {
      if (++state[static_cast<std::size_t>(d)] <= cap) break;
      state[static_cast<std::size_t>(d)] = 0;
    }
  }
  return kernel;
}

/// Stationary distribution of the truncated kernel: solves pi P = pi,
/// sum pi = 1 by lazy power iteration (the raw chain is n-periodic, so the
/// iteration runs on (I+P)/2, which shares the fixed point). Converged when
/// ||pi P - pi||_1 <= tol against the raw kernel.
inline std::vector<double> stationary_truncated(const TransitionKernel& kernel,
                                                double tol = 1e-10,
                                                long max_iterations = 200000) {
  if (!(tol > 0.0)) throw invalid_parameter_error("tolerance must be positive");
  const std::size_t n_states = kernel.num_states;
  std::vector<double> pi(n_states, 1.0 / static_cast<double>(n_states));
  std::vector<double> next(n_states, 0.0);

  for (long iter = 0; iter < max_iterations; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n_states; ++s) {
      const double w = pi[s];
      if (w == 0.0) continue;
      for (std::size_t e = kernel.row_ptr[s]; e < kernel.row_ptr[s + 1]; ++e) {
        next[kernel.col[e]] += w * kernel.prob[e];
      }
    }
    double residual = 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) {
      residual += std::abs(next[s] - pi[s]);
      pi[s] = 0.5 * (pi[s] + next[s]);
      total += pi[s];
    }
    for (double& x : pi) x /= total;
    if (residual <= tol) return pi;
  }
  throw numeric_error("stationary power iteration did not converge");
}

/// Total stationary probability of states with every coordinate >= 1: the
/// states from which the next arrival on a fresh link completes a
/// measurement. Equals k/(n(k-n+1)) on the untruncated chain.
inline double busy_mass(const TransitionKernel& kernel, std::span<const double> pi) {
  const int dims = kernel.dims();
  double mass = 0.0;
  std::vector<int> state;
  for (std::size_t s = 0; s < kernel.num_states; ++s) {
    kernel.state_of(s, state);
    bool all_positive = true;
    for (int d = 0; d < dims; ++d) all_positive &= state[static_cast<std::size_t>(d)] > 0;
    if (all_positive) mass += pi[s];
  }
  return mass;
}

/// E[|Q|] = sum_i pi(i) * (i_1 + ... + i_{n-1}) under the truncated laws.
inline double expected_total_queue(const TransitionKernel& kernel, std::span<const double> pi) {
  double eq = 0.0;
  std::vector<int> state;
  for (std::size_t s = 0; s < kernel.num_states; ++s) {
    kernel.state_of(s, state);
    eq += pi[s] * std::accumulate(state.begin(), state.end(), 0.0);
  }
  return eq;
}

struct NpartiteMetrics {
  PerformanceMetrics metrics;
  StabilityBasis stability_basis = StabilityBasis::Proven;
};

/// Closed-form capacity q*mu*k/n and E[|Q|] = (n-1)k/(2(k-n)) for the
/// homogeneous infinite-buffer chain. Requires k > n (the E[|Q|] expression
/// has a pole at k = n); stability is proven for n <= 3 and conjectured
/// beyond, reported through `stability_basis`.
inline NpartiteMetrics npartite_metrics(int k, int n, double mu, double q) {
  if (n < 2) throw invalid_parameter_error("entanglement size n must be >= 2");
  if (!(mu > 0.0)) throw invalid_parameter_error("link rate must be positive");
  if (!(q > 0.0) || q > 1.0) throw invalid_parameter_error("q must lie in (0, 1]");
  if (k <= n) {
    throw instability_error("n-partite metrics require k > n (chain unstable or undefined at k = n)");
  }

  NpartiteMetrics result;
  result.stability_basis = n <= 3 ? StabilityBasis::Proven : StabilityBasis::Conjectured;
  result.metrics.capacity = q * mu * k / n;
  result.metrics.expected_queue = (n - 1.0) * k / (2.0 * (k - n));
  result.metrics.per_user_rate.assign(static_cast<std::size_t>(k),
                                      n * result.metrics.capacity / k);
  result.metrics.per_link_queue.assign(static_cast<std::size_t>(k),
                                       result.metrics.expected_queue / k);
  return result;
}

/// Mean jumps of the n=3 quarter-plane walk: interior (M_x, M_y), horizontal
/// boundary (M'_x, M'_y), vertical boundary (M''_x, M''_y).
struct DriftQuantities {
  double mx = 0.0, my = 0.0;
  double mpx = 0.0, mpy = 0.0;
  double mppx = 0.0, mppy = 0.0;
};

struct MalyshevResult {
  DriftQuantities drift;
  bool ergodic = false;
  bool applicable = false;  // Malyshev's theorem needs (M_x, M_y) != (0, 0)
};

/// Ergodicity check for the tripartite chain via Malyshev's drift criteria.
/// Drifts are computed from enumerated kernel rows rather than the closed
/// forms, so kernel construction bugs surface here.
inline MalyshevResult malyshev_check(int k) {
  if (k < 3) throw invalid_parameter_error("tripartite chain requires k >= 3");

  const TransitionKernel kernel = build_uniformized_kernel(k, 3, /*cap=*/5);
  auto drift_at = [&](int x, int y) {
    const int state[2] = {x, y};
    const std::size_t s = kernel.index_of(state);
    double dx = 0.0, dy = 0.0;
    std::vector<int> target;
    for (const auto& [t, p] : kernel.row(s)) {
      kernel.state_of(t, target);
      dx += p * (target[0] - x);
      dy += p * (target[1] - y);
    }
    return std::pair<double, double>{dx, dy};
  };

  MalyshevResult result;
  // cap=5 keeps states (2,2), (2,0), (0,2) away from the reflecting boundary
  std::tie(result.drift.mx, result.drift.my) = drift_at(2, 2);
  std::tie(result.drift.mpx, result.drift.mpy) = drift_at(2, 0);
  std::tie(result.drift.mppx, result.drift.mppy) = drift_at(0, 2);

  const auto& d = result.drift;
  result.applicable = std::abs(d.mx) + std::abs(d.my) > 1e-15;
  if (result.applicable) {
    const double cross_h = d.mx * d.mpy - d.my * d.mpx;
    const double cross_v = d.my * d.mppx - d.mx * d.mppy;
    const bool set1 = d.mx < 0.0 && d.my < 0.0 && cross_h < 0.0 && cross_v < 0.0;
    const bool set2 = d.mx < 0.0 && d.my >= 0.0 && cross_v < 0.0;
    const bool set3 = d.mx >= 0.0 && d.my < 0.0 && cross_h < 0.0;
    result.ergodic = set1 || set2 || set3;
  }
  return result;
}

}  // namespace qswitch
