#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qswitch/errors.hpp"
#include "qswitch/model.hpp"

namespace qswitch {

namespace detail {

// Binomial pmf term C(n,j) p^j (1-p)^(n-j). Exact Pascal rows up to n=60;
// log-space beyond to avoid overflow on large-k scans.
inline double binomial_pmf(int n, int j, double p) {
  if (j < 0 || j > n) return 0.0;
  if (n <= 60) {
    double c = 1.0;
    for (int i = 1; i <= j; ++i) c = c * (n - j + i) / i;
    return c * std::pow(p, j) * std::pow(1.0 - p, n - j);
  }
  const double logc = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
  return std::exp(logc + j * std::log(p) + (n - j) * std::log1p(-p));
}

// P_e / P_o of Appendix-style parity sums: total success probability over
// j >= i_min with j even (odd) among m Bernoulli(p) trials.
inline double parity_tail(int i_min, int m, double p, bool odd) {
  double sum = 0.0;
  for (int j = std::max(i_min, 0); j <= m; ++j) {
    if ((j % 2 == 1) == odd) sum += binomial_pmf(m, j, p);
  }
  return sum;
}

}  // namespace detail

/// f(beta) = (beta*p + pbar)^(k-1) * (p + beta*pbar) - beta.
/// The stationary geometric factor of the slotted chain is its unique root
/// in (0,1); beta = 1 is always a spurious root.
inline double f_beta(double beta, double p, int k) {
  const double pbar = 1.0 - p;
  return std::pow(beta * p + pbar, k - 1) * (p + beta * pbar) - beta;
}

/// Unique interior root of f on (0,1), found by bracketed bisection with a
/// safeguarded secant step. Guarantees |f(beta)| <= tol and bracket width
/// <= tol; never returns the beta = 1 root.
inline double solve_beta(double p, int k, double tol = 1e-13) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw invalid_parameter_error("p must lie strictly in (0, 1)");
  }
  if (k < 3) throw invalid_parameter_error("slotted model requires k >= 3");
  if (!(tol > 0.0)) throw invalid_parameter_error("tolerance must be positive");

  double lo = 1e-12;
  double hi = 1.0 - 1e-6;
  double flo = f_beta(lo, p, k);
  double fhi = f_beta(hi, p, k);
  if (!(flo > 0.0) || !(fhi < 0.0)) {
    throw numeric_error("failed to bracket the interior root of f");
  }

  double best = lo;
  double fbest = flo;
  for (int iter = 0; iter < 400; ++iter) {
    double x;
    if (iter % 2 == 0) {
      x = 0.5 * (lo + hi);
    } else {
      x = lo - flo * (hi - lo) / (fhi - flo);  // secant through the bracket
      if (!(x > lo) || !(x < hi)) x = 0.5 * (lo + hi);
    }
    const double fx = f_beta(x, p, k);
    if (std::abs(fx) < std::abs(fbest)) {
      best = x;
      fbest = fx;
    }
    if (fx > 0.0) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    if (hi - lo <= tol && std::abs(fbest) <= tol) return best;
  }
  if (std::abs(fbest) <= tol) return best;
  throw numeric_error("beta root refinement did not reach the requested tolerance");
}

/// Solved slotted chain: beta plus the stationary boundary probabilities
/// pi1 = (1 - beta^2)/2 and pi0 = (1 - beta)/2; pi_i = beta^(i-1) pi1.
struct DtmcSolution {
  double p = 0.0;
  int k = 0;
  double beta = 0.0;
  double pi1 = 0.0;
  double pi0 = 0.0;
  double slot_tau_seconds = 1.0;
};

inline DtmcSolution solve_dtmc(double p, int k, double slot_tau_seconds = 1.0,
                               double tol = 1e-13) {
  if (!(slot_tau_seconds > 0.0)) throw invalid_parameter_error("slot duration must be positive");
  DtmcSolution sol;
  sol.p = p;
  sol.k = k;
  sol.beta = solve_beta(p, k, tol);
  sol.pi1 = (1.0 - sol.beta * sol.beta) / 2.0;
  sol.pi0 = (1.0 - sol.beta) / 2.0;
  sol.slot_tau_seconds = slot_tau_seconds;
  return sol;
}

/// E[Q] of the slotted chain, (1+beta) / (2(1-beta)).
inline double dtmc_expected_queue(double beta) { return (1.0 + beta) / (2.0 * (1.0 - beta)); }

/// Slotted-model metrics. Capacity q*k*p/(2*tau) is exact and matches the
/// continuous chain with mu = p/tau; E[Q] needs the beta root.
inline PerformanceMetrics dtmc_metrics(double p, int k, double q, double slot_tau_seconds) {
  if (!(q > 0.0) || q > 1.0) throw invalid_parameter_error("q must lie in (0, 1]");
  if (!(slot_tau_seconds > 0.0)) throw invalid_parameter_error("slot duration must be positive");
  const double beta = solve_beta(p, k);

  PerformanceMetrics metrics;
  metrics.capacity = q * k * p / (2.0 * slot_tau_seconds);
  metrics.expected_queue = dtmc_expected_queue(beta);
  metrics.per_user_rate.assign(static_cast<std::size_t>(k), 2.0 * metrics.capacity / k);
  metrics.per_link_queue.assign(static_cast<std::size_t>(k), metrics.expected_queue / k);
  return metrics;
}

/// Boundary transition probability P_{i,0} (state i -> empty), 1 <= i <= k-1.
inline double dtmc_boundary_p0(int i, int k, double p) {
  const double pbar = 1.0 - p;
  if (i % 2 == 0) {
    return pbar * detail::parity_tail(i, k - 1, p, /*odd=*/false) +
           p * detail::parity_tail(i + 1, k - 1, p, /*odd=*/true);
  }
  return pbar * detail::parity_tail(i, k - 1, p, /*odd=*/true) +
         p * detail::parity_tail(i + 1, k - 1, p, /*odd=*/false);
}

/// Boundary transition probability P_{i,1} (state i -> one stored pair),
/// 1 <= i <= k.
inline double dtmc_boundary_p1(int i, int k, double p) {
  const double pbar = 1.0 - p;
  if (i % 2 == 0) {
    return pbar * detail::parity_tail(i - 1, k - 1, p, /*odd=*/true) +
           p * detail::parity_tail(i, k - 1, p, /*odd=*/false);
  }
  return pbar * detail::parity_tail(i - 1, k - 1, p, /*odd=*/false) +
         p * detail::parity_tail(i, k - 1, p, /*odd=*/true);
}

/// Residual of the boundary-row identity
///   sum_{i=1..k-1} beta^i (P_{i,0} + P_{i,1}) + beta^k P_{k,1} - beta,
/// which vanishes at the interior root of f.
inline double boundary_kernel_identity(double p, int k, double beta) {
  if (!(p > 0.0) || !(p < 1.0)) throw invalid_parameter_error("p must lie strictly in (0, 1)");
  if (k < 3) throw invalid_parameter_error("slotted model requires k >= 3");
  double acc = 0.0;
  double bpow = 1.0;
  for (int i = 1; i <= k - 1; ++i) {
    bpow *= beta;
    acc += bpow * (dtmc_boundary_p0(i, k, p) + dtmc_boundary_p1(i, k, p));
  }
  bpow *= beta;
  acc += bpow * dtmc_boundary_p1(k, k, p);
  return acc - beta;
}

/// max over the grid of |E[Q]_DTMC - E[Q]_CTMC| / E[Q]_DTMC, with the
/// continuous side evaluated at mu = p/tau (E[Q]_CTMC = k/(2(k-2)) is
/// p-independent).
inline double max_rel_err_eq(int k, std::span<const double> p_grid) {
  if (k < 3) throw invalid_parameter_error("slotted model requires k >= 3");
  const double eq_ctmc = k / (2.0 * (k - 2.0));
  double max_err = 0.0;
  for (double p : p_grid) {
    const double beta = solve_beta(p, k, 1e-12);
    const double eq_dtmc = dtmc_expected_queue(beta);
    max_err = std::max(max_err, std::abs(eq_dtmc - eq_ctmc) / eq_dtmc);
  }
  return max_err;
}

}  // namespace qswitch
