#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "qswitch/errors.hpp"
#include "qswitch/model.hpp"

namespace qswitch {

namespace detail {

// sum_{j=1..B} rho^j. The ratio form cancels catastrophically as rho -> 1,
// so switch to the explicit sum inside a narrow band around 1.
inline double geometric_sum(double rho, int bound) {
  if (std::abs(1.0 - rho) < 1e-8) {
    double sum = 0.0, term = 1.0;
    for (int j = 1; j <= bound; ++j) {
      term *= rho;
      sum += term;
    }
    return sum;
  }
  return rho * (1.0 - std::pow(rho, bound)) / (1.0 - rho);
}

// sum_{j=1..B} j * rho^j.
inline double geometric_sum_weighted(double rho, int bound) {
  if (std::abs(1.0 - rho) < 1e-8) {
    double sum = 0.0, term = 1.0;
    for (int j = 1; j <= bound; ++j) {
      term *= rho;
      sum += j * term;
    }
    return sum;
  }
  const double rb = std::pow(rho, bound);
  return rho * (1.0 - (bound + 1) * rb + bound * rb * rho) / ((1.0 - rho) * (1.0 - rho));
}

// Partial sums of the decoherence occupancy series for one link:
//   t_j = prod_{i=1..j} mu / (gamma - mu + i*alpha),
//   sum0 = sum_j t_j, sum1 = sum_j j*t_j.
// For an infinite buffer the series is truncated once the geometric tail
// bound (ratio mu/(gamma-mu+(j+1)alpha) at the current depth) drops below
// `tol` for both sums; depth is capped at 10^6.
struct DecoherenceSeries {
  double sum0 = 0.0;
  double sum1 = 0.0;
  std::vector<double> terms;
};

inline DecoherenceSeries decoherence_series(double mu, double gamma, double alpha,
                                            const Buffer& buffer, double tol) {
  constexpr int kMaxDepth = 1000000;
  DecoherenceSeries series;
  const int bound = buffer.is_infinite() ? kMaxDepth : buffer.bound();
  double term = 1.0;
  for (int j = 1; j <= bound; ++j) {
    term *= mu / (gamma - mu + j * alpha);
    series.terms.push_back(term);
    series.sum0 += term;
    series.sum1 += j * term;
    if (buffer.is_infinite()) {
      const double ratio = mu / (gamma - mu + (j + 1) * alpha);
      if (ratio < 1.0) {
        const double tail0 = term * ratio / (1.0 - ratio);
        const double tail1 = term * (j * ratio / (1.0 - ratio) +
                                     ratio / ((1.0 - ratio) * (1.0 - ratio)));
        if (tail0 < tol && tail1 < tol) return series;
      }
    }
  }
  if (buffer.is_infinite()) {
    throw numeric_error("decoherence series did not converge within 10^6 terms");
  }
  return series;
}

}  // namespace detail

/// Stationary distribution of a bipartite (n=2) chain.
///
/// pi_l^(j) = pi0 * rho_l^j when alpha = 0; with decoherence the per-link
/// occupancy products are kept explicitly in `decoherence_terms` up to the
/// truncation depth.
struct BipartiteStationary {
  double pi0 = 0.0;
  std::vector<double> loads;
  Buffer buffer = Buffer::infinite();
  double alpha = 0.0;
  std::vector<std::vector<double>> decoherence_terms;  // filled only when alpha > 0

  /// pi_l^(j), the stationary probability of j stored pairs on link `link`.
  double occupancy(int link, int j) const {
    if (j == 0) return pi0;  // shared empty state
    if (!buffer.is_infinite() && j > buffer.bound()) return 0.0;
    if (alpha > 0.0) {
      const auto& terms = decoherence_terms[static_cast<std::size_t>(link)];
      if (static_cast<std::size_t>(j) > terms.size()) return 0.0;
      return pi0 * terms[static_cast<std::size_t>(j) - 1];
    }
    return pi0 * std::pow(loads[static_cast<std::size_t>(link)], j);
  }
};

namespace detail {

inline void require_bipartite(const SwitchConfig& config) {
  if (config.n() != 2) {
    throw wrong_model_error("bipartite analytics require n = 2");
  }
}

inline void require_stable_if_needed(const SwitchConfig& config) {
  if (config.buffer().is_infinite() && config.alpha() == 0.0) {
    if (!check_stability(config).stable) {
      throw instability_error(
          "infinite-buffer chain is unstable (some mu_l >= gamma/2); no stationary distribution");
    }
  }
}

}  // namespace detail

/// Stationary distribution for any bipartite variant:
/// {homogeneous, heterogeneous} x {finite, infinite buffer} x {alpha >= 0}.
inline BipartiteStationary stationary_bipartite(const SwitchConfig& config,
                                                double truncation_tol = 1e-12) {
  detail::require_bipartite(config);
  detail::require_stable_if_needed(config);
  if (!(truncation_tol > 0.0)) throw invalid_parameter_error("truncation tolerance must be positive");

  BipartiteStationary result;
  result.loads = config.loads();
  result.buffer = config.buffer();
  result.alpha = config.alpha();

  const double gamma = config.aggregate_rate();
  double mass = 0.0;
  if (config.alpha() == 0.0) {
    for (double rho : result.loads) {
      mass += config.buffer().is_infinite() ? rho / (1.0 - rho)
                                            : detail::geometric_sum(rho, config.buffer().bound());
    }
  } else {
    for (int l = 0; l < config.k(); ++l) {
      auto series = detail::decoherence_series(config.mu(l), gamma, config.alpha(),
                                               config.buffer(), truncation_tol);
      mass += series.sum0;
      result.decoherence_terms.push_back(std::move(series.terms));
    }
  }
  result.pi0 = 1.0 / (1.0 + mass);
  return result;
}

/// Capacity, E[Q], per-user rates and per-link queues for any bipartite
/// variant, from the matching closed form:
///   B = inf, alpha = 0:   C = q*gamma/2, C_l = q*mu_l,
///                         E[Q_l] = pi0 * rho_l / (1-rho_l)^2
///   finite B, alpha = 0:  finite geometric sums, two-term C_l
///   alpha > 0:            truncated occupancy series
inline PerformanceMetrics metrics_bipartite(const SwitchConfig& config,
                                            double truncation_tol = 1e-12) {
  detail::require_bipartite(config);
  const BipartiteStationary st = stationary_bipartite(config, truncation_tol);

  const int k = config.k();
  const double q = config.q();
  const double gamma = config.aggregate_rate();

  PerformanceMetrics metrics;
  metrics.per_user_rate.resize(static_cast<std::size_t>(k));
  metrics.per_link_queue.resize(static_cast<std::size_t>(k));

  // sum0_l = sum_j pi_l^(j)/pi0, sum1_l = sum_j j*pi_l^(j)/pi0
  std::vector<double> sum0(static_cast<std::size_t>(k));
  std::vector<double> sum1(static_cast<std::size_t>(k));
  for (int l = 0; l < k; ++l) {
    const double rho = st.loads[static_cast<std::size_t>(l)];
    if (config.alpha() > 0.0) {
      const auto& terms = st.decoherence_terms[static_cast<std::size_t>(l)];
      double s0 = 0.0, s1 = 0.0;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        s0 += terms[j];
        s1 += static_cast<double>(j + 1) * terms[j];
      }
      sum0[static_cast<std::size_t>(l)] = s0;
      sum1[static_cast<std::size_t>(l)] = s1;
    } else if (config.buffer().is_infinite()) {
      sum0[static_cast<std::size_t>(l)] = rho / (1.0 - rho);
      sum1[static_cast<std::size_t>(l)] = rho / ((1.0 - rho) * (1.0 - rho));
    } else {
      sum0[static_cast<std::size_t>(l)] = detail::geometric_sum(rho, config.buffer().bound());
      sum1[static_cast<std::size_t>(l)] =
          detail::geometric_sum_weighted(rho, config.buffer().bound());
    }
  }

  double total0 = 0.0;
  for (int l = 0; l < k; ++l) total0 += sum0[static_cast<std::size_t>(l)];

  if (config.alpha() == 0.0 && config.buffer().is_infinite()) {
    metrics.capacity = q * gamma / 2.0;
    for (int l = 0; l < k; ++l) {
      metrics.per_user_rate[static_cast<std::size_t>(l)] = q * config.mu(l);
    }
  } else {
    double cap = 0.0;
    for (int l = 0; l < k; ++l) {
      cap += (gamma - config.mu(l)) * sum0[static_cast<std::size_t>(l)];
    }
    metrics.capacity = q * st.pi0 * cap;
    // Two-term per-user rate: production consumed by others + consumption of
    // pairs stored at other links.
    for (int l = 0; l < k; ++l) {
      const double own = (gamma - config.mu(l)) * sum0[static_cast<std::size_t>(l)];
      const double others = config.mu(l) * (total0 - sum0[static_cast<std::size_t>(l)]);
      metrics.per_user_rate[static_cast<std::size_t>(l)] = q * st.pi0 * (own + others);
    }
  }

  double eq = 0.0;
  for (int l = 0; l < k; ++l) {
    const double eql = st.pi0 * sum1[static_cast<std::size_t>(l)];
    metrics.per_link_queue[static_cast<std::size_t>(l)] = eql;
    eq += eql;
  }
  metrics.expected_queue = eq;
  return metrics;
}

/// Capacity at alpha = 0 and at alpha = alpha_max, with identical truncation
/// policy; the difference is the decoherence-induced capacity degradation.
inline std::pair<double, double> decoherence_capacity_drop(const SwitchConfig& config,
                                                           double alpha_max,
                                                           double truncation_tol = 1e-12) {
  detail::require_bipartite(config);
  if (alpha_max < 0.0) throw invalid_parameter_error("alpha_max must be nonnegative");
  const double c0 = metrics_bipartite(config.with_alpha(0.0), truncation_tol).capacity;
  const double c1 = metrics_bipartite(config.with_alpha(alpha_max), truncation_tol).capacity;
  return {c0, c1};
}

}  // namespace qswitch
