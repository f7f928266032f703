#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <random>
#include <utility>
#include <vector>

#include "qswitch/errors.hpp"
#include "qswitch/model.hpp"

namespace qswitch {

struct SimParams {
  SwitchConfig config;
  double horizon = 0.0;  // simulated seconds (continuous) or slot count (slotted)
  std::uint64_t seed = 1;
  double warmup_fraction = 0.1;
  int batches = 20;
  double slot_tau_seconds = 1.0;  // slotted engine only
  bool check_invariants = false;
};

/// Point estimates with 95% batch-means confidence-interval halfwidths,
/// plus the raw event counters of the run.
struct SimStats {
  double capacity_est = 0.0;
  double capacity_ci = 0.0;
  double eq_est = 0.0;
  double eq_ci = 0.0;
  std::vector<double> per_user_rate_est;

  long long max_occupancy = 0;
  long long drops = 0;
  long long decohered = 0;
  long long measurements_attempted = 0;
  long long measurements_succeeded = 0;
  long long pairs_generated = 0;
  long long pairs_consumed = 0;
  long long pairs_in_storage_end = 0;

  std::vector<double> batch_capacity;
  std::vector<double> batch_eq;
  double effective_horizon = 0.0;
};

namespace detail {

// Student-t 0.975 quantile via a Cornish-Fisher expansion of the normal
// quantile; plenty accurate for df >= 9.
inline double t_quantile_975(int df) {
  const double z = 1.959963984540054;
  const double v = static_cast<double>(df);
  const double z3 = z * z * z;
  const double z5 = z3 * z * z;
  const double z7 = z5 * z * z;
  return z + (z3 + z) / (4.0 * v) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * v * v) +
         (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * v * v * v);
}

inline void finalize_estimates(SimStats& stats, double effective_horizon) {
  stats.effective_horizon = effective_horizon;
  const int m = static_cast<int>(stats.batch_capacity.size());
  auto mean_ci = [&](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (xs.size() - 1);
    const double halfwidth = t_quantile_975(m - 1) * std::sqrt(var / xs.size());
    return std::pair<double, double>{mean, halfwidth};
  };
  std::tie(stats.capacity_est, stats.capacity_ci) = mean_ci(stats.batch_capacity);
  std::tie(stats.eq_est, stats.eq_ci) = mean_ci(stats.batch_eq);
}

inline void validate_common(const SimParams& params) {
  if (!(params.horizon > 0.0)) throw invalid_parameter_error("horizon must be positive");
  if (params.batches < 10) throw invalid_parameter_error("need at least 10 batches");
  if (params.warmup_fraction < 0.0 || params.warmup_fraction >= 1.0) {
    throw invalid_parameter_error("warmup fraction must lie in [0, 1)");
  }
}

}  // namespace detail

/// Exponential-race continuous simulator of the OLEF switch. Handles every
/// model variant: n >= 2, heterogeneous rates, finite/infinite buffers and
/// decoherence.
///
/// Dynamics per generation on link l: if n-1 other links hold stored pairs,
/// the oldest heads are consumed together with the new pair in a measurement
/// (qubits consumed whether or not it succeeds); otherwise the pair is
/// stored, evicting link l's oldest pair when the buffer is full. Each
/// stored pair decoheres at rate alpha (aggregate J*alpha).
inline SimStats run_ctmc_sim(const SimParams& params) {
  detail::validate_common(params);
  const SwitchConfig& cfg = params.config;
  const int k = cfg.k();
  const int n = cfg.n();
  const double alpha = cfg.alpha();
  const double gamma = cfg.aggregate_rate();
  const bool finite = !cfg.buffer().is_infinite();
  const std::size_t bound = finite ? static_cast<std::size_t>(cfg.buffer().bound()) : 0;

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<std::deque<double>> queues(static_cast<std::size_t>(k));
  std::vector<int> nonempty;  // link ids with stored pairs, at most n-1 of them
  nonempty.reserve(static_cast<std::size_t>(n));
  long long occupancy = 0;

  const double horizon = params.horizon;
  const double warm = horizon * params.warmup_fraction;
  const int batches = params.batches;
  const double batch_len = (horizon - warm) / batches;

  std::vector<double> occ_integral(static_cast<std::size_t>(batches), 0.0);
  std::vector<long long> batch_succ(static_cast<std::size_t>(batches), 0);
  std::vector<long long> per_user_succ(static_cast<std::size_t>(k), 0);

  SimStats stats;
  stats.per_user_rate_est.resize(static_cast<std::size_t>(k));

  // occupancy J held over [t0, t1), split across batch windows
  auto integrate = [&](double t0, double t1, long long j) {
    if (j == 0) return;
    double a = std::max(t0, warm);
    const double b = std::min(t1, horizon);
    while (a < b) {
      int idx = static_cast<int>((a - warm) / batch_len);
      idx = std::clamp(idx, 0, batches - 1);
      const double edge = std::min(b, warm + (idx + 1) * batch_len);
      occ_integral[static_cast<std::size_t>(idx)] += j * (edge - a);
      if (edge <= a) break;  // guards float stagnation at window edges
      a = edge;
    }
  };
  auto batch_of = [&](double t) {
    return std::clamp(static_cast<int>((t - warm) / batch_len), 0, batches - 1);
  };

  std::vector<int> selected;
  selected.reserve(static_cast<std::size_t>(n));
  double t = 0.0;
  while (true) {
    const double total_rate = gamma + static_cast<double>(occupancy) * alpha;
    const double dt = -std::log1p(-unif(rng)) / total_rate;
    const double t_next = t + dt;
    integrate(t, t_next, occupancy);
    if (t_next >= horizon) break;
    t = t_next;

    const double pick = unif(rng) * total_rate;
    if (pick < gamma) {
      // generation on link l
      int link = 0;
      double acc = cfg.mu(0);
      while (pick >= acc && link + 1 < k) acc += cfg.mu(++link);
      ++stats.pairs_generated;

      selected.clear();
      for (int m : nonempty) {
        if (m != link) selected.push_back(m);
      }
      if (static_cast<int>(selected.size()) >= n - 1) {
        // OLEF: the n-1 links whose head pairs are oldest, ties by index
        std::sort(selected.begin(), selected.end(), [&](int a, int b) {
          const double ta = queues[static_cast<std::size_t>(a)].front();
          const double tb = queues[static_cast<std::size_t>(b)].front();
          return ta != tb ? ta < tb : a < b;
        });
        selected.resize(static_cast<std::size_t>(n - 1));
        for (int m : selected) {
          auto& queue = queues[static_cast<std::size_t>(m)];
          queue.pop_front();
          if (queue.empty()) {
            nonempty.erase(std::find(nonempty.begin(), nonempty.end(), m));
          }
        }
        occupancy -= n - 1;
        stats.pairs_consumed += n;  // n-1 stored pairs plus the fresh one
        ++stats.measurements_attempted;
        if (unif(rng) < cfg.q()) {
          ++stats.measurements_succeeded;
          if (t >= warm) {
            ++batch_succ[static_cast<std::size_t>(batch_of(t))];
            ++per_user_succ[static_cast<std::size_t>(link)];
            for (int m : selected) ++per_user_succ[static_cast<std::size_t>(m)];
          }
        }
      } else {
        auto& queue = queues[static_cast<std::size_t>(link)];
        if (finite && queue.size() == bound) {
          queue.pop_front();  // drop the oldest stored pair
          --occupancy;
          ++stats.drops;
        }
        if (queue.empty()) nonempty.push_back(link);
        queue.push_back(t);
        ++occupancy;
        stats.max_occupancy = std::max(stats.max_occupancy, occupancy);
      }
    } else {
      // decoherence: uniform victim among the stored pairs
      long long victim = static_cast<long long>((pick - gamma) / alpha);
      victim = std::min(victim, occupancy - 1);
      for (int l = 0; l < k; ++l) {
        auto& queue = queues[static_cast<std::size_t>(l)];
        const long long sz = static_cast<long long>(queue.size());
        if (victim < sz) {
          queue.erase(queue.begin() + victim);
          if (queue.empty()) {
            nonempty.erase(std::find(nonempty.begin(), nonempty.end(), l));
          }
          break;
        }
        victim -= sz;
      }
      --occupancy;
      ++stats.decohered;
    }

    assert(static_cast<int>(nonempty.size()) <= n - 1);
    if (params.check_invariants) {
      if (static_cast<int>(nonempty.size()) > n - 1) {
        throw numeric_error("OLEF invariant violated: more than n-1 links hold pairs");
      }
      long long recount = 0;
      for (const auto& queue : queues) {
        if (finite && queue.size() > bound) {
          throw numeric_error("buffer bound exceeded");
        }
        recount += static_cast<long long>(queue.size());
      }
      if (recount != occupancy) throw numeric_error("occupancy counter out of sync");
    }
  }

  stats.pairs_in_storage_end = occupancy;
  if (stats.pairs_generated != stats.pairs_consumed + stats.drops + stats.decohered +
                                   stats.pairs_in_storage_end) {
    throw numeric_error("pair conservation identity violated");
  }

  const double effective = horizon - warm;
  stats.batch_capacity.resize(static_cast<std::size_t>(batches));
  stats.batch_eq.resize(static_cast<std::size_t>(batches));
  for (int b = 0; b < batches; ++b) {
    stats.batch_capacity[static_cast<std::size_t>(b)] =
        static_cast<double>(batch_succ[static_cast<std::size_t>(b)]) / batch_len;
    stats.batch_eq[static_cast<std::size_t>(b)] = occ_integral[static_cast<std::size_t>(b)] / batch_len;
  }
  for (int l = 0; l < k; ++l) {
    stats.per_user_rate_est[static_cast<std::size_t>(l)] =
        static_cast<double>(per_user_succ[static_cast<std::size_t>(l)]) / effective;
  }
  detail::finalize_estimates(stats, effective);
  return stats;
}

/// Slotted Bernoulli simulator of the bipartite chain (n = 2, no
/// decoherence). Per slot every link succeeds independently with its p_l;
/// within the slot a success on the stored link enqueues first, successes
/// on other links then consume stored pairs oldest-first, and leftover new
/// pairs on distinct links are paired among themselves (one leftover pair,
/// chosen uniformly, becomes the new stored link). Buffer overflow evicts
/// the oldest at slot end. Capacity is reported per second via tau.
inline SimStats run_slotted_sim(const SimParams& params) {
  detail::validate_common(params);
  const SwitchConfig& cfg = params.config;
  if (cfg.n() != 2) throw unsupported_model_error("slotted engine models n = 2 only");
  if (cfg.alpha() != 0.0) {
    throw unsupported_model_error("slotted engine does not model decoherence");
  }
  if (cfg.success_prob_p().empty()) {
    throw invalid_parameter_error("slotted engine requires per-link success probabilities");
  }
  if (!(params.slot_tau_seconds > 0.0)) {
    throw invalid_parameter_error("slot duration must be positive");
  }

  const int k = cfg.k();
  const std::vector<double>& p = cfg.success_prob_p();
  const bool finite = !cfg.buffer().is_infinite();
  const std::size_t bound = finite ? static_cast<std::size_t>(cfg.buffer().bound()) : 0;
  const double tau = params.slot_tau_seconds;

  const long long slots = static_cast<long long>(std::llround(params.horizon));
  if (slots <= 0) throw invalid_parameter_error("horizon must cover at least one slot");
  const long long warm = static_cast<long long>(static_cast<double>(slots) * params.warmup_fraction);
  const long long measured = slots - warm;
  const int batches = params.batches;
  if (measured < batches) throw invalid_parameter_error("horizon too short for the batch count");

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  int stored_link = -1;
  std::deque<long long> store;

  std::vector<long long> batch_succ(static_cast<std::size_t>(batches), 0);
  std::vector<long long> batch_occ(static_cast<std::size_t>(batches), 0);
  std::vector<long long> batch_slots(static_cast<std::size_t>(batches), 0);
  std::vector<long long> per_user_succ(static_cast<std::size_t>(k), 0);
  std::vector<char> succ(static_cast<std::size_t>(k), 0);
  std::vector<int> rem;

  SimStats stats;
  stats.per_user_rate_est.resize(static_cast<std::size_t>(k));

  for (long long slot = 0; slot < slots; ++slot) {
    const bool measure = slot >= warm;
    const int batch = measure
        ? static_cast<int>(((slot - warm) * batches) / measured)
        : 0;

    for (int l = 0; l < k; ++l) {
      succ[static_cast<std::size_t>(l)] = unif(rng) < p[static_cast<std::size_t>(l)] ? 1 : 0;
      if (succ[static_cast<std::size_t>(l)]) ++stats.pairs_generated;
    }

    if (stored_link >= 0 && succ[static_cast<std::size_t>(stored_link)]) {
      store.push_back(slot);  // the stored link's new pair enqueues first
    }

    rem.clear();
    const int owner = stored_link;
    for (int l = 0; l < k; ++l) {
      if (!succ[static_cast<std::size_t>(l)] || l == owner) continue;
      if (!store.empty()) {
        store.pop_front();
        stats.pairs_consumed += 2;
        ++stats.measurements_attempted;
        if (unif(rng) < cfg.q()) {
          ++stats.measurements_succeeded;
          if (measure) {
            ++batch_succ[static_cast<std::size_t>(batch)];
            ++per_user_succ[static_cast<std::size_t>(l)];
            ++per_user_succ[static_cast<std::size_t>(owner)];
          }
        }
      } else {
        rem.push_back(l);
      }
    }
    if (store.empty()) stored_link = -1;

    if (!rem.empty()) {
      int leftover = -1;
      if (rem.size() % 2 == 1) {
        const std::size_t pickd =
            std::min(rem.size() - 1,
                     static_cast<std::size_t>(unif(rng) * static_cast<double>(rem.size())));
        leftover = rem[pickd];
        rem.erase(rem.begin() + static_cast<std::ptrdiff_t>(pickd));
      }
      for (std::size_t i = 0; i + 1 < rem.size(); i += 2) {
        stats.pairs_consumed += 2;
        ++stats.measurements_attempted;
        if (unif(rng) < cfg.q()) {
          ++stats.measurements_succeeded;
          if (measure) {
            ++batch_succ[static_cast<std::size_t>(batch)];
            ++per_user_succ[static_cast<std::size_t>(rem[i])];
            ++per_user_succ[static_cast<std::size_t>(rem[i + 1])];
          }
        }
      }
      if (leftover >= 0) {
        stored_link = leftover;
        store.push_back(slot);
      }
    }

    if (finite) {
      while (store.size() > bound) {
        store.pop_front();
        ++stats.drops;
      }
    }

    stats.max_occupancy = std::max(stats.max_occupancy, static_cast<long long>(store.size()));
    if (params.check_invariants) {
      if (store.empty() != (stored_link < 0)) {
        throw numeric_error("stored-link bookkeeping out of sync");
      }
    }
    if (measure) {
      batch_occ[static_cast<std::size_t>(batch)] += static_cast<long long>(store.size());
      ++batch_slots[static_cast<std::size_t>(batch)];
    }
  }

  stats.pairs_in_storage_end = static_cast<long long>(store.size());
  if (stats.pairs_generated != stats.pairs_consumed + stats.drops + stats.pairs_in_storage_end) {
    throw numeric_error("pair conservation identity violated");
  }

  stats.batch_capacity.resize(static_cast<std::size_t>(batches));
  stats.batch_eq.resize(static_cast<std::size_t>(batches));
  for (int b = 0; b < batches; ++b) {
    const double nslots = static_cast<double>(batch_slots[static_cast<std::size_t>(b)]);
    stats.batch_capacity[static_cast<std::size_t>(b)] =
        static_cast<double>(batch_succ[static_cast<std::size_t>(b)]) / (nslots * tau);
    stats.batch_eq[static_cast<std::size_t>(b)] =
        static_cast<double>(batch_occ[static_cast<std::size_t>(b)]) / nslots;
  }
  for (int l = 0; l < k; ++l) {
    stats.per_user_rate_est[static_cast<std::size_t>(l)] =
        static_cast<double>(per_user_succ[static_cast<std::size_t>(l)]) /
        (static_cast<double>(measured) * tau);
  }
  detail::finalize_estimates(stats, static_cast<double>(measured) * tau);
  return stats;
}

enum class SimEngine { Continuous, Slotted };

inline SimStats run_sim(const SimParams& params, SimEngine engine) {
  return engine == SimEngine::Continuous ? run_ctmc_sim(params) : run_slotted_sim(params);
}

/// R independent replications with seeds derived from the base seed by a
/// golden-ratio increment (seed_i = seed XOR 0x9E3779B97F4A7C15 * i); batch
/// means are pooled across replications.
inline SimStats replicate(const SimParams& params, int replications,
                          SimEngine engine = SimEngine::Continuous) {
  if (replications < 1) throw invalid_parameter_error("need at least one replication");
  if (replications == 1) return run_sim(params, engine);

  SimStats pooled;
  for (int r = 0; r < replications; ++r) {
    SimParams rep = params;
    rep.seed = params.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r));
    const SimStats stats = run_sim(rep, engine);
    if (r == 0) {
      pooled = stats;
      continue;
    }
    pooled.max_occupancy = std::max(pooled.max_occupancy, stats.max_occupancy);
    pooled.drops += stats.drops;
    pooled.decohered += stats.decohered;
    pooled.measurements_attempted += stats.measurements_attempted;
    pooled.measurements_succeeded += stats.measurements_succeeded;
    pooled.pairs_generated += stats.pairs_generated;
    pooled.pairs_consumed += stats.pairs_consumed;
    pooled.pairs_in_storage_end += stats.pairs_in_storage_end;
    pooled.batch_capacity.insert(pooled.batch_capacity.end(), stats.batch_capacity.begin(),
                                 stats.batch_capacity.end());
    pooled.batch_eq.insert(pooled.batch_eq.end(), stats.batch_eq.begin(), stats.batch_eq.end());
    for (std::size_t l = 0; l < pooled.per_user_rate_est.size(); ++l) {
      pooled.per_user_rate_est[l] += stats.per_user_rate_est[l];
    }
    pooled.effective_horizon += stats.effective_horizon;
  }
  for (double& rate : pooled.per_user_rate_est) rate /= replications;
  detail::finalize_estimates(pooled, pooled.effective_horizon);
  return pooled;
}

}  // namespace qswitch
