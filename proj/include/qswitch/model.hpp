#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qswitch/errors.hpp"

namespace qswitch {

/// Entanglement generation rate of one link from its fiber budget:
/// mu = c * 10^(-0.1 * attenuation * length) / tau, in ebits/second.
inline double link_rate_from_length(double length_km, double attenuation_db_per_km,
                                    double efficiency_c, double slot_tau_seconds) {
  if (!(slot_tau_seconds > 0.0)) {
    throw invalid_parameter_error("slot duration must be positive");
  }
  if (!(efficiency_c > 0.0) || efficiency_c > 1.0) {
    throw invalid_parameter_error("efficiency must lie in (0, 1]");
  }
  if (length_km < 0.0 || attenuation_db_per_km < 0.0) {
    throw invalid_parameter_error("length and attenuation must be nonnegative");
  }
  const double eta = std::pow(10.0, -0.1 * attenuation_db_per_km * length_km);
  return efficiency_c * eta / slot_tau_seconds;
}

/// Fiber transmissivity 10^(-0.1 * attenuation * length).
inline double fiber_transmissivity(double length_km, double attenuation_db_per_km) {
  if (length_km < 0.0 || attenuation_db_per_km < 0.0) {
    throw invalid_parameter_error("length and attenuation must be nonnegative");
  }
  return std::pow(10.0, -0.1 * attenuation_db_per_km * length_km);
}

/// One link of the star: just its generation rate, in ebits/second.
struct LinkConfig {
  double rate_mu = 0.0;

  static LinkConfig from_rate(double mu) {
    if (!(mu > 0.0)) throw invalid_parameter_error("link rate must be positive");
    return LinkConfig{mu};
  }

  static LinkConfig from_length(double length_km, double attenuation_db_per_km,
                                double efficiency_c, double slot_tau_seconds) {
    return LinkConfig{link_rate_from_length(length_km, attenuation_db_per_km,
                                            efficiency_c, slot_tau_seconds)};
  }

  friend bool operator==(const LinkConfig&, const LinkConfig&) = default;
};

/// Per-link storage bound: unbounded, or at most `bound()` stored pairs.
class Buffer {
 public:
  static Buffer infinite() { return Buffer(0); }

  static Buffer finite(int bound) {
    if (bound < 1) throw invalid_parameter_error("finite buffer bound must be >= 1");
    return Buffer(bound);
  }

  bool is_infinite() const { return bound_ == 0; }

  int bound() const {
    if (is_infinite()) throw std::logic_error("infinite buffer has no bound");
    return bound_;
  }

  friend bool operator==(const Buffer&, const Buffer&) = default;

 private:
  explicit Buffer(int bound) : bound_(bound) {}
  int bound_;  // 0 encodes infinite
};

/// Full specification of one switch model instance.
///
/// k links (rates mu_1..mu_k), entanglement size n <= k, per-link buffer,
/// measurement success probability q, per-pair decoherence rate alpha, and
/// optionally per-slot success probabilities p_l for the slotted model.
class SwitchConfig {
 public:
  SwitchConfig(int n, std::vector<LinkConfig> links, Buffer buffer, double q = 1.0,
               double alpha = 0.0, std::vector<double> success_prob_p = {})
      : n_(n),
        links_(std::move(links)),
        buffer_(buffer),
        q_(q),
        alpha_(alpha),
        success_prob_p_(std::move(success_prob_p)) {
    if (links_.size() < 2) throw invalid_parameter_error("need at least 2 links");
    if (n_ < 2) throw invalid_parameter_error("entanglement size n must be >= 2");
    if (static_cast<std::size_t>(n_) > links_.size()) {
      throw invalid_parameter_error("entanglement size n cannot exceed the link count");
    }
    for (const LinkConfig& link : links_) {
      if (!(link.rate_mu > 0.0)) throw invalid_parameter_error("all link rates must be positive");
    }
    if (q_ < 0.0 || q_ > 1.0) throw invalid_parameter_error("q must lie in [0, 1]");
    if (alpha_ < 0.0) throw invalid_parameter_error("decoherence rate must be nonnegative");
    if (!success_prob_p_.empty()) {
      if (success_prob_p_.size() != links_.size()) {
        throw invalid_parameter_error("success_prob_p must have one entry per link");
      }
      for (double p : success_prob_p_) {
        if (!(p > 0.0) || !(p < 1.0)) {
          throw invalid_parameter_error("slot success probabilities must lie in (0, 1)");
        }
      }
    }
  }

  /// Homogeneous convenience: k identical links of rate mu.
  static SwitchConfig homogeneous(int k, int n, double mu, Buffer buffer, double q = 1.0,
                                  double alpha = 0.0) {
    if (k < 2) throw invalid_parameter_error("need at least 2 links");
    return SwitchConfig(n, std::vector<LinkConfig>(static_cast<std::size_t>(k),
                                                   LinkConfig::from_rate(mu)),
                        buffer, q, alpha);
  }

  int k() const { return static_cast<int>(links_.size()); }
  int n() const { return n_; }
  const std::vector<LinkConfig>& links() const { return links_; }
  double mu(int link) const { return links_[static_cast<std::size_t>(link)].rate_mu; }
  Buffer buffer() const { return buffer_; }
  double q() const { return q_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& success_prob_p() const { return success_prob_p_; }

  /// gamma = sum of all link rates.
  double aggregate_rate() const {
    double gamma = 0.0;
    for (const LinkConfig& link : links_) gamma += link.rate_mu;
    return gamma;
  }

  bool is_homogeneous() const {
    return std::all_of(links_.begin(), links_.end(),
                       [&](const LinkConfig& l) { return l.rate_mu == links_[0].rate_mu; });
  }

  /// Per-link loads rho_l = mu_l / (gamma - mu_l); governs n=2 stability.
  std::vector<double> loads() const {
    const double gamma = aggregate_rate();
    std::vector<double> rho(links_.size());
    for (std::size_t l = 0; l < links_.size(); ++l) {
      rho[l] = links_[l].rate_mu / (gamma - links_[l].rate_mu);
    }
    return rho;
  }

  SwitchConfig with_alpha(double alpha) const {
    SwitchConfig copy = *this;
    if (alpha < 0.0) throw invalid_parameter_error("decoherence rate must be nonnegative");
    copy.alpha_ = alpha;
    return copy;
  }

  SwitchConfig with_buffer(Buffer buffer) const {
    SwitchConfig copy = *this;
    copy.buffer_ = buffer;
    return copy;
  }

  SwitchConfig with_success_prob(std::vector<double> p) const {
    return SwitchConfig(n_, links_, buffer_, q_, alpha_, std::move(p));
  }

 private:
  int n_;
  std::vector<LinkConfig> links_;
  Buffer buffer_;
  double q_;
  double alpha_;
  std::vector<double> success_prob_p_;
};

inline double aggregate_rate(const SwitchConfig& config) { return config.aggregate_rate(); }

/// gamma over a bare rate list (usable for a single link, unlike a full config).
inline double aggregate_rate(const std::vector<double>& rates) {
  double gamma = 0.0;
  for (double mu : rates) gamma += mu;
  return gamma;
}

struct PerformanceMetrics {
  double capacity = 0.0;        // end-to-end entanglements per second
  double expected_queue = 0.0;  // stationary stored pairs
  std::vector<double> per_user_rate;
  std::vector<double> per_link_queue;
};

enum class StabilityBasis { Proven, Conjectured };

inline const char* to_string(StabilityBasis basis) {
  return basis == StabilityBasis::Proven ? "proven" : "conjectured";
}

struct StabilityReport {
  bool stable = false;
  StabilityBasis basis = StabilityBasis::Proven;
  std::vector<double> loads;  // rho_l for n=2; empty otherwise
};

/// Positive recurrence of the infinite-horizon chain for `config`.
///
/// Finite buffers and alpha > 0 are always stable (finite chain / linearly
/// growing backward rates). For n=2 with infinite buffer the condition is
/// rho_l < 1 for every link. For n >= 3 the chain is stable iff k > n; this
/// is proven for the homogeneous n=3 chain and conjectured beyond.
inline StabilityReport check_stability(const SwitchConfig& config) {
  StabilityReport report;
  if (config.n() == 2) report.loads = config.loads();

  if (!config.buffer().is_infinite() || config.alpha() > 0.0) {
    report.stable = true;
    report.basis = StabilityBasis::Proven;
    return report;
  }

  if (config.n() == 2) {
    report.stable = std::all_of(report.loads.begin(), report.loads.end(),
                                [](double rho) { return rho < 1.0; });
    report.basis = StabilityBasis::Proven;
    return report;
  }

  report.stable = config.k() > config.n();
  report.basis = (config.n() == 3 && config.is_homogeneous()) ? StabilityBasis::Proven
                                                              : StabilityBasis::Conjectured;
  return report;
}

}  // namespace qswitch
