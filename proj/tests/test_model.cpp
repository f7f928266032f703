#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "qswitch/model.hpp"

using namespace qswitch;
using Catch::Approx;

TEST_CASE("link rate from fiber budget") {
  // 100 km at 0.2 dB/km, c = 0.1, tau = 1 ns -> 1 Mega-ebit/s
  CHECK(link_rate_from_length(100.0, 0.2, 0.1, 1e-9) == Approx(1.0e6).epsilon(1e-12));
  // zero length: eta = 1
  CHECK(link_rate_from_length(0.0, 0.2, 0.1, 1e-9) == Approx(1.0e8).epsilon(1e-12));
  // 86 km: the paper's class-1 link, mu ~ 1.9 Mega-ebits/s
  CHECK(link_rate_from_length(86.0, 0.2, 0.1, 1e-9) == Approx(1.9054607e6).epsilon(1e-6));

  CHECK_THROWS_AS(link_rate_from_length(10.0, 0.2, 0.1, 0.0), invalid_parameter_error);
  CHECK_THROWS_AS(link_rate_from_length(10.0, 0.2, 0.1, -1e-9), invalid_parameter_error);
  CHECK_THROWS_AS(link_rate_from_length(10.0, 0.2, 0.0, 1e-9), invalid_parameter_error);
  CHECK_THROWS_AS(link_rate_from_length(10.0, 0.2, 1.5, 1e-9), invalid_parameter_error);
  CHECK_THROWS_AS(link_rate_from_length(-1.0, 0.2, 0.1, 1e-9), invalid_parameter_error);
}

TEST_CASE("link rate monotonicity") {
  double prev = link_rate_from_length(0.0, 0.2, 0.1, 1e-9);
  for (double length = 5.0; length <= 200.0; length += 5.0) {
    const double rate = link_rate_from_length(length, 0.2, 0.1, 1e-9);
    CHECK(rate < prev);  // strictly decreasing in length
    prev = rate;
  }
  prev = 0.0;
  for (double c = 0.05; c <= 1.0; c += 0.05) {
    const double rate = link_rate_from_length(50.0, 0.2, c, 1e-9);
    CHECK(rate > prev);  // strictly increasing in c
    prev = rate;
  }
}

TEST_CASE("aggregate rate") {
  const SwitchConfig three = SwitchConfig::homogeneous(3, 2, 1.0, Buffer::infinite());
  CHECK(aggregate_rate(three) == Approx(3.0));

  std::vector<LinkConfig> links;
  for (double mu : {35.0, 15.0, 15.0, 3.0, 3.0}) links.push_back(LinkConfig::from_rate(mu));
  const SwitchConfig five(2, links, Buffer::finite(100));
  CHECK(aggregate_rate(five) == Approx(71.0));
  CHECK(aggregate_rate(five) / 2.0 == Approx(35.5));

  CHECK(aggregate_rate(std::vector<double>{5.0}) == Approx(5.0));
}

TEST_CASE("switch config validation") {
  CHECK_THROWS_AS(SwitchConfig::homogeneous(1, 2, 1.0, Buffer::infinite()),
                  invalid_parameter_error);
  CHECK_THROWS_AS(SwitchConfig::homogeneous(3, 4, 1.0, Buffer::infinite()),
                  invalid_parameter_error);  // n > k
  CHECK_THROWS_AS(SwitchConfig::homogeneous(3, 1, 1.0, Buffer::infinite()),
                  invalid_parameter_error);
  CHECK_THROWS_AS(SwitchConfig::homogeneous(3, 2, -1.0, Buffer::infinite()),
                  invalid_parameter_error);
  CHECK_THROWS_AS(SwitchConfig::homogeneous(3, 2, 1.0, Buffer::infinite(), 1.5),
                  invalid_parameter_error);
  CHECK_THROWS_AS(SwitchConfig::homogeneous(3, 2, 1.0, Buffer::infinite(), 1.0, -0.1),
                  invalid_parameter_error);
  CHECK_THROWS_AS(Buffer::finite(0), invalid_parameter_error);

  const SwitchConfig cfg = SwitchConfig::homogeneous(4, 3, 2.0, Buffer::finite(2), 0.5, 0.1);
  CHECK(cfg.k() == 4);
  CHECK(cfg.n() == 3);
  CHECK(cfg.is_homogeneous());
  CHECK(cfg.buffer().bound() == 2);

  std::vector<LinkConfig> links{LinkConfig::from_rate(1.0), LinkConfig::from_rate(2.0)};
  CHECK_FALSE(SwitchConfig(2, links, Buffer::infinite()).is_homogeneous());
  CHECK_THROWS_AS(SwitchConfig(2, links, Buffer::infinite(), 1.0, 0.0, {0.5}),
                  invalid_parameter_error);  // wrong p length
  CHECK_THROWS_AS(SwitchConfig(2, links, Buffer::infinite(), 1.0, 0.0, {0.5, 1.0}),
                  invalid_parameter_error);  // p = 1 not allowed
}

TEST_CASE("stability classification") {
  // two homogeneous links: not stable
  const auto two = check_stability(SwitchConfig::homogeneous(2, 2, 1.0, Buffer::infinite()));
  CHECK_FALSE(two.stable);
  CHECK(two.basis == StabilityBasis::Proven);

  // mu = (3,1,1): rho_1 = 3/2 >= 1
  std::vector<LinkConfig> links{LinkConfig::from_rate(3.0), LinkConfig::from_rate(1.0),
                                LinkConfig::from_rate(1.0)};
  const auto het = check_stability(SwitchConfig(2, links, Buffer::infinite()));
  CHECK_FALSE(het.stable);
  CHECK(het.loads[0] == Approx(1.5));

  // k=4, n=3 homogeneous: proven stable
  const auto tri = check_stability(SwitchConfig::homogeneous(4, 3, 1.0, Buffer::infinite()));
  CHECK(tri.stable);
  CHECK(tri.basis == StabilityBasis::Proven);

  // k=3, n=3: not stable (pole at k=n)
  CHECK_FALSE(check_stability(SwitchConfig::homogeneous(3, 3, 1.0, Buffer::infinite())).stable);

  // n=4: conjectured for k>n
  const auto quad = check_stability(SwitchConfig::homogeneous(6, 4, 1.0, Buffer::infinite()));
  CHECK(quad.stable);
  CHECK(quad.basis == StabilityBasis::Conjectured);
  CHECK_FALSE(check_stability(SwitchConfig::homogeneous(4, 4, 1.0, Buffer::infinite())).stable);

  // finite buffer and decoherence are always stable, proven
  CHECK(check_stability(SwitchConfig::homogeneous(2, 2, 1.0, Buffer::finite(3))).stable);
  CHECK(check_stability(SwitchConfig::homogeneous(2, 2, 1.0, Buffer::infinite(), 1.0, 0.5)).stable);
}

TEST_CASE("stability properties") {
  // homogeneous k: stable iff k >= 3, matching the heterogeneous rule with
  // equal rates (rho = 1/(k-1))
  for (int k = 2; k <= 12; ++k) {
    const auto homog = check_stability(SwitchConfig::homogeneous(k, 2, 0.7, Buffer::infinite()));
    CHECK(homog.stable == (k >= 3));
    std::vector<LinkConfig> links(static_cast<std::size_t>(k), LinkConfig::from_rate(0.7));
    const auto het = check_stability(SwitchConfig(2, links, Buffer::infinite()));
    CHECK(het.stable == homog.stable);
  }

  // scaling all rates leaves the report unchanged
  std::vector<double> rates{2.0, 1.3, 0.4, 0.9};
  for (double scale : {0.001, 1.0, 2500.0}) {
    std::vector<LinkConfig> links;
    for (double mu : rates) links.push_back(LinkConfig::from_rate(mu * scale));
    const auto report = check_stability(SwitchConfig(2, links, Buffer::infinite()));
    CHECK(report.stable);
    CHECK(report.loads[0] == Approx(2.0 / 2.6));
  }
}
