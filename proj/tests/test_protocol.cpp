#include "protocol.hpp"

#include <cmath>
#include <stdexcept>

#include <doctest.h>

using namespace mdiqkd;

namespace {
ProtocolConfig symmetric_config() {
  SourceSide side;
  side.mu_x = 0.1;
  side.mu_y = 0.4;
  side.mu_z = 0.5;
  side.p_x = 0.2;
  side.p_y = 0.15;
  side.p_z = 0.5;
  return {side, side, 1e10};
}
}  // namespace

TEST_CASE("poisson weights") {
  CHECK(poisson_weight(0.0, 0) == 1.0);
  CHECK(poisson_weight(0.0, 1) == 0.0);
  CHECK(poisson_weight(0.1, 1) ==
        doctest::Approx(0.090483741803595957).epsilon(1e-14));
  CHECK_THROWS_AS(poisson_weight(-0.1, 0), std::domain_error);
  CHECK_THROWS_AS(poisson_weight(0.1, -1), std::domain_error);

  // Normalization: the tail beyond the cutoff is below 1e-15.
  for (double mu : {0.05, 0.3, 0.7, 1.2}) {
    double sum = 0.0;
    int k = 0;
    while (poisson_weight(mu, k) > 1e-16 || k < 5) {
      sum += poisson_weight(mu, k);
      ++k;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("decoy ratio condition holds for WCS weights") {
  // a_j^y / a_j^x must be nondecreasing in j (it equals
  // (mu_y/mu_x)^j e^{mu_x - mu_y} for Poisson weights).
  const double mu_x = 0.1, mu_y = 0.4;
  double prev = 0.0;
  for (int j = 0; j <= 10; ++j) {
    const double ratio = poisson_weight(mu_y, j) / poisson_weight(mu_x, j);
    CHECK(ratio >= prev);
    prev = ratio;
  }
}

TEST_CASE("window counts") {
  ProtocolConfig cfg = symmetric_config();
  cfg.alice.p_x = 0.1;
  cfg.bob.p_x = 0.1;
  CHECK(window_count(cfg, Source::X, Source::X) == doctest::Approx(1e8));

  // Vacuum probability is the derived remainder.
  const double p_o = 1.0 - cfg.alice.p_x - cfg.alice.p_y - cfg.alice.p_z;
  CHECK(cfg.alice.p_o() == doctest::Approx(p_o).epsilon(1e-15));
  CHECK(window_count(cfg, Source::O, Source::X) ==
        doctest::Approx(p_o * 0.1 * 1e10));

  double total = 0.0;
  for (Source l : kAllSources)
    for (Source r : kAllSources) total += window_count(cfg, l, r);
  CHECK(total == doctest::Approx(1e10).epsilon(1e-12));
}

TEST_CASE("branch selection") {
  ProtocolConfig cfg = symmetric_config();
  // mu_yB/mu_xB = 2 vs mu_yA/mu_xA = 3.
  cfg.alice.mu_x = 0.1;
  cfg.alice.mu_y = 0.3;
  cfg.bob.mu_x = 0.15;
  cfg.bob.mu_y = 0.3;
  CHECK(branch_select(cfg) == ScanBranch::BobRatioSmaller);
  std::swap(cfg.alice, cfg.bob);
  CHECK(branch_select(cfg) == ScanBranch::AliceRatioSmaller);
  // Symmetric ratios resolve to the first branch.
  CHECK(branch_select(symmetric_config()) == ScanBranch::BobRatioSmaller);
}

TEST_CASE("validation") {
  ProtocolConfig cfg = symmetric_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.alice.mu_x = 0.5;  // above mu_y
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = symmetric_config();
  cfg.alice.p_z = 0.7;  // sum above 1
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = symmetric_config();
  cfg.pulse_pairs = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  // mu_x == mu_y is allowed by the source constraints themselves.
  cfg = symmetric_config();
  cfg.alice.mu_x = cfg.alice.mu_y;
  CHECK_NOTHROW(cfg.validate());
}
