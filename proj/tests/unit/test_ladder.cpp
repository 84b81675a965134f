#include <doctest.h>

#include <cmath>
#include <numeric>

#include "idemc/builtin_problems.hpp"
#include "idemc/errors.hpp"
#include "idemc/ladder.hpp"

using namespace idemc;

namespace {

LadderConfig small_config(double p, std::size_t s, std::size_t s_n) {
  LadderConfig c;
  c.p = p;
  c.s = s;
  c.s_n = s_n;
  c.seed = 77;
  return c;
}

void check_rows(const Ladder& ladder, const std::vector<double>& target) {
  const std::size_t m = target.size();
  for (std::size_t i = 1; i < ladder.rows.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      CHECK(ladder.rows[i][j] <= ladder.rows[i - 1][j]);
      bool earlier_open = false;
      for (std::size_t k = 0; k < j; ++k) earlier_open |= ladder.rows[i][k] > target[k];
      if (earlier_open) CHECK(ladder.rows[i][j] == kUnbounded);
    }
  }
  CHECK(ladder.rows.back() == target);
}

}  // namespace

TEST_CASE("next level is the empirical quantile") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const LevelChoice c = choose_next_level(v, 0.3, 0.0);
  CHECK(c.level == 30.0);
  CHECK_FALSE(c.terminal);
  std::vector<double> w{2.1, 5.0, 7.0, 9.0};
  const LevelChoice t = choose_next_level(w, 0.25, 3.0);
  CHECK(t.level == 3.0);
  CHECK(t.terminal);
  CHECK_THROWS_AS(choose_next_level(std::vector<double>{}, 0.3, 1.0), ContractError);
  CHECK_THROWS_AS(choose_next_level(w, 1.5, 1.0), ContractError);
}

TEST_CASE("volume estimate from ratios") {
  Ladder l;
  l.p = 0.4;
  l.rows = {{kUnbounded}, {2.0}, {1.0}};
  l.realized_ratios = {0.4, 0.4};
  const VolumeEstimate v = estimate_volume(l);
  CHECK(v.realized == doctest::Approx(0.16));
  CHECK(v.nominal == doctest::Approx(0.16));
  l.realized_ratios = {0.4, 0.55};
  CHECK(estimate_volume(l).realized == doctest::Approx(0.22));
}

TEST_CASE("a target covering the box needs one constrained level") {
  const Membership m = make_builtin("ramp_1d", {.cutoffs = {1.0}});
  const BurnInResult r = build_ladder(m, small_config(0.4, 200, 50));
  CHECK(r.ladder.chromosomes() == 2);
  CHECK(r.ladder.rows[1][0] == 1.0);
  CHECK(r.ladder.realized_ratios == std::vector<double>{1.0});
}

TEST_CASE("1-d ramp ladder follows the analytic volumes") {
  // Volume of {x <= b} is b, so rungs sit near 0.4, 0.16, 0.064, then 0.05.
  const Membership m = make_builtin("ramp_1d", {.cutoffs = {0.05}});
  const BurnInResult r = build_ladder(m, small_config(0.4, 1000, 500));
  CHECK(r.ladder.chromosomes() == 5);
  const auto b = r.ladder.column(0);
  REQUIRE(b.size() == 4);
  CHECK(std::abs(b[0] - 0.4) < 0.05);
  CHECK(std::abs(b[1] - 0.16) < 0.03);
  CHECK(b[3] == 0.05);
  for (std::size_t i = 0; i + 1 < r.ladder.realized_ratios.size(); ++i) {
    const double q = r.ladder.realized_ratios[i];
    CHECK(std::abs(q - 0.4) <= 3 * std::sqrt(q * (1 - q) / 1000.0));
  }
  CHECK(std::abs(estimate_volume(r.ladder).realized - 0.05) < 0.02);
  for (std::size_t i = 1; i < r.population.size(); ++i) CHECK(r.population.satisfies(i));
  CHECK(r.models.size() == 4);
  CHECK(r.kernels.size() == 4);
  CHECK(r.stats.evaluations == m.evaluation_count());
}

TEST_CASE("2D problem ladder") {
  const Membership m = make_builtin("twin_quadratic_2d");
  LadderConfig c = small_config(0.3, 500, 500);
  const BurnInResult r = build_ladder(m, c);
  CHECK(r.ladder.chromosomes() == 4);
  check_rows(r.ladder, {3.0});
  const double v = estimate_volume(r.ladder).realized;
  CHECK(v > 0.016);
  CHECK(v < 0.064);
}

TEST_CASE("multi-wave ladder rows obey the column rules") {
  const Membership m = make_builtin("two_wave_2d");
  const BurnInResult r = build_multiwave_ladder(m, small_config(0.3, 500, 200));
  check_rows(r.ladder, {3.0, 3.0});
  CHECK(r.ladder.chromosomes() >= 3);
}

TEST_CASE("a vacuous second wave adds no rungs") {
  LadderConfig c = small_config(0.3, 500, 100);
  const Membership two = make_builtin("two_wave_2d", {.cutoffs = {3.0, 1e6}});
  const BurnInResult multi = build_multiwave_ladder(two, c);
  check_rows(multi.ladder, {3.0, 1e6});

  // Single-wave reference: the first wave alone, through an equivalent one-column problem.
  struct FirstWave final : ImplausibilityFunction {
    TwinQuadratic2d inner{true};
    std::size_t dimension() const override { return 2; }
    std::size_t waves() const override { return 1; }
    void evaluate(const Eigen::VectorXd& x, std::span<double> out) const override {
      double both[2];
      inner.evaluate(x, std::span<double>(both, 2));
      out[0] = both[0];
    }
    std::string name() const override { return "first_wave"; }
  };
  const Membership one(std::make_shared<FirstWave>(), TwinQuadratic2d::box(), {3.0});
  const BurnInResult single = build_ladder(one, c);
  CHECK(multi.ladder.chromosomes() == single.ladder.chromosomes());
  CHECK(multi.ladder.column(0) == single.ladder.column(0));
}

TEST_CASE("rung cap raises a possibly-empty-region error") {
  const Membership m = make_builtin("ramp_1d", {.cutoffs = {1e-6}});
  LadderConfig c = small_config(0.4, 200, 50);
  c.max_rungs = 3;
  try {
    build_ladder(m, c);
    FAIL("expected EmptyRegionError");
  } catch (const EmptyRegionError& e) {
    CHECK(e.rung_trajectory().size() == 3);
    CHECK(e.rung_trajectory().front() > e.rung_trajectory().back());
  }
}
