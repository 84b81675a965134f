#include <doctest.h>

#include <cmath>
#include <map>

#include "idemc/builtin_problems.hpp"
#include "idemc/emc_core.hpp"
#include "idemc/errors.hpp"
#include "idemc/oracle.hpp"

using namespace idemc;

namespace {

ProposalKernel single_kernel(const Box& box, double variance, double omega = 0.9) {
  const auto d = static_cast<Eigen::Index>(box.dimension());
  const CovarianceFactor f(variance * Eigen::MatrixXd::Identity(d, d));
  return ProposalKernel(
      std::make_shared<ClusterModel>(ClusterModel{1, {Eigen::VectorXd::Zero(d)}, {f}, f, omega, {}}),
      KernelKind::Normal, box);
}

Chromosome at(const Membership& m, Eigen::VectorXd x) {
  ImplausibilityVector v = m.evaluate_uncounted(x);
  return {std::move(x), std::move(v)};
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

// The 1-d ramp I(x) = x with levels b = (0.5, 0.25).
struct Toy {
  Membership m = make_builtin("ramp_1d", {.cutoffs = {0.25}});
  Population pop{{at(m, scalar(0.9)), at(m, scalar(0.4)), at(m, scalar(0.1))},
                 {{kUnbounded}, {0.5}, {0.25}}};
  std::vector<ProposalKernel> kernels{single_kernel(m.box(), 0.02), single_kernel(m.box(), 0.005)};
};

}  // namespace

TEST_CASE("move config validation") {
  MoveConfig c;
  CHECK_NOTHROW(c.validate(3));
  c.mutation_probability = 1.5;
  CHECK_THROWS_AS(c.validate(3), ContractError);
  c = MoveConfig{};
  c.mutations_per_step = 0;
  CHECK_THROWS_AS(c.validate(3), ContractError);
  c = MoveConfig{};
  c.crossover = CrossoverKind::KPoint;
  c.crossover_points = 3;
  CHECK_THROWS_AS(c.validate(3), ContractError);
  c.crossover_points = 2;
  CHECK_NOTHROW(c.validate(3));
  c = MoveConfig{};
  c.ordering = {0, 2, 2};
  CHECK_THROWS_AS(c.validate(3), ContractError);
  c.ordering = {2, 0, 1};
  CHECK_NOTHROW(c.validate(3));
}

TEST_CASE("parent selection probabilities") {
  CHECK(first_parent_probability(3, 4) == doctest::Approx(0.3));
  for (std::size_t n : {2u, 4u, 13u}) {
    double total = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      total += first_parent_probability(i, n);
      double second = 0.0;
      for (std::size_t j = 1; j <= n; ++j) second += second_parent_probability(j, i, n);
      CHECK(second == doctest::Approx(1.0));
      CHECK(second_parent_probability(i, i, n) == 0.0);
    }
    CHECK(total == doctest::Approx(1.0));
    double pairs = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = i + 1; j <= n; ++j) {
        CHECK(pair_selection_probability(i, j, n) == pair_selection_probability(j, i, n));
        pairs += pair_selection_probability(i, j, n);
      }
    }
    CHECK(pairs == doctest::Approx(1.0));
  }
  // n = 3, i = 1: weights (n+1-j) over j in {2,3} are 2 and 1.
  CHECK(second_parent_probability(2, 1, 3) == doctest::Approx(2.0 / 3.0));
  CHECK(crossover_pairs_per_iteration(13) == 7);
  CHECK(crossover_pairs_per_iteration(12) == 7);
  CHECK(crossover_pairs_per_iteration(3) == 2);
}

TEST_CASE("crossover masks") {
  Rng rng(10);
  MoveConfig c;
  std::map<std::size_t, int> cuts;
  for (int t = 0; t < 4000; ++t) {
    const auto mask = crossover_mask(c, 5, rng);
    std::size_t first = 5;
    for (std::size_t k = 0; k < 5; ++k) {
      if (mask[k]) {
        first = std::min(first, k);
      } else {
        CHECK(first == 5);  // swapped positions form a tail
      }
    }
    CHECK(first >= 1);
    CHECK(first <= 4);
    ++cuts[first];
  }
  CHECK(cuts.size() == 4);
  for (const auto& [cut, count] : cuts) CHECK(std::abs(count - 1000) < 4 * std::sqrt(750.0));

  c.crossover = CrossoverKind::KPoint;
  c.crossover_points = 3;
  for (int t = 0; t < 200; ++t) {
    const auto mask = crossover_mask(c, 8, rng);
    int switches = mask[0] ? 1 : 0;
    for (std::size_t k = 1; k < 8; ++k) switches += mask[k] != mask[k - 1];
    CHECK(switches == 3);
  }

  c = MoveConfig{};
  c.ordering = {2, 1, 0};
  for (int t = 0; t < 100; ++t) {
    const auto mask = crossover_mask(c, 3, rng);
    // Tail in the given order means the head of the natural order swaps.
    CHECK(mask[0]);
    CHECK_FALSE(mask[2]);
  }

  c = MoveConfig{};
  c.crossover = CrossoverKind::Uniform;
  int swapped = 0;
  for (int t = 0; t < 1000; ++t) {
    for (bool b : crossover_mask(c, 4, rng)) swapped += b;
  }
  CHECK(std::abs(swapped - 2000) < 4 * std::sqrt(1000.0));
}

TEST_CASE("crossing identical parents returns the parents") {
  const Eigen::Vector3d a(1, 2, 3);
  const auto [y1, y2] = cross(a, a, {false, true, true});
  CHECK(y1 == a);
  CHECK(y2 == a);
  const Eigen::Vector3d b(4, 5, 6);
  const auto [z1, z2] = cross(a, b, {false, true, true});
  CHECK(z1 == Eigen::Vector3d(1, 5, 6));
  CHECK(z2 == Eigen::Vector3d(4, 2, 3));
}

TEST_CASE("exchange pair selection reflects at the ends") {
  Rng rng(12);
  std::map<std::pair<std::size_t, std::size_t>, int> seen;
  for (int t = 0; t < 8000; ++t) ++seen[pick_exchange_pair(3, rng)];
  CHECK(seen.count({0, 1}) == 1);
  CHECK(seen.count({3, 2}) == 1);
  for (const auto& [pair, count] : seen) {
    CHECK(pair.first <= 3);
    CHECK((pair.second + 1 == pair.first || pair.first + 1 == pair.second));
  }
  // i uniform on {0..3}: ends get 1/4 each, interior pairs 1/8 each.
  CHECK(std::abs(seen[{0, 1}] - 2000) < 200);
  CHECK(std::abs(seen[{1, 2}] - 1000) < 150);
}

TEST_CASE("exchange acceptance is the indicator rule") {
  Toy toy;
  Sampler s(toy.m, MoveConfig{}, 1);
  // x_1 = 0.4 is not inside level 2 (<= 0.25): rejected.
  CHECK_FALSE(s.attempt_exchange(toy.pop, 1, 2));
  CHECK(toy.pop[1].x(0) == 0.4);
  // x_0 = 0.9 is not inside level 1: rejected.
  CHECK_FALSE(s.attempt_exchange(toy.pop, 1, 0));
  toy.pop.chromosome(1) = at(toy.m, scalar(0.2));
  CHECK(s.attempt_exchange(toy.pop, 2, 1));
  CHECK(toy.pop[1].x(0) == 0.1);
  CHECK(toy.pop[2].x(0) == 0.2);
  CHECK(toy.pop.exchange_tallies()[1].proposed == 2);
  CHECK(toy.pop.exchange_tallies()[1].accepted == 1);
  CHECK_THROWS_AS(s.attempt_exchange(toy.pop, 0, 2), ContractError);
  CHECK(toy.m.evaluation_count() == 0);
}

TEST_CASE("identical levels accept every exchange") {
  const Membership m = make_builtin("ramp_1d", {.cutoffs = {0.5}});
  Population pop({at(m, scalar(0.7)), at(m, scalar(0.3)), at(m, scalar(0.1))},
                 {{kUnbounded}, {0.5}, {0.5}});
  Sampler s(m, MoveConfig{}, 3);
  for (int t = 0; t < 50; ++t) s.exchange_sweep(pop);
  CHECK(pop.exchange_tallies()[1].proposed > 0);
  CHECK(pop.exchange_tallies()[1].accepted == pop.exchange_tallies()[1].proposed);
}

TEST_CASE("crossover keeps or rejects both children") {
  const Membership m = make_builtin("twin_quadratic_2d");
  auto make_pop = [&] {
    return Population({at(m, Eigen::Vector2d(5, 5)), at(m, Eigen::Vector2d(1.6, 1.75)),
                       at(m, Eigen::Vector2d(1.6, 1.7))},
                      {{kUnbounded}, {4.0}, {3.0}});
  };
  Sampler s(m, MoveConfig{}, 4);
  Population pop = make_pop();
  // Swapping x2 gives (1.6,1.7) at level 1 and (1.6,1.75) at level 2 (I = 0.56): both fine.
  CHECK(s.attempt_crossover(pop, 1, 2, {false, true}));
  CHECK(pop[1].x == Eigen::Vector2d(1.6, 1.7));
  CHECK(pop[2].x == Eigen::Vector2d(1.6, 1.75));
  CHECK(m.evaluation_count() == 2);

  Population bad({at(m, Eigen::Vector2d(5, 5)), at(m, Eigen::Vector2d(1.6, 2.0)),
                  at(m, Eigen::Vector2d(1.6, 1.7))},
                 {{kUnbounded}, {4.0}, {3.0}});
  // Child for level 2 would be (1.6, 2.0) with I ≈ 3.35 > 3: whole move rejected.
  CHECK_FALSE(s.attempt_crossover(bad, 1, 2, {false, true}));
  CHECK(bad[1].x == Eigen::Vector2d(1.6, 2.0));
  CHECK(bad[2].x == Eigen::Vector2d(1.6, 1.7));
  CHECK(bad.tallies()[1].crossover.accepted == 0);
}

TEST_CASE("mutation rules") {
  SUBCASE("degenerate kernel proposes the current point and accepts it") {
    Toy toy;
    Sampler s(toy.m, MoveConfig{}, 5);
    s.set_kernels({single_kernel(toy.m.box(), 1e-300), single_kernel(toy.m.box(), 1e-300)});
    const Eigen::VectorXd before = toy.pop[2].x;
    s.mutate(toy.pop, 2);
    CHECK(toy.pop[2].x(0) == doctest::Approx(before(0)).epsilon(1e-12));
    CHECK(toy.pop.tallies()[2].mutation.accepted == 10);
  }
  SUBCASE("out-of-box proposals cost no evaluation") {
    Toy toy;
    MoveConfig c;
    c.mutations_per_step = 2000;
    Sampler s(toy.m, c, 6);
    s.set_kernels({single_kernel(toy.m.box(), 4.0), single_kernel(toy.m.box(), 4.0)});
    toy.m.reset_evaluation_count();
    s.mutate(toy.pop, 2);
    const auto& t = toy.pop.tallies()[2].mutation;
    CHECK(t.proposed == 2000);
    // With sd 2 around a point in [0,0.25], roughly 80% of proposals leave [0,1].
    CHECK(toy.m.evaluation_count() < 600);
    CHECK(toy.m.evaluation_count() > 200);
    CHECK(toy.pop.satisfies(2));
  }
  SUBCASE("symmetric kernel inside the level always accepts") {
    const Membership m = make_builtin("ramp_1d", {.cutoffs = {1.0}});
    Population pop({at(m, scalar(0.5)), at(m, scalar(0.5))}, {{kUnbounded}, {1.0}});
    MoveConfig c;
    c.mutations_per_step = 500;
    Sampler s(m, c, 7);
    s.set_kernels({single_kernel(m.box(), 1e-6)});
    s.mutate(pop, 1);
    CHECK(pop.tallies()[1].mutation.accepted == pop.tallies()[1].mutation.proposed);
  }
  SUBCASE("chromosome 0 is one uniform draw per sweep") {
    Toy toy;
    Sampler s(toy.m, MoveConfig{}, 8);
    toy.m.reset_evaluation_count();
    s.mutate(toy.pop, 0);
    CHECK(toy.m.evaluation_count() == 1);
  }
}

TEST_CASE("iteration schedule") {
  SUBCASE("p_m = 1 mutates and exchanges only") {
    Toy toy;
    MoveConfig c;
    c.mutation_probability = 1.0;
    Sampler s(toy.m, c, 9);
    s.set_kernels(toy.kernels);
    s.advance(toy.pop, 50);
    for (const auto& t : toy.pop.tallies()) CHECK(t.crossover.proposed == 0);
    CHECK(toy.pop.tallies()[1].mutation.proposed == 500);
    std::uint64_t exchanges = 0;
    for (const auto& e : toy.pop.exchange_tallies()) exchanges += e.proposed;
    CHECK(exchanges == 150);
  }
  SUBCASE("p_m = 0 crosses and exchanges only") {
    Toy toy;
    MoveConfig c;
    c.mutation_probability = 0.0;
    Sampler s(toy.m, c, 10);
    s.set_kernels(toy.kernels);
    s.advance(toy.pop, 20);
    for (const auto& t : toy.pop.tallies()) CHECK(t.mutation.proposed == 0);
    CHECK(toy.pop.tallies()[1].crossover.proposed == 40);  // 2 pairs, both levels always picked
  }
  SUBCASE("n = 13 crossover branch selects 7 pairs") {
    const Membership m = make_builtin("ramp_1d", {.cutoffs = {0.01}});
    std::vector<Chromosome> cs{at(m, scalar(0.5))};
    std::vector<ImplausibilityVector> rows{{kUnbounded}};
    for (int i = 1; i <= 13; ++i) {
      const double b = std::pow(0.7, i - 1) * 0.9 + (i == 13 ? 0.0 : 0.0);
      rows.push_back({i == 13 ? 0.01 : std::max(b, 0.01)});
      cs.push_back(at(m, scalar(0.005)));
    }
    Population pop(cs, rows);
    MoveConfig c;
    c.mutation_probability = 0.0;
    Sampler s(m, c, 11);
    s.iteration(pop);
    std::uint64_t picks = 0;
    for (const auto& t : pop.tallies()) picks += t.crossover.proposed;
    CHECK(picks == 14);
  }
}

TEST_CASE("invariant violation is reported with a dump") {
  Toy toy;
  toy.pop.chromosome(2) = at(toy.m, scalar(0.3));
  CHECK_THROWS_AS(toy.pop.check_invariant(), InvariantViolation);
  try {
    toy.pop.check_invariant();
  } catch (const InvariantViolation& e) {
    CHECK(std::string(e.what()).find("level 2") != std::string::npos);
  }
}

TEST_CASE("sampler runs are deterministic and independent of thread count") {
  auto run = [](std::size_t threads) {
    Toy toy;
    Sampler s(toy.m, MoveConfig{}, 42, threads);
    s.set_kernels(toy.kernels);
    return s.run(toy.pop, 200, 3);
  };
  const SampleSet a = run(1);
  const SampleSet b = run(1);
  const SampleSet c = run(3);
  REQUIRE(a.size() == 200);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.points[k] == b.points[k]);
    CHECK(a.points[k] == c.points[k]);
    CHECK(a.values[k][0] <= 0.25);
  }
}

TEST_CASE("two-level toy target chain is uniform") {
  Toy toy;
  MoveConfig c;
  Sampler s(toy.m, c, 2024);
  s.set_kernels(toy.kernels);
  const SampleSet out = s.run(toy.pop, 20000, 5);
  const auto report = chi_square_uniformity(out.coordinate(0), 0.0, 0.25, 20, 0.01);
  CHECK(report.pass);
}
