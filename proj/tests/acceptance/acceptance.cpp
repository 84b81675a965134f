// End-to-end checks of the sampler on the benchmark problems. Prints one
// PASS/FAIL line per criterion and exits nonzero if any fails.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "idemc/builtin_problems.hpp"
#include "idemc/commands.hpp"
#include "idemc/efficiency.hpp"
#include "idemc/errors.hpp"
#include "idemc/oracle.hpp"

using namespace idemc;
namespace fs = std::filesystem;

namespace {

constexpr double kAlpha = 0.01;
// Thinned IDEMC draws are still autocorrelated; KS thresholds use N/5.
constexpr double kEffectiveFraction = 0.2;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
  }
};

std::string num(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

bool invariant_clean = true;

int failures = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const InvariantViolation& e) {
    invariant_clean = false;
    out.require(false, std::string("invariant violated: ") + e.what());
  } catch (const std::exception& e) {
    out.require(false, std::string("error: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  std::cout << (out.pass ? "PASS " : "FAIL ") << name << " (" << num(secs, 3) << " s): "
            << out.detail.str() << std::endl;
}

RunConfig config_for(const std::string& problem, double p, std::size_t s, std::size_t s_n,
                     std::size_t M, std::size_t N, std::size_t T, std::uint64_t seed) {
  RunConfig c;
  c.problem.name = problem;
  c.ladder.p = p;
  c.ladder.s = s;
  c.ladder.s_n = s_n;
  c.ladder.moves.mutations_per_step = M;
  c.ladder.moves.mutation_probability = 0.9;
  c.pm_samp = 0.9;
  c.output.N = N;
  c.output.T = T;
  c.seed = seed;
  c.ladder.seed = seed;
  return c;
}

void ks_per_coordinate(Outcome& out, const SampleSet& idemc, const SampleSet& oracle) {
  const double eff = kEffectiveFraction * static_cast<double>(idemc.size());
  double worst = 0.0;
  bool ok = true;
  for (std::size_t k = 0; k < idemc.points.front().size(); ++k) {
    const TestReport r = ks_two_sample(idemc.coordinate(k), oracle.coordinate(k), kAlpha, eff);
    worst = std::max(worst, r.statistic / r.threshold);
    ok = ok && r.pass;
  }
  out.require(ok, "KS max D/threshold " + num(worst, 3));
}

bool all_in_target(const Membership& m, const SampleSet& s) {
  for (const auto& v : s.values) {
    if (!m.in_target(v)) return false;
  }
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  std::cout << "acceptance suite" << std::endl;

  criterion("1 two-dimensional example", [](Outcome& out) {
    const RunConfig c = config_for("twin_quadratic_2d", 0.3, 500, 500, 10, 5000, 10, 101);
    const Membership m = make_membership(c.problem);
    BurnInResult b = build_ladder(m, c.ladder);
    out.require(b.ladder.chromosomes() == 4,
                "chromosomes " + std::to_string(b.ladder.chromosomes()) + " (want 4)");
    const double v = estimate_volume(b.ladder).realized;
    out.require(v >= 0.016 && v <= 0.064, "volume " + num(v) + " in [0.016, 0.064]");
    const SamplingOutcome s = sample_phase(m, b, c);
    out.require(s.target.size() == 5000 && all_in_target(m, s.target), "5000 samples with I <= 3");
    Rng rng(202);
    const RejectionResult oracle = rejection_sample(m, 100000, rng);
    ks_per_coordinate(out, s.target, oracle.samples);
  });

  criterion("2 three-dimensional example", [](Outcome& out) {
    const RunConfig c = config_for("ring_3d", 0.4, 1000, 5000, 15, 20000, 10, 303);
    const Membership m = make_membership(c.problem);
    BurnInResult b = build_ladder(m, c.ladder);
    const std::size_t n = b.ladder.chromosomes();
    out.require(n >= 18 && n <= 22, "chromosomes " + std::to_string(n) + " (want 20 +- 2)");
    const SamplingOutcome s = sample_phase(m, b, c);
    out.require(s.target.size() == 20000 && all_in_target(m, s.target), "20000 samples with I <= 3");
    std::array<double, 4> modes{};
    double positive = 0.0;
    for (const auto& x : s.target.points) {
      modes[(x(0) > 2.0 ? 1 : 0) + (x(1) > 2.0 ? 2 : 0)] += 1.0;
      positive += x(2) > 0.0;
    }
    const double N = static_cast<double>(s.target.size());
    std::string shares;
    bool balanced = true;
    for (double k : modes) {
      balanced = balanced && std::abs(k / N - 0.25) <= 0.025;
      shares += (shares.empty() ? "" : "/") + num(k / N, 3);
    }
    out.require(balanced, "mode shares " + shares + " within 0.25 +- 0.025");
    const double z = (positive - N / 2) / (std::sqrt(N) / 2);
    out.require(std::abs(z) <= 3.0, "x3 sign balance z = " + num(z, 3));
    const double v = estimate_volume(b.ladder).realized;
    out.require(v >= 6e-9 && v <= 6e-8, "volume " + num(v) + " in [6e-9, 6e-8]");
  });

  criterion("3 ten-dimensional example", [](Outcome& out) {
    const RunConfig c = config_for("twin_ellipsoid_10d", 0.3, 2000, 5000, 10, 10000, 10, 404);
    const Membership m = make_membership(c.problem);
    BurnInResult b = build_ladder(m, c.ladder);
    const std::size_t n = b.ladder.chromosomes();
    out.require(n >= 32 && n <= 40, "chromosomes " + std::to_string(n) + " (want 36 +- 4)");
    const auto second = b.ladder.column(0);
    if (second.size() > 1) out.detail << "; second rung " << num(second[1]);
    const SamplingOutcome s = sample_phase(m, b, c);
    out.require(s.target.size() == 10000 && all_in_target(m, s.target), "10000 samples with I <= 3");

    const auto ellipsoids = target_ellipsoids(m);
    const TwinEllipsoid10d& f = dynamic_cast<const TwinEllipsoid10d&>(m.function());
    double first = 0.0;
    for (const auto& x : s.target.points) first += f.form(0)(x) <= f.form(1)(x);
    const double N = static_cast<double>(s.target.size());
    const double v1 = ellipsoid_volume(ellipsoids[0].covariance, 3.0);
    const double v2 = ellipsoid_volume(ellipsoids[1].covariance, 3.0);
    const double share = v1 / (v1 + v2);
    const double sd = std::sqrt(share * (1 - share) / (kEffectiveFraction * N));
    out.require(std::abs(first / N - share) <= 3 * sd,
                "first-ellipsoid share " + num(first / N, 3) + " vs " + num(share, 3) +
                    " +- " + num(3 * sd, 2));
    Rng rng(505);
    const SampleSet oracle = union_ellipsoid_sample(ellipsoids, 3.0, m.box(), 100000, rng);
    ks_per_coordinate(out, s.target, oracle);
    const double v = estimate_volume(b.ladder).realized;
    out.require(v >= 1e-19 && v <= 1e-17, "volume " + num(v) + " within 10x of 1e-18");
  });

  criterion("4 efficiency calculator", [](Outcome& out) {
    CostParams p;
    p.chromosomes = 14;
    p.s = 2000;
    p.s_n = 5000;
    p.M = 10;
    p.pm_burn = 0.85;
    p.pm_samp = 0.97;
    p.N = 150000;
    p.T = 1;
    const double anchor = expected_evals_idemc(p);
    out.require(anchor == 21'075'000.0, "E[N_A] " + num(anchor, 10));
    // 1e-6 and 1e-18 are not exact in binary; compare to rounding.
    auto close = [](double a, double b) { return std::abs(a / b - 1.0) <= 1e-12; };
    out.require(close(expected_evals_rejection(1e4, 1e-6), 1e10) &&
                    close(expected_evals_rejection(1, 1e-18), 1e18) &&
                    expected_evals_rejection(10, 1) == 10,
                "N/V_T table");
    out.require(expected_chromosomes(0.4, 0.4) == 2 && expected_chromosomes(1e-6, 0.4) == 17 &&
                    expected_chromosomes(1.0, 0.4) == 1,
                "n-hat table");
    CostParams curve;
    curve.N = 1e4;
    curve.T = 10;
    curve.p = 0.4;
    curve.s = 2000;
    curve.s_n = 5000;
    curve.M = 10;
    const double v = cost_crossover(curve);
    out.require(v >= 5e-4 && v <= 5e-3, "crossover V_T " + num(v) + " in [5e-4, 5e-3]");
  });

  criterion("5 evaluation count versus the cost model", [](Outcome& out) {
    const RunConfig c = config_for("twin_quadratic_2d", 0.3, 500, 500, 10, 1000, 10, 606);
    const Membership m = make_membership(c.problem);
    m.reset_evaluation_count();
    BurnInResult b = build_ladder(m, c.ladder);
    const SamplingOutcome s = sample_phase(m, b, c);
    CostParams p;
    p.chromosomes = b.ladder.chromosomes();
    p.s = static_cast<double>(c.ladder.s);
    p.s_n = static_cast<double>(c.ladder.s_n);
    p.M = static_cast<double>(c.ladder.moves.mutations_per_step);
    p.pm_burn = c.ladder.moves.mutation_probability;
    p.pm_samp = c.pm_samp;
    p.N = static_cast<double>(c.output.N);
    p.T = static_cast<double>(c.output.T);
    const double predicted = expected_evals_idemc(p);
    const double measured = static_cast<double>(m.evaluation_count());
    const double rel = measured / predicted - 1.0;
    out.require(std::abs(rel) <= 0.05, "total " + num(measured, 9) + " vs " + num(predicted, 9) +
                                           " (" + num(100 * rel, 3) + "%)");
    const double sampled = expected_sampling_evals(p.N * p.T, p.M, p.pm_samp, *p.chromosomes);
    const double rel_s = static_cast<double>(s.stats.evaluations) / sampled - 1.0;
    out.require(std::abs(rel_s) <= 0.05, "sampling phase " + num(100 * rel_s, 3) + "% over " +
                                             std::to_string(s.stats.iterations) + " iterations");
  });

  criterion("6 correctness properties", [](Outcome& out) {
    // Hand-built states on the 1-d ramp, levels b = (0.5, 0.25).
    const Membership m = make_builtin("ramp_1d", {.cutoffs = {0.25}});
    auto at = [&](double x) {
      Eigen::VectorXd v = Eigen::VectorXd::Constant(1, x);
      return Chromosome{v, m.evaluate_uncounted(v)};
    };
    const std::vector<ImplausibilityVector> rows{{kUnbounded}, {0.5}, {0.25}};
    Sampler hand(m, MoveConfig{}, 1);
    Population pop({at(0.9), at(0.4), at(0.1)}, rows);
    bool rules = !hand.attempt_exchange(pop, 1, 2) && !hand.attempt_exchange(pop, 0, 1);
    pop.chromosome(1) = at(0.2);
    rules = rules && hand.attempt_exchange(pop, 1, 2) && pop[2].x(0) == 0.2;
    Population cross_pop({at(0.9), at(0.4), at(0.1)}, rows);
    rules = rules && !hand.attempt_crossover(cross_pop, 1, 2, {true});  // 0.4 cannot enter level 2
    rules = rules && hand.attempt_crossover(cross_pop, 1, 2, {false});  // identity children
    const CovarianceFactor f(Eigen::MatrixXd::Constant(1, 1, 0.01));
    const ProposalKernel sym(std::make_shared<ClusterModel>(ClusterModel{
                                 1, {Eigen::VectorXd::Zero(1)}, {f}, f, 0.9, {}}),
                             KernelKind::Normal, m.box());
    rules = rules && sym.mutation_accept_prob(at(0.1).x, at(0.12).x, true) == 1.0 &&
            sym.mutation_accept_prob(at(0.1).x, at(0.3).x, false) == 0.0;
    out.require(rules, "exchange/crossover/mutation rules on hand-built states");

    // Two-level toy: kernels from uniform draws in each level.
    std::vector<std::shared_ptr<const ClusterModel>> models;
    Rng draws(77);
    for (double b : {0.5, 0.25}) {
      PointList pts;
      for (int k = 0; k < 500; ++k) pts.push_back(Eigen::VectorXd::Constant(1, draws.uniform(0, b)));
      models.push_back(std::make_shared<ClusterModel>(fit_cluster_model(pts, ClusterFitOptions{})));
    }
    LadderConfig lc;
    Sampler toy(m, MoveConfig{}, 88);
    toy.set_kernels(make_kernels(models, m, lc));
    Population toy_pop({at(0.9), at(0.4), at(0.1)}, rows);
    const SampleSet chain = toy.run(toy_pop, 100000, 10);
    const TestReport chi = chi_square_uniformity(chain.coordinate(0), 0.0, 0.25, 20, kAlpha);
    out.require(chi.pass, "toy chi-square " + num(chi.statistic) + " < " + num(chi.threshold));

    // Determinism of the written CSVs.
    const fs::path dir = fs::temp_directory_path() / "idemc_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "problem.name = twin_quadratic_2d\nladder.p = 0.3\n"
                                      "ladder.s = 500\nladder.s_n = 500\noutput.N = 1000\n"
                                      "output.T = 5\nrun.seed = 9\n";
    std::ostringstream log, err;
    const int a = cmd_run({(dir / "run.cfg").string(), std::nullopt, (dir / "a").string(), ""},
                          log, err);
    const int b = cmd_run({(dir / "run.cfg").string(), std::nullopt, (dir / "b").string(), ""},
                          log, err);
    bool same = a == 0 && b == 0;
    for (const char* file : {"samples.csv", "level_0.csv", "level_1.csv", "trace.csv"}) {
      same = same && slurp(dir / "a" / file) == slurp(dir / "b" / file);
    }
    out.require(same, "bit-identical CSVs for equal seeds");
    out.require(invariant_clean, "level invariant held in every run so far");
  });

  criterion("7 external evaluator miniature run", [](Outcome& out) {
    const fs::path dir = fs::temp_directory_path() / "idemc_acceptance_external";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "ext.cfg") << "problem.name = external\nproblem.command = "
                                   << ECHO_EVALUATOR << " twin2d\n"
                                   << "problem.lower = -3\nproblem.upper = 7\nproblem.cutoffs = 3\n"
                                      "ladder.p = 0.3\nladder.s = 300\nladder.s_n = 300\n"
                                      "output.N = 300\noutput.T = 2\n";
    std::ostringstream log, err;
    const int code =
        cmd_run({(dir / "ext.cfg").string(), std::nullopt, (dir / "out").string(), ""}, log, err);
    out.require(code == 0, "exit code " + std::to_string(code) + (err.str().empty() ? "" : " " + err.str()));
    std::ifstream in(dir / "out" / "samples.csv");
    std::string line;
    std::getline(in, line);
    std::size_t rows = 0;
    bool inside = true;
    while (std::getline(in, line)) {
      ++rows;
      inside = inside && std::stod(line.substr(line.rfind(',') + 1)) <= 3.0;
    }
    out.require(rows == 300 && inside, std::to_string(rows) + " samples with I <= 3");
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
