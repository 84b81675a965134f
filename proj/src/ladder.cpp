#include "idemc/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "idemc/errors.hpp"

namespace idemc {

namespace {

constexpr std::uint64_t kUniformStream = 0xB0A7;
constexpr std::uint64_t kBurnInStream = 0xB0A8;
constexpr std::uint64_t kClusterStream = 0xC105;

// Accumulated points of one level. Past 8 × cap the buffer is halved and
// the recording stride doubled, so memory stays bounded while the kept
// points remain evenly spread over the whole history.
class Pool {
 public:
  explicit Pool(std::size_t cap) : limit_(8 * cap) {}

  void add(const Eigen::VectorXd& x) {
    if (seen_++ % stride_ != 0) return;
    points_.push_back(x);
    if (points_.size() > limit_) {
      std::size_t kept = 0;
      for (std::size_t k = 0; k < points_.size(); k += 2) points_[kept++] = points_[k];
      points_.resize(kept);
      stride_ *= 2;
      seen_ = 1;
    }
  }
  const PointList& points() const { return points_; }

 private:
  std::size_t limit_;
  std::size_t stride_ = 1;
  std::size_t seen_ = 0;
  PointList points_;
};

// First wave whose cutoff in `row` is still looser than the target.
std::size_t active_column(const ImplausibilityVector& row, const std::vector<double>& target) {
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] > target[k]) return k;
  }
  return row.size();
}

struct Step {
  ImplausibilityVector row;
  double ratio = 0.0;
  bool terminal = false;
  std::size_t last_inside = 0;
};

// The rank-th smallest value, clamped up to `a`.
LevelChoice ranked_level(std::vector<double> values, std::size_t rank, double a) {
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  const double q = values[rank - 1];
  if (q <= a) return {a, true};
  return {q, false};
}

std::size_t quantile_rank(double p, std::size_t n) {
  // The small offset keeps p·n on an integer from rounding up by one ulp.
  return static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
}

// Sets the next row from samples drawn at the current one. A column that
// clamps to its target passes the same rank on to the next column, over the
// samples still inside, so a rung never ends looser than the quantile allows.
Step next_row(const ImplausibilityVector& current, const std::vector<ImplausibilityVector>& values,
              const std::vector<double>& target, double p) {
  const std::size_t rank = quantile_rank(p, values.size());
  Step step;
  step.row = current;
  std::vector<std::size_t> inside(values.size());
  for (std::size_t k = 0; k < inside.size(); ++k) inside[k] = k;

  for (std::size_t column = active_column(step.row, target); column < step.row.size(); ++column) {
    std::vector<double> active;
    active.reserve(inside.size());
    for (std::size_t k : inside) active.push_back(values[k][column]);
    const LevelChoice choice = ranked_level(std::move(active), rank, target[column]);
    step.row[column] = choice.level;
    if (!choice.terminal) break;
    std::erase_if(inside, [&](std::size_t k) { return values[k][column] > target[column]; });
    if (inside.size() < rank) break;
  }
  step.terminal = active_column(step.row, target) == step.row.size();

  std::size_t count = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (is_member(values[k], step.row)) {
      ++count;
      step.last_inside = k;
    }
  }
  step.ratio = static_cast<double>(count) / static_cast<double>(values.size());
  return step;
}

PhaseStats collect(const Population& population, std::uint64_t evaluations,
                   std::size_t iterations) {
  return PhaseStats{population.tallies(), population.exchange_tallies(), evaluations,
                    iterations};
}

}  // namespace

void LadderConfig::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw ContractError("ladder ratio p must lie in (0, 1)");
  if (s < 1) throw ContractError("s must be >= 1");
  if (max_rungs < 1) throw ContractError("max_rungs must be >= 1");
  if (cluster_cap < 2) throw ContractError("cluster cap must be >= 2");
  if (clustering.max_k < 1) throw ContractError("max_k must be >= 1");
  if (!(covariance_scale > 0.0)) throw ContractError("covariance scale must be positive");
}

std::vector<double> Ladder::column(std::size_t k) const {
  std::vector<double> out;
  for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(rows[i].at(k));
  return out;
}

LevelChoice choose_next_level(std::span<const double> implausibilities, double p, double a) {
  if (implausibilities.empty()) throw ContractError("no implausibilities to choose a level from");
  if (!(p > 0.0 && p < 1.0)) throw ContractError("p must lie in (0, 1)");
  return ranked_level(std::vector<double>(implausibilities.begin(), implausibilities.end()),
                      quantile_rank(p, implausibilities.size()), a);
}

VolumeEstimate estimate_volume(const Ladder& ladder) {
  VolumeEstimate out;
  out.realized = 1.0;
  for (double r : ladder.realized_ratios) out.realized *= r;
  out.nominal = std::pow(ladder.p, static_cast<double>(ladder.levels()));
  return out;
}

std::vector<ProposalKernel> make_kernels(
    const std::vector<std::shared_ptr<const ClusterModel>>& models, const Membership& membership,
    const LadderConfig& config) {
  std::vector<ProposalKernel> kernels;
  kernels.reserve(models.size());
  for (const auto& m : models) {
    kernels.emplace_back(m, config.kernel, membership.box(), config.covariance_scale);
  }
  return kernels;
}

BurnInResult build_multiwave_ladder(const Membership& membership, const LadderConfig& config) {
  config.validate();
  config.moves.validate(membership.dimension());
  const std::vector<double>& target = membership.cutoffs();
  const std::size_t m = membership.waves();
  const std::uint64_t start_count = membership.evaluation_count();

  Ladder ladder;
  ladder.p = config.p;
  ladder.s = config.s;
  ladder.s_n = config.s_n;
  ladder.rows.push_back(ImplausibilityVector(m, kUnbounded));

  std::vector<Pool> pools;  // pools[i-1] feeds level i
  std::vector<std::shared_ptr<const ClusterModel>> models;
  std::size_t fits = 0;

  auto refit = [&] {
    models.clear();
    for (std::size_t i = 0; i < pools.size(); ++i) {
      ClusterFitOptions options = config.clustering;
      options.seed = derive_seed(config.seed, kClusterStream + 4096 * fits + i);
      auto model = std::make_shared<ClusterModel>(
          fit_cluster_model(thin_for_clustering(pools[i].points(), config.cluster_cap), options));
      model->level = i + 1;
      models.push_back(std::move(model));
    }
    ++fits;
  };

  auto trajectory = [&] {
    std::vector<double> out;
    for (std::size_t i = 1; i < ladder.rows.size(); ++i) {
      const std::size_t k = std::min(active_column(ladder.rows[i - 1], target), m - 1);
      out.push_back(ladder.rows[i][k]);
    }
    return out;
  };
  auto check_cap = [&](bool terminal) {
    if (terminal || ladder.levels() < config.max_rungs) return;
    std::ostringstream msg;
    msg << "no point meeting the target cutoffs after " << ladder.levels()
        << " rungs; the target region may be empty";
    throw EmptyRegionError(msg.str(), trajectory());
  };

  // Stage 0: uniform draws over the box set the first rung.
  Rng uniform_rng(derive_seed(config.seed, kUniformStream));
  std::vector<Chromosome> draws;
  std::vector<ImplausibilityVector> draw_values;
  draws.reserve(config.s);
  for (std::size_t k = 0; k < config.s; ++k) {
    Eigen::VectorXd x = membership.box().uniform(uniform_rng);
    ImplausibilityVector v = membership.evaluate(x);
    draw_values.push_back(v);
    draws.push_back(Chromosome{std::move(x), std::move(v)});
  }
  Step step = next_row(ladder.rows.back(), draw_values, target, config.p);
  ladder.rows.push_back(step.row);
  ladder.realized_ratios.push_back(step.ratio);
  pools.emplace_back(config.cluster_cap);
  for (const auto& c : draws) {
    if (is_member(c.values, step.row)) pools.back().add(c.x);
  }
  Population population({draws.back(), draws[step.last_inside]},
                        {ladder.rows[0], ladder.rows[1]});
  refit();
  bool terminal = step.terminal;
  check_cap(terminal);

  MoveConfig moves = config.moves;
  Sampler sampler(membership, moves, derive_seed(config.seed, kBurnInStream), config.threads);
  std::size_t iterations = 0;

  auto record = [&](const Population& pop) {
    for (std::size_t i = 1; i <= pop.levels(); ++i) {
      pools[i - 1].add(pop[i].x);
      if (is_member(pop[i - 1].values, pop.row(i))) pools[i - 1].add(pop[i - 1].x);
    }
  };

  while (!terminal) {
    sampler.set_kernels(make_kernels(models, membership, config));
    const std::size_t top = population.levels();
    SampleSet rung;
    rung.points.reserve(config.s);
    sampler.advance(population, config.s, [&](std::size_t, const Population& pop) {
      record(pop);
      rung.push_back(pop[top].x, pop[top].values);
    });
    iterations += config.s;

    step = next_row(ladder.rows.back(), rung.values, target, config.p);
    ladder.rows.push_back(step.row);
    ladder.realized_ratios.push_back(step.ratio);
    pools.emplace_back(config.cluster_cap);
    for (std::size_t k = 0; k < rung.size(); ++k) {
      if (is_member(rung.values[k], step.row)) pools.back().add(rung.points[k]);
    }
    population.add_level(Chromosome{rung.points[step.last_inside], rung.values[step.last_inside]},
                         step.row);
    population.check_invariant();
    refit();
    terminal = step.terminal;
    check_cap(terminal);
  }

  sampler.set_kernels(make_kernels(models, membership, config));
  sampler.advance(population, config.s_n,
                  [&](std::size_t, const Population& pop) { record(pop); });
  iterations += config.s_n;
  refit();

  PhaseStats stats =
      collect(population, membership.evaluation_count() - start_count, iterations);
  std::vector<ProposalKernel> kernels = make_kernels(models, membership, config);
  return BurnInResult{std::move(ladder), std::move(population), std::move(models),
                      std::move(kernels), std::move(stats)};
}

BurnInResult build_ladder(const Membership& membership, const LadderConfig& config) {
  if (membership.waves() != 1) throw ContractError("single-wave ladder needs exactly one wave");
  return build_multiwave_ladder(membership, config);
}

}  // namespace idemc
