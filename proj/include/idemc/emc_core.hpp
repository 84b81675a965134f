#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "idemc/membership.hpp"
#include "idemc/proposals.hpp"
#include "idemc/random.hpp"

namespace idemc {

enum class CrossoverKind { OnePoint, KPoint, Uniform };

struct MoveConfig {
  /// Probability of the mutation branch. Runs use p_m ∈ (0, 1]; 0 gives a
  /// crossover-only schedule.
  double mutation_probability = 0.9;
  /// Metropolis steps per chromosome per mutation sweep, M.
  std::size_t mutations_per_step = 10;
  CrossoverKind crossover = CrossoverKind::OnePoint;
  /// k for k-point crossover.
  std::size_t crossover_points = 2;
  /// Coordinates from most to least active; empty means natural order.
  std::vector<std::size_t> ordering;

  void validate(std::size_t dimension) const;
};

struct Chromosome {
  Eigen::VectorXd x;
  ImplausibilityVector values;
};

struct MoveTally {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  double rate() const {
    return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  }
};

struct LevelTally {
  MoveTally mutation;
  MoveTally crossover;
};

/// The chromosomes x_0..x_n with their ladder rows. Row 0 is unbounded in
/// every wave; row i (i ≥ 1) holds the cutoffs of level i.
class Population {
 public:
  Population(std::vector<Chromosome> chromosomes, std::vector<ImplausibilityVector> rows);

  /// Number of constrained levels n.
  std::size_t levels() const { return chromosomes_.size() - 1; }
  std::size_t size() const { return chromosomes_.size(); }
  std::size_t waves() const { return rows_.front().size(); }

  const Chromosome& operator[](std::size_t i) const { return chromosomes_.at(i); }
  Chromosome& chromosome(std::size_t i) { return chromosomes_.at(i); }
  const ImplausibilityVector& row(std::size_t i) const { return rows_.at(i); }
  const std::vector<ImplausibilityVector>& rows() const { return rows_; }
  const Chromosome& target() const { return chromosomes_.back(); }

  void add_level(Chromosome chromosome, ImplausibilityVector row);
  void swap_states(std::size_t i, std::size_t j) { std::swap(chromosomes_[i], chromosomes_[j]); }

  bool satisfies(std::size_t i) const;
  /// Throws InvariantViolation with a full dump if any chromosome left its level.
  void check_invariant() const;

  std::vector<LevelTally>& tallies() { return tallies_; }
  const std::vector<LevelTally>& tallies() const { return tallies_; }
  /// Entry i counts exchanges between levels i and i+1.
  std::vector<MoveTally>& exchange_tallies() { return exchange_; }
  const std::vector<MoveTally>& exchange_tallies() const { return exchange_; }
  void reset_tallies();

 private:
  std::vector<Chromosome> chromosomes_;
  std::vector<ImplausibilityVector> rows_;
  std::vector<LevelTally> tallies_;
  std::vector<MoveTally> exchange_;
};

/// p(I = i) ∝ i over {1..n}.
double first_parent_probability(std::size_t i, std::size_t levels);
/// p(J = j | I = i) ∝ (n + 1 - j) over {1..n} \ {i}.
double second_parent_probability(std::size_t j, std::size_t i, std::size_t levels);
/// q_ij = p(I=i)p(J=j|I=i) + p(I=j)p(J=i|I=j).
double pair_selection_probability(std::size_t i, std::size_t j, std::size_t levels);
/// ⌈(n+1)/2⌉
std::size_t crossover_pairs_per_iteration(std::size_t levels);

/// Per-coordinate flags: true where the children swap parent values.
std::vector<bool> crossover_mask(const MoveConfig& config, std::size_t dimension, Rng& rng);

/// Children of `a` and `b` under `mask`.
std::pair<Eigen::VectorXd, Eigen::VectorXd> cross(const Eigen::VectorXd& a,
                                                  const Eigen::VectorXd& b,
                                                  const std::vector<bool>& mask);

/// Picks the exchange pair: i uniform on {0..n}, j = i ± 1, reflecting at the ends.
std::pair<std::size_t, std::size_t> pick_exchange_pair(std::size_t levels, Rng& rng);

/// Runs the IDEMC moves on a Population. Mutation of chromosome i always
/// draws from random stream i, so results do not depend on the thread count.
class Sampler {
 public:
  using Observer = std::function<void(std::size_t iteration, const Population&)>;

  Sampler(const Membership& membership, MoveConfig config, std::uint64_t seed,
          std::size_t threads = 1);
  ~Sampler();
  Sampler(const Sampler&) = delete;
  Sampler& operator=(const Sampler&) = delete;

  const MoveConfig& config() const { return config_; }
  void set_config(MoveConfig config);
  /// kernels[i - 1] drives level i.
  void set_kernels(std::vector<ProposalKernel> kernels);
  const std::vector<ProposalKernel>& kernels() const { return kernels_; }

  void mutation_sweep(Population& population);
  void crossover_step(Population& population);
  void exchange_sweep(Population& population);
  /// One scheduled iteration; checks the master invariant afterwards.
  void iteration(Population& population);
  void advance(Population& population, std::size_t iterations, const Observer& observe = {});
  /// N·T iterations keeping the target chromosome every T-th one.
  SampleSet run(Population& population, std::size_t samples, std::size_t thinning,
                const Observer& observe = {});

  /// Applies the exchange rule to the pair (i, j); returns whether it swapped.
  bool attempt_exchange(Population& population, std::size_t i, std::size_t j);
  /// Crosses levels i and j under `mask`; returns whether both children were kept.
  bool attempt_crossover(Population& population, std::size_t i, std::size_t j,
                         const std::vector<bool>& mask);
  /// Metropolis steps for one chromosome.
  void mutate(Population& population, std::size_t level);

  const Membership& membership() const { return membership_; }

 private:
  Rng& level_rng(std::size_t level);

  const Membership& membership_;
  MoveConfig config_;
  std::uint64_t seed_;
  Rng master_;
  std::vector<std::unique_ptr<Rng>> level_rngs_;
  std::vector<ProposalKernel> kernels_;
  class WorkerPool;
  std::unique_ptr<WorkerPool> pool_;
};

}  // namespace idemc
