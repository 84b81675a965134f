#include "idemc/emc_core.hpp"

#include <algorithm>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "idemc/errors.hpp"

namespace idemc {

void MoveConfig::validate(std::size_t dimension) const {
  // p_m = 0 is allowed here as a degenerate crossover-only schedule.
  if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0)) {
    throw ContractError("mutation probability must lie in [0, 1]");
  }
  if (mutations_per_step < 1) throw ContractError("mutations per step must be >= 1");
  if (crossover == CrossoverKind::KPoint &&
      (crossover_points < 1 || crossover_points >= dimension)) {
    throw ContractError("k-point crossover needs 1 <= k < d");
  }
  if (!ordering.empty()) {
    std::vector<std::size_t> sorted = ordering;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (sorted[k] != k || sorted.size() != dimension) {
        throw ContractError("crossover ordering must be a permutation of 0..d-1");
      }
    }
  }
}

Population::Population(std::vector<Chromosome> chromosomes,
                       std::vector<ImplausibilityVector> rows)
    : chromosomes_(std::move(chromosomes)), rows_(std::move(rows)) {
  if (chromosomes_.size() < 2 || rows_.size() != chromosomes_.size()) {
    throw ContractError("population needs x_0 and at least one level, one row each");
  }
  for (double b : rows_.front()) {
    if (b != kUnbounded) throw ContractError("row 0 must be unbounded");
  }
  for (const auto& r : rows_) {
    if (r.size() != rows_.front().size()) throw ContractError("ragged ladder rows");
  }
  tallies_.resize(chromosomes_.size());
  exchange_.resize(chromosomes_.size() - 1);
}

void Population::add_level(Chromosome chromosome, ImplausibilityVector row) {
  if (row.size() != waves()) throw ContractError("row length differs from wave count");
  chromosomes_.push_back(std::move(chromosome));
  rows_.push_back(std::move(row));
  tallies_.emplace_back();
  exchange_.emplace_back();
}

bool Population::satisfies(std::size_t i) const {
  return is_member(chromosomes_.at(i).values, rows_.at(i));
}

void Population::check_invariant() const {
  for (std::size_t i = 1; i < chromosomes_.size(); ++i) {
    if (satisfies(i)) continue;
    std::ostringstream dump;
    dump.precision(17);
    dump << "chromosome " << i << " violates its level; population dump:\n";
    for (std::size_t k = 0; k < chromosomes_.size(); ++k) {
      dump << "  level " << k << " row [";
      for (double b : rows_[k]) dump << ' ' << b;
      dump << " ] x [";
      for (Eigen::Index c = 0; c < chromosomes_[k].x.size(); ++c) {
        dump << ' ' << chromosomes_[k].x(c);
      }
      dump << " ] I [";
      for (double v : chromosomes_[k].values) dump << ' ' << v;
      dump << " ]\n";
    }
    throw InvariantViolation(dump.str());
  }
}

void Population::reset_tallies() {
  std::fill(tallies_.begin(), tallies_.end(), LevelTally{});
  std::fill(exchange_.begin(), exchange_.end(), MoveTally{});
}

double first_parent_probability(std::size_t i, std::size_t levels) {
  if (i < 1 || i > levels) return 0.0;
  return static_cast<double>(i) / (0.5 * static_cast<double>(levels * (levels + 1)));
}

double second_parent_probability(std::size_t j, std::size_t i, std::size_t levels) {
  if (j < 1 || j > levels || j == i) return 0.0;
  double total = 0.0;
  for (std::size_t k = 1; k <= levels; ++k) {
    if (k != i) total += static_cast<double>(levels + 1 - k);
  }
  return static_cast<double>(levels + 1 - j) / total;
}

double pair_selection_probability(std::size_t i, std::size_t j, std::size_t levels) {
  return first_parent_probability(i, levels) * second_parent_probability(j, i, levels) +
         first_parent_probability(j, levels) * second_parent_probability(i, j, levels);
}

std::size_t crossover_pairs_per_iteration(std::size_t levels) { return (levels + 2) / 2; }

std::vector<bool> crossover_mask(const MoveConfig& config, std::size_t dimension, Rng& rng) {
  std::vector<bool> by_position(dimension, false);
  switch (config.crossover) {
    case CrossoverKind::OnePoint: {
      // Cut after position c ∈ {1..d-1}; positions ≥ c swap.
      if (dimension >= 2) {
        const std::size_t c = 1 + rng.index(dimension - 1);
        for (std::size_t t = c; t < dimension; ++t) by_position[t] = true;
      }
      break;
    }
    case CrossoverKind::KPoint: {
      std::vector<std::size_t> cuts(dimension - 1);
      std::iota(cuts.begin(), cuts.end(), 1);
      std::shuffle(cuts.begin(), cuts.end(), rng.engine());
      cuts.resize(std::min(config.crossover_points, cuts.size()));
      std::sort(cuts.begin(), cuts.end());
      bool swapping = false;
      std::size_t next = 0;
      for (std::size_t t = 0; t < dimension; ++t) {
        while (next < cuts.size() && cuts[next] == t) {
          swapping = !swapping;
          ++next;
        }
        by_position[t] = swapping;
      }
      break;
    }
    case CrossoverKind::Uniform:
      for (std::size_t t = 0; t < dimension; ++t) by_position[t] = rng.bernoulli(0.5);
      break;
  }
  if (config.ordering.empty()) return by_position;
  std::vector<bool> mask(dimension, false);
  for (std::size_t t = 0; t < dimension; ++t) mask[config.ordering[t]] = by_position[t];
  return mask;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> cross(const Eigen::VectorXd& a,
                                                  const Eigen::VectorXd& b,
                                                  const std::vector<bool>& mask) {
  Eigen::VectorXd ya = a;
  Eigen::VectorXd yb = b;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask[k]) continue;
    const auto ki = static_cast<Eigen::Index>(k);
    ya(ki) = b(ki);
    yb(ki) = a(ki);
  }
  return {std::move(ya), std::move(yb)};
}

std::pair<std::size_t, std::size_t> pick_exchange_pair(std::size_t levels, Rng& rng) {
  const std::size_t i = rng.index(levels + 1);
  if (i == 0) return {0, 1};
  if (i == levels) return {levels, levels - 1};
  return {i, rng.bernoulli(0.5) ? i + 1 : i - 1};
}

// Fixed set of threads that run index ranges on demand.
class Sampler::WorkerPool {
 public:
  explicit WorkerPool(std::size_t threads) {
    for (std::size_t t = 0; t < threads; ++t) {
      workers_.emplace_back([this] { loop(); });
    }
  }
  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& w : workers_) w.join();
  }

  void run(std::size_t count, const std::function<void(std::size_t)>& task) {
    std::unique_lock lock(mutex_);
    task_ = &task;
    count_ = count;
    next_ = 0;
    pending_ = count;
    error_ = nullptr;
    ++generation_;
    wake_.notify_all();
    done_.wait(lock, [this] { return pending_ == 0; });
    task_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void loop() {
    std::size_t seen = 0;
    std::unique_lock lock(mutex_);
    for (;;) {
      wake_.wait(lock, [&] { return stop_ || (generation_ != seen && next_ < count_); });
      if (stop_) return;
      while (next_ < count_) {
        const std::size_t index = next_++;
        const auto* task = task_;
        lock.unlock();
        try {
          (*task)(index);
        } catch (...) {
          std::lock_guard guard(error_mutex_);
          if (!error_) error_ = std::current_exception();
        }
        lock.lock();
        if (--pending_ == 0) done_.notify_all();
      }
      seen = generation_;
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::mutex error_mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::size_t count_ = 0;
  std::size_t next_ = 0;
  std::size_t pending_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

Sampler::Sampler(const Membership& membership, MoveConfig config, std::uint64_t seed,
                 std::size_t threads)
    : membership_(membership),
      config_(std::move(config)),
      seed_(seed),
      master_(derive_seed(seed, 0)) {
  config_.validate(membership_.dimension());
  if (threads > 1) pool_ = std::make_unique<WorkerPool>(threads);
}

Sampler::~Sampler() = default;

void Sampler::set_config(MoveConfig config) {
  config.validate(membership_.dimension());
  config_ = std::move(config);
}

void Sampler::set_kernels(std::vector<ProposalKernel> kernels) { kernels_ = std::move(kernels); }

Rng& Sampler::level_rng(std::size_t level) {
  while (level_rngs_.size() <= level) {
    level_rngs_.push_back(std::make_unique<Rng>(derive_seed(seed_, level_rngs_.size() + 1)));
  }
  return *level_rngs_[level];
}

void Sampler::mutate(Population& population, std::size_t level) {
  Rng& rng = level_rng(level);
  Chromosome& current = population.chromosome(level);
  MoveTally& tally = population.tallies()[level].mutation;
  const Box& box = membership_.box();

  if (level == 0) {
    // The unconstrained chromosome is drawn directly from its uniform target.
    current.x = box.uniform(rng);
    current.values = membership_.evaluate(current.x);
    ++tally.proposed;
    ++tally.accepted;
    return;
  }
  if (kernels_.size() < level) throw ContractError("no proposal kernel for this level");
  const ProposalKernel& kernel = kernels_[level - 1];
  const ImplausibilityVector& row = population.row(level);

  for (std::size_t step = 0; step < config_.mutations_per_step; ++step) {
    Eigen::VectorXd y = kernel.propose(current.x, rng);
    ++tally.proposed;
    if (!box.contains(y)) continue;
    ImplausibilityVector values = membership_.evaluate(y);
    if (!is_member(values, row)) continue;
    const double accept = kernel.mutation_accept_prob(current.x, y, true);
    if (accept >= 1.0 || rng.uniform() < accept) {
      current.x = std::move(y);
      current.values = std::move(values);
      ++tally.accepted;
    }
  }
}

void Sampler::mutation_sweep(Population& population) {
  // Grow the streams up front so workers never touch the vector.
  level_rng(population.levels());
  if (!pool_) {
    for (std::size_t i = 0; i <= population.levels(); ++i) mutate(population, i);
    return;
  }
  const std::function<void(std::size_t)> task = [&](std::size_t i) { mutate(population, i); };
  pool_->run(population.size(), task);
}

bool Sampler::attempt_crossover(Population& population, std::size_t i, std::size_t j,
                                const std::vector<bool>& mask) {
  auto [child_i, child_j] = cross(population[i].x, population[j].x, mask);
  ++population.tallies()[i].crossover.proposed;
  ++population.tallies()[j].crossover.proposed;
  ImplausibilityVector values_i = membership_.evaluate(child_i);
  ImplausibilityVector values_j = membership_.evaluate(child_j);
  if (!is_member(values_i, population.row(i)) || !is_member(values_j, population.row(j))) {
    return false;
  }
  // Pair selection does not depend on the state, so q_ij(x|y) = q_ij(y|x) and
  // the Metropolis-Hastings ratio is one whenever both children are admissible.
  population.chromosome(i) = Chromosome{std::move(child_i), std::move(values_i)};
  population.chromosome(j) = Chromosome{std::move(child_j), std::move(values_j)};
  ++population.tallies()[i].crossover.accepted;
  ++population.tallies()[j].crossover.accepted;
  return true;
}

void Sampler::crossover_step(Population& population) {
  const std::size_t n = population.levels();
  if (n < 2) return;
  auto pick = [&](auto weight) {
    double total = 0.0;
    for (std::size_t k = 1; k <= n; ++k) total += weight(k);
    double u = master_.uniform() * total;
    for (std::size_t k = 1; k <= n; ++k) {
      u -= weight(k);
      if (u < 0.0 && weight(k) > 0.0) return k;
    }
    for (std::size_t k = n; k >= 1; --k) {
      if (weight(k) > 0.0) return k;
    }
    return n;
  };
  const std::size_t i = pick([](std::size_t k) { return static_cast<double>(k); });
  const std::size_t j = pick([&](std::size_t k) {
    return k == i ? 0.0 : static_cast<double>(n + 1 - k);
  });
  const auto mask = crossover_mask(config_, membership_.dimension(), master_);
  attempt_crossover(population, i, j, mask);
}

bool Sampler::attempt_exchange(Population& population, std::size_t i, std::size_t j) {
  const std::size_t lo = std::min(i, j);
  const std::size_t hi = std::max(i, j);
  if (hi != lo + 1) throw ContractError("exchange is between adjacent levels only");
  ++population.exchange_tallies()[lo].proposed;
  // x_hi already lies in the looser level lo; only x_lo needs checking.
  if (!is_member(population[lo].values, population.row(hi))) return false;
  population.swap_states(lo, hi);
  ++population.exchange_tallies()[lo].accepted;
  return true;
}

void Sampler::exchange_sweep(Population& population) {
  for (std::size_t t = 0; t <= population.levels(); ++t) {
    const auto [i, j] = pick_exchange_pair(population.levels(), master_);
    attempt_exchange(population, i, j);
  }
}

void Sampler::iteration(Population& population) {
  if (master_.bernoulli(config_.mutation_probability)) {
    mutation_sweep(population);
  } else {
    const std::size_t pairs = crossover_pairs_per_iteration(population.levels());
    for (std::size_t k = 0; k < pairs; ++k) crossover_step(population);
  }
  exchange_sweep(population);
  population.check_invariant();
}

void Sampler::advance(Population& population, std::size_t iterations,
                      const Observer& observe) {
  for (std::size_t t = 1; t <= iterations; ++t) {
    iteration(population);
    if (observe) observe(t, population);
  }
}

SampleSet Sampler::run(Population& population, std::size_t samples, std::size_t thinning,
                       const Observer& observe) {
  if (thinning < 1) throw ContractError("thinning must be >= 1");
  SampleSet out;
  out.points.reserve(samples);
  out.values.reserve(samples);
  const std::size_t total = samples * thinning;
  for (std::size_t t = 1; t <= total; ++t) {
    iteration(population);
    if (t % thinning == 0) out.push_back(population.target().x, population.target().values);
    if (observe) observe(t, population);
  }
  return out;
}

}  // namespace idemc
