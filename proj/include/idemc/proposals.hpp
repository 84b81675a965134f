#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "idemc/clustering.hpp"
#include "idemc/membership.hpp"

namespace idemc {

enum class KernelKind { Normal, TruncatedNormal };

/// Clustered random-walk mixture for one ladder level:
///   y | x ~ ω N(x, s·V_j(x)) + (1-ω) N(x, s·V_whole)
/// where j(x) is x's partition cell and s the covariance scale. The
/// truncated kind restricts each component to the box and renormalizes it.
class ProposalKernel {
 public:
  ProposalKernel(std::shared_ptr<const ClusterModel> model, KernelKind kind, Box box,
                 double scale = 1.0);

  KernelKind kind() const { return kind_; }
  const ClusterModel& model() const { return *model_; }
  std::shared_ptr<const ClusterModel> shared_model() const { return model_; }
  double scale() const { return scale_; }

  Eigen::VectorXd propose(const Eigen::VectorXd& x, Rng& rng) const;
  /// log q(to | from)
  double log_density(const Eigen::VectorXd& from, const Eigen::VectorXd& to) const;
  double density(const Eigen::VectorXd& from, const Eigen::VectorXd& to) const;

  /// Metropolis-Hastings acceptance for a uniform target: 0 when y is outside
  /// the level, else min(q(x|y)/q(y|x), 1).
  double mutation_accept_prob(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              bool y_in_subspace) const;

  /// log P(N(center, component) ∈ box); component == clusters() is the whole-level one.
  double log_box_mass(std::size_t component, const Eigen::VectorXd& center) const;

 private:
  const CovarianceFactor& component(std::size_t index) const;
  Eigen::VectorXd draw_truncated(std::size_t component, const Eigen::VectorXd& center,
                                 Rng& rng) const;
  double component_log_density(std::size_t component, const Eigen::VectorXd& from,
                               const Eigen::VectorXd& to) const;

  std::shared_ptr<const ClusterModel> model_;
  KernelKind kind_;
  Box box_;
  double scale_;
  std::vector<CovarianceFactor> scaled_;  // clusters..., whole

  struct MassCache {
    std::mutex mutex;
    std::map<std::pair<std::size_t, std::vector<long long>>, double> values;
    std::vector<Eigen::MatrixXd> standard_draws;  // per component, lazily filled
  };
  std::shared_ptr<MassCache> cache_;
};

/// Draws used to estimate a correlated truncation constant.
inline constexpr std::size_t kTruncationDraws = 20000;
/// Cells per box edge for caching truncation constants.
inline constexpr double kTruncationCellsPerEdge = 4096.0;
/// Rejection attempts before falling back to Gibbs-style truncation.
inline constexpr std::size_t kTruncationRetries = 1000;

}  // namespace idemc
