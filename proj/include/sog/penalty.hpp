#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sog/groups.hpp"

namespace sog {

/// Weights of the combined penalty sum_G alpha_G*||w_G||_2 +
/// beta_G*||w_G||_1 over a decomposition of x into per-group parts.
/// The uniform form uses alpha = 1 and beta = mu = lambda1/sqrt(l_target)
/// for every group.
struct PenaltyParams {
  double lambda1 = 0.0;
  int l_target = 1;
  // when set, overrides the uniform weights; one (alpha, beta) per group
  std::optional<std::vector<std::pair<double, double>>> per_group;

  double mu() const { return lambda1 / std::sqrt(double(l_target)); }
  double alpha(int g) const { return per_group ? (*per_group)[g].first : 1.0; }
  double beta(int g) const { return per_group ? (*per_group)[g].second : mu(); }

  static PenaltyParams uniform(double lambda1, int l_target);
  static PenaltyParams weighted(std::vector<std::pair<double, double>> ab);

  /// Checks the weight table (if any) matches the layout and all weights
  /// are admissible.  Throws std::invalid_argument.
  void validate(const GroupLayout& layout) const;
};

/// An (approximate) optimal decomposition of x over the expanded space:
/// w lives on the duplicated coordinates, collapse(w) ~= x.
struct Decomposition {
  Eigen::VectorXd w;
  double objective = 0.0;  // penalty value at w
  double residual = 0.0;   // ||collapse(w) - x||_2
  int iterations = 0;
};

/// Thrown when the splitting iteration fails to reach the requested
/// tolerance; carries the best iterate found.
struct PenaltyNonConvergence : std::runtime_error {
  Decomposition best;
  PenaltyNonConvergence(const std::string& msg, Decomposition d)
      : std::runtime_error(msg), best(std::move(d)) {}
};

/// Penalty value for disjoint layouts, where the decomposition is forced
/// and the value is a closed form: sum_G alpha_G*||x_G|| + beta_G*||x_G||_1.
double sgl_penalty_disjoint(const Eigen::VectorXd& x, const GroupLayout& layout,
                            const PenaltyParams& params);

/// Penalty value for arbitrary layouts: the infimum over decompositions
/// x = sum_G w_G of the combined weighted norms, solved by an
/// operator-splitting (consensus) iteration on the duplicated space.
/// Stops when the collapse residual is at most tol * max(1, ||x||) and the
/// objective has stalled to the same relative tolerance.  The returned w
/// is the prox-side iterate, so its per-group sparsity is exact.  Throws
/// PenaltyNonConvergence after max_iters.
Decomposition eval_penalty(const Eigen::VectorXd& x, const GroupLayout& layout,
                           const PenaltyParams& params, double tol = 1e-7,
                           int max_iters = 20000);

/// Upper bound sqrt(k)*(1 + lambda1)*||x||_2, valid whenever x is
/// supported on k groups with at most l_target nonzeros in each.
double penalty_upper_bound(const Eigen::VectorXd& x,
                           const PenaltyParams& params, int k);

/// Number of groups carrying any weight in a decomposition, with entries
/// below 1e-8 * max(1, ||x||) treated as zero.
int group_l0(const Eigen::VectorXd& x, const GroupLayout& layout,
             const Decomposition& d);

}  // namespace sog
