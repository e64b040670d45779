#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sog/groups.hpp"
#include "sog/penalty.hpp"

namespace sog {

/// Smooth data-fit term.  linear-classification is sum_i -y_i <phi_i, x>
/// with labels in {-1,+1}; squared is 0.5*||y - Phi x||^2.
struct Loss {
  enum class Kind { LinearClassification, Squared };
  Kind kind = Kind::Squared;
  static Loss classification() { return {Kind::LinearClassification}; }
  static Loss squared() { return {Kind::Squared}; }
};

struct StepRule {
  enum class Kind { Fixed, Backtracking };
  Kind kind = Kind::Backtracking;
  double gamma = 0.0;    // fixed step
  double factor = 0.5;   // backtracking shrink factor
  double initial = 0.0;  // <= 0 means: estimate from the design operator norm

  static StepRule fixed(double gamma);
  static StepRule backtracking(double factor = 0.5, double initial = 0.0);
};

struct SolverConfig {
  double eta1 = 1.0;  // penalty weight, > 0
  double eta2 = 0.0;  // ridge weight, >= 0
  PenaltyParams params;
  int max_iters = 5000;
  double rel_tol = 1e-9;
  StepRule step_rule;
  bool acceleration = true;
  bool debias = false;
  uint64_t seed = 0;  // seeds the operator-norm power iteration

  void validate() const;
};

struct FitResult {
  Eigen::VectorXd x_hat;  // collapsed, debiased when requested
  Eigen::VectorXd x_raw;  // collapsed, pre-debias
  Eigen::VectorXd w_hat;  // expanded-space solution
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  std::vector<int> support;        // sorted nonzero coordinates of x_raw
  std::vector<int> active_groups;  // groups with nonzero expanded block
  bool debias_rank_deficient = false;
};

/// Thrown when the objective turns non-finite; carries the last iterate.
struct SolverNumericalError : std::runtime_error {
  Eigen::VectorXd w_snapshot;
  int iteration;
  SolverNumericalError(const std::string& msg, Eigen::VectorXd w, int iter)
      : std::runtime_error(msg), w_snapshot(std::move(w)), iteration(iter) {}
};

/// Minimizes loss(Phi x) + eta1*h(x) + eta2*||x||^2 by proximal gradient
/// on the duplicated coordinates, where the penalty is separable and its
/// prox is the composed shrinkage.  Monotone accelerated variant: an
/// extrapolated step that would raise the objective falls back to a plain
/// proximal step from the current iterate.
FitResult fit(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y,
              const GroupLayout& layout, const Loss& loss,
              const SolverConfig& config);

struct DebiasResult {
  Eigen::VectorXd x;
  bool rank_deficient = false;
};

/// Unpenalized least-squares refit restricted to the fitted support
/// (minimum-norm when the restricted design is rank deficient, flagged).
/// For classification the refit direction is normalized to unit length.
DebiasResult debias(const FitResult& fit, const Eigen::MatrixXd& Phi,
                    const Eigen::VectorXd& y, const Loss& loss);

struct CvResult {
  SolverConfig best;
  int best_index = 0;
  std::vector<double> mean_errors;  // one per grid entry
  bool any_fold_skipped = false;    // single-class classification fold
};

/// K-fold selection over a config grid: deterministic fold assignment
/// from the seed, misclassification rate for classification and mean
/// squared error for regression, ties broken toward larger eta1.
CvResult cross_validate(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y,
                        const GroupLayout& layout, const Loss& loss,
                        const std::vector<SolverConfig>& grid, int folds,
                        uint64_t seed);

struct MultitaskProblem {
  Eigen::MatrixXd Phi;  // block diagonal, (sum n_t) x (T*p)
  Eigen::VectorXd y;
  GroupLayout layout;  // each base group unioned across tasks
};

/// Stacks T tasks sharing one group structure into a single problem whose
/// groups tie the tasks' copies of each base group together.
MultitaskProblem stack_multitask(const std::vector<Eigen::MatrixXd>& Phis,
                                 const std::vector<Eigen::VectorXd>& ys,
                                 const GroupLayout& base_layout);

}  // namespace sog
