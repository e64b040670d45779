#pragma once

#include <Eigen/Dense>

#include "sog/groups.hpp"

namespace sog {

/// Elementwise shrinkage toward zero by t (prox of t*||.||_1).
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t);

/// Scales the whole vector toward zero, exactly zero once ||v|| <= t
/// (prox of t*||.||_2).
Eigen::VectorXd group_soft_threshold(const Eigen::VectorXd& v, double t);

/// Prox of sum_G t_l1[G]*||w_G||_1 + t_l2[G]*||w_G||_2 over the disjoint
/// expanded groups: elementwise shrinkage first, then the block
/// shrinkage, per group.  Thresholds must be nonnegative.
Eigen::VectorXd prox_sparse_group(const Eigen::VectorXd& w,
                                  const DuplicationMap& map,
                                  const Eigen::VectorXd& t_l1,
                                  const Eigen::VectorXd& t_l2);

/// Uniform-threshold convenience: t_l1 = eta*mu, t_l2 = eta for every group.
Eigen::VectorXd prox_sparse_group(const Eigen::VectorXd& w,
                                  const DuplicationMap& map, double eta,
                                  double mu);

}  // namespace sog
