#include "sog/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace sog {

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  if (t < 0) throw std::invalid_argument("soft_threshold: negative threshold");
  return v.unaryExpr([t](double a) {
    double m = std::abs(a) - t;
    return m > 0 ? (a > 0 ? m : -m) : 0.0;
  });
}

Eigen::VectorXd group_soft_threshold(const Eigen::VectorXd& v, double t) {
  if (t < 0)
    throw std::invalid_argument("group_soft_threshold: negative threshold");
  double nrm = v.norm();
  if (nrm <= t) return Eigen::VectorXd::Zero(v.size());
  return v * ((nrm - t) / nrm);
}

Eigen::VectorXd prox_sparse_group(const Eigen::VectorXd& w,
                                  const DuplicationMap& map,
                                  const Eigen::VectorXd& t_l1,
                                  const Eigen::VectorXd& t_l2) {
  if (w.size() != map.expanded_dim)
    throw std::invalid_argument("prox: expected expanded dimension " +
                                std::to_string(map.expanded_dim));
  const int K = static_cast<int>(map.group_ranges.size());
  if (t_l1.size() != K || t_l2.size() != K)
    throw std::invalid_argument("prox: need one threshold pair per group");
  if (t_l1.minCoeff() < 0 || t_l2.minCoeff() < 0)
    throw std::invalid_argument("prox: negative threshold");

  Eigen::VectorXd out(w.size());
  for (int g = 0; g < K; ++g) {
    auto [b, e] = map.group_ranges[g];
    int len = e - b;
    // prox of t1*||.||_1 + t2*||.||_2 composes: first the elementwise
    // shrinkage, then the block shrinkage of the result.
    Eigen::VectorXd seg = soft_threshold(w.segment(b, len), t_l1[g]);
    out.segment(b, len) = group_soft_threshold(seg, t_l2[g]);
  }
  return out;
}

Eigen::VectorXd prox_sparse_group(const Eigen::VectorXd& w,
                                  const DuplicationMap& map, double eta,
                                  double mu) {
  const int K = static_cast<int>(map.group_ranges.size());
  return prox_sparse_group(w, map,
                           Eigen::VectorXd::Constant(K, eta * mu),
                           Eigen::VectorXd::Constant(K, eta));
}

}  // namespace sog
