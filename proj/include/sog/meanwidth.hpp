#pragma once

#include <random>

#include <Eigen/Dense>

#include "sog/groups.hpp"
#include "sog/penalty.hpp"

namespace sog {

struct WidthEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
  enum class InnerMax { ExactEnumeration, GreedyUpperBound };
  InnerMax inner_max_method = InnerMax::ExactEnumeration;
};

/// sup of <g, x> over unit vectors supported on at most k groups with at
/// most l coordinates inside each.  For disjoint groups the sup is exact:
/// per-group top-l energy of g, then the best k groups.  Exposed so
/// ordering properties can be checked per draw.
double nc_sup_disjoint(const Eigen::VectorXd& g, const GroupLayout& layout,
                       int k, int l);

/// Same selection rule on an overlapping layout.  Only an upper bound
/// there (per-group energies double-count shared coordinates).
double nc_sup_greedy(const Eigen::VectorXd& g, const GroupLayout& layout,
                     int k, int l);

/// Monte-Carlo mean width of the (k,l)-group-sparse unit set, exact inner
/// sup (disjoint layouts only).  Guards against instances whose support
/// enumeration would exceed 1e7.  trials >= 30.
WidthEstimate width_nc_exact(const GroupLayout& layout, int k, int l,
                             int trials, std::mt19937_64& rng);

/// Upper-bound variant for overlapping layouts, labeled as such.
WidthEstimate width_nc_greedy(const GroupLayout& layout, int k, int l,
                              int trials, std::mt19937_64& rng);

/// log of C(K,k) * C(kL, kl): the number of candidate supports behind the
/// width bound.
double log_support_count(int K, int k, int L, int l);

/// Closed-form width-squared bound
/// (sqrt(k*[log(K/k) + l*log(L/l) + 2]) + sqrt(k*l))^2.
double bound_nc(int K, int k, int L, int l);

/// Tighter form using the exact support count:
/// (sqrt(log_support_count) + sqrt(k*l))^2.
double bound_nc_counted(int K, int k, int L, int l);

/// Draws K iid chi-square(d) variables per trial and compares the mean of
/// their max against (sqrt(2 log K) + sqrt(d))^2.
struct ChisqCheck {
  double empirical_mean = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  int trials = 0;
  bool pass() const { return empirical_mean <= bound + 3.0 * std_error; }
};
ChisqCheck chisq_max_check(int K, int d, int trials, std::mt19937_64& rng);

/// Ratio h(x) / (sqrt(k)(1+lambda1)) over random (k,l)-group-sparse unit
/// vectors: at most 1 if the penalty really is a relaxation of the sparse
/// set.  Also evaluates the equal-entries witness that attains the bound.
struct RelaxationReport {
  double worst_ratio = 0.0;
  double witness_ratio = 0.0;
  int trials = 0;
};
RelaxationReport relaxation_check(const GroupLayout& layout, int k, int l,
                                  const PenaltyParams& params, int trials,
                                  std::mt19937_64& rng);

}  // namespace sog
