#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sog/groups.hpp"
#include "sog/meanwidth.hpp"
#include "sog/simulate.hpp"
#include "sog/solver.hpp"

namespace sog {

/// Runs body(0..count-1) on up to `jobs` threads.  Each index owns its
/// output slot, so results are identical for any job count.
void parallel_for(int jobs, int count, const std::function<void(int)>& body);

// ---------------------------------------------------------------- phase

/// Recovery-error-vs-sample-count study: draw truth/design/labels per
/// trial, fit each method, record squared estimation error.
struct PhaseSpec {
  std::vector<int> n_grid;  // strictly increasing
  GroupLayout layout;
  int k = 3;
  int l = 2;
  ObservationModel model = ObservationModel::sign();
  double ar1_rho = 0.0;  // design correlation; 0 = identity
  int trials = 20;
  uint64_t seed = 0;
  std::vector<std::string> methods = {"soglasso"};
  double lambda1 = 1.0;  // soglasso l1/l2 tradeoff
  double eta2 = 0.5;     // ridge; must be > 0 for classification losses
  bool debias = true;
  // eta1 = fraction * (largest group norm of Phi^T y, the zero threshold);
  // several fractions -> pick by cross-validation with cv_folds >= 2
  std::vector<double> eta1_fractions = {0.2};
  int cv_folds = 0;
  int jobs = 1;
};

struct PhaseRow {
  std::string method;
  int n = 0;
  int trial = 0;
  double sq_error = 0.0;  // NaN for failed trials
  double seconds = 0.0;
};

std::vector<PhaseRow> run_phase(const PhaseSpec& spec);

/// Mean and standard error of sq_error per (method, n), NaN rows skipped.
struct PhaseSummary {
  std::string method;
  int n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
};
std::vector<PhaseSummary> summarize_phase(const std::vector<PhaseRow>& rows);

// ------------------------------------------------------------------ toy

/// Regression study on a chain of overlapping groups: sweep the fraction
/// of coordinates retained inside each active group, tune every method
/// clairvoyantly (best error over its grid, per trial).
struct ToySpec {
  int num_groups = 25;
  int group_size = 6;
  int shift = 4;
  int k = 5;
  int n = 100;
  int trials = 25;
  int tasks = 1;
  std::vector<double> alpha_grid = {0.2, 0.4, 0.6, 0.8, 1.0};
  double sigma_noise = 0.1;
  uint64_t seed = 0;
  std::vector<std::string> methods = {"lasso", "glasso", "oglasso",
                                      "soglasso"};
  std::vector<double> eta1_fractions = {0.01, 0.02, 0.05, 0.1, 0.2, 0.4};
  std::vector<double> lambda1_grid = {0.5, 1.0, 2.0};  // soglasso only
  int jobs = 1;
};

struct ToyRow {
  std::string method;
  double alpha = 0.0;
  double mean_mse = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

std::vector<ToyRow> run_toy_regression(const ToySpec& spec);

/// round-half-up of alpha * group_size, at least 1
int retained_per_group(double alpha, int group_size);

// ---------------------------------------------------------------- width

struct WidthGridRow {
  std::string kind;  // "width" or "chisq"
  int K = 0, L = 0, k = 0, l = 0, d = 0;
  int trials = 0;
  double empirical = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool pass = false;
  bool skipped = false;
};

/// Width rows over K in {5,10} x L in {4,5} x k,l in {1,2} (disjoint
/// layouts) and chi-square rows over K in {1,2,10,100} x d in {1,5,20}.
std::vector<WidthGridRow> run_width_grid(int width_trials, int chisq_trials,
                                         uint64_t seed, int jobs);

// ---------------------------------------------------------- worked table

struct TableCell {
  std::string label;
  double expected = 0.0;
  double computed = 0.0;
  double delta() const { return std::abs(expected - computed); }
};

struct PenaltyTableResult {
  std::vector<TableCell> cells;
  // the overlapping-instance objective must also not exceed any of the
  // candidate decompositions it is compared against
  bool all_upper_bounds_hold = true;
  bool pass(double tol = 1e-3) const;
};

/// Recomputes the worked 10-dimensional examples: three disjoint-group
/// instances (group-l2 part, l1 part, total) and the overlapping
/// three-group instance at mu in {0.1, 1, 10}.
PenaltyTableResult penalty_table_check();

}  // namespace sog
