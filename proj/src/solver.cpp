#include "sog/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "sog/prox.hpp"
#include "sog/simulate.hpp"

namespace sog {

StepRule StepRule::fixed(double gamma) {
  if (!(gamma > 0))
    throw std::invalid_argument("step rule: fixed step must be positive");
  StepRule s;
  s.kind = Kind::Fixed;
  s.gamma = gamma;
  return s;
}

StepRule StepRule::backtracking(double factor, double initial) {
  if (!(factor > 0) || !(factor < 1))
    throw std::invalid_argument("step rule: backtracking factor not in (0,1)");
  StepRule s;
  s.kind = Kind::Backtracking;
  s.factor = factor;
  s.initial = initial;
  return s;
}

void SolverConfig::validate() const {
  if (!(eta1 > 0)) throw std::invalid_argument("solver: eta1 must be > 0");
  if (eta2 < 0) throw std::invalid_argument("solver: eta2 must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("solver: max_iters >= 1");
  if (!(rel_tol > 0)) throw std::invalid_argument("solver: rel_tol must be > 0");
  if (step_rule.kind == StepRule::Kind::Fixed && !(step_rule.gamma > 0))
    throw std::invalid_argument("solver: fixed step must be positive");
  if (step_rule.kind == StepRule::Kind::Backtracking &&
      (!(step_rule.factor > 0) || !(step_rule.factor < 1)))
    throw std::invalid_argument("solver: backtracking factor not in (0,1)");
}

namespace {

double operator_norm_sq(const Eigen::MatrixXd& M, uint64_t seed) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  std::mt19937_64 rng(mix_seed(seed, 0x9070E21ull));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd b(M.cols());
  for (int i = 0; i < b.size(); ++i) b[i] = normal(rng);
  b.normalize();
  double sq = 0.0;
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd Mb = M * b;
    sq = Mb.squaredNorm();
    Eigen::VectorXd next = M.transpose() * Mb;
    double nn = next.norm();
    if (nn == 0.0) return 0.0;
    b = next / nn;
  }
  return sq;
}

struct Smooth {
  const Eigen::MatrixXd& Phi_d;
  const Eigen::VectorXd& y;
  const DuplicationMap& map;
  Loss::Kind kind;
  double eta2;
  Eigen::VectorXd neg_corr;  // -Phi_d^T y, the constant classification grad

  double value(const Eigen::VectorXd& w) const {
    double v;
    if (kind == Loss::Kind::LinearClassification)
      v = neg_corr.dot(w);
    else
      v = 0.5 * (y - Phi_d * w).squaredNorm();
    if (eta2 > 0) v += eta2 * collapse(w, map).squaredNorm();
    return v;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const {
    Eigen::VectorXd g;
    if (kind == Loss::Kind::LinearClassification)
      g = neg_corr;
    else
      g = Phi_d.transpose() * (Phi_d * w - y);
    if (eta2 > 0) g += 2.0 * eta2 * collapse_adjoint(collapse(w, map), map);
    return g;
  }
};

}  // namespace

FitResult fit(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y,
              const GroupLayout& layout, const Loss& loss,
              const SolverConfig& config) {
  config.validate();
  config.params.validate(layout);
  if (Phi.rows() != y.size())
    throw std::invalid_argument("fit: design has " +
                                std::to_string(Phi.rows()) + " rows, labels " +
                                std::to_string(y.size()));
  if (Phi.cols() != layout.p)
    throw std::invalid_argument("fit: design has " +
                                std::to_string(Phi.cols()) +
                                " columns, layout covers " +
                                std::to_string(layout.p));
  if (!Phi.allFinite() || !y.allFinite())
    throw std::invalid_argument("fit: non-finite values in data");
  if (loss.kind == Loss::Kind::LinearClassification)
    for (int i = 0; i < y.size(); ++i)
      if (y[i] != 1.0 && y[i] != -1.0)
        throw std::invalid_argument("fit: labels must be -1 or +1");

  DuplicationMap map = build_duplication(layout);
  const int D = map.expanded_dim;
  const int K = layout.K;
  Eigen::MatrixXd Phi_d = expand_design(Phi, map);

  Smooth smooth{Phi_d, y, map, loss.kind, config.eta2,
                loss.kind == Loss::Kind::LinearClassification
                    ? Eigen::VectorXd(-(Phi_d.transpose() * y))
                    : Eigen::VectorXd()};

  auto penalty_value = [&](const Eigen::VectorXd& w) {
    double total = 0.0;
    for (int g = 0; g < K; ++g) {
      auto [b, e] = map.group_ranges[g];
      auto seg = w.segment(b, e - b);
      total += config.params.alpha(g) * seg.norm() +
               config.params.beta(g) * seg.lpNorm<1>();
    }
    return config.eta1 * total;
  };

  double gamma;
  const bool backtrack = config.step_rule.kind == StepRule::Kind::Backtracking;
  if (!backtrack) {
    gamma = config.step_rule.gamma;
  } else if (config.step_rule.initial > 0) {
    gamma = config.step_rule.initial;
  } else {
    double sq = operator_norm_sq(Phi_d, config.seed);
    gamma = sq > 0 ? 1.0 / sq : 1.0;
  }

  Eigen::VectorXd t_l1(K), t_l2(K);
  auto prox_step = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& grad,
                       double g) {
    for (int gi = 0; gi < K; ++gi) {
      t_l1[gi] = g * config.eta1 * config.params.beta(gi);
      t_l2[gi] = g * config.eta1 * config.params.alpha(gi);
    }
    return prox_sparse_group(a - g * grad, map, t_l1, t_l2);
  };

  // proximal step from anchor a, shrinking gamma until the local quadratic
  // model dominates the smooth part at the candidate
  auto descend = [&](const Eigen::VectorXd& a, int iter) {
    Eigen::VectorXd grad = smooth.gradient(a);
    double fa = smooth.value(a);
    for (;;) {
      Eigen::VectorXd cand = prox_step(a, grad, gamma);
      if (!backtrack) return cand;
      Eigen::VectorXd diff = cand - a;
      double quad = fa + grad.dot(diff) + diff.squaredNorm() / (2.0 * gamma);
      if (smooth.value(cand) <= quad + 1e-12 * std::max(1.0, std::abs(fa)))
        return cand;
      gamma *= config.step_rule.factor;
      if (gamma < 1e-18)
        throw SolverNumericalError("fit: backtracking step collapsed", a,
                                   iter);
    }
  };

  FitResult result;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(D);
  Eigen::VectorXd v = w;
  double t = 1.0;
  result.objective_trace.push_back(smooth.value(w) + penalty_value(w));

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    Eigen::VectorXd cand = descend(config.acceleration ? v : w, iter);
    double F = smooth.value(cand) + penalty_value(cand);
    if (config.acceleration && F > result.objective_trace.back()) {
      // extrapolation overshot: restart momentum with a plain step from w
      cand = descend(w, iter);
      F = smooth.value(cand) + penalty_value(cand);
      t = 1.0;
    }
    if (!std::isfinite(F))
      throw SolverNumericalError("fit: objective became non-finite", cand,
                                 iter);
    double prev = result.objective_trace.back();
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    v = cand + ((t - 1.0) / t_next) * (cand - w);
    w = cand;
    t = t_next;
    result.objective_trace.push_back(F);
    result.iterations = iter;
    if (std::abs(F - prev) <= config.rel_tol * std::max(1.0, std::abs(F))) {
      result.converged = true;
      break;
    }
  }

  result.w_hat = w;
  result.x_raw = collapse(w, map);
  for (int g = 0; g < K; ++g) {
    auto [b, e] = map.group_ranges[g];
    if (w.segment(b, e - b).lpNorm<Eigen::Infinity>() > 0.0)
      result.active_groups.push_back(g);
  }
  for (int i = 0; i < layout.p; ++i)
    if (result.x_raw[i] != 0.0) result.support.push_back(i);

  if (config.debias) {
    DebiasResult dr = debias(result, Phi, y, loss);
    result.x_hat = dr.x;
    result.debias_rank_deficient = dr.rank_deficient;
  } else {
    result.x_hat = result.x_raw;
  }
  return result;
}

DebiasResult debias(const FitResult& fit, const Eigen::MatrixXd& Phi,
                    const Eigen::VectorXd& y, const Loss& loss) {
  DebiasResult dr;
  dr.x = Eigen::VectorXd::Zero(Phi.cols());
  if (fit.support.empty()) return dr;

  const int s = static_cast<int>(fit.support.size());
  Eigen::MatrixXd Phi_s(Phi.rows(), s);
  for (int j = 0; j < s; ++j) Phi_s.col(j) = Phi.col(fit.support[j]);

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Phi_s);
  Eigen::VectorXd b = cod.solve(y);  // minimum-norm least squares
  dr.rank_deficient = cod.rank() < s;
  for (int j = 0; j < s; ++j) dr.x[fit.support[j]] = b[j];

  if (loss.kind == Loss::Kind::LinearClassification) {
    double nrm = dr.x.norm();
    if (nrm > 0) dr.x /= nrm;
  }
  return dr;
}

CvResult cross_validate(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y,
                        const GroupLayout& layout, const Loss& loss,
                        const std::vector<SolverConfig>& grid, int folds,
                        uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cv: need at least 2 folds");
  if (grid.empty()) throw std::invalid_argument("cv: empty config grid");
  const int n = static_cast<int>(Phi.rows());
  if (n < folds) throw std::invalid_argument("cv: more folds than samples");

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(mix_seed(seed, 0xC5F01Dull));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> fold_of(n);
  for (int i = 0; i < n; ++i) fold_of[perm[i]] = i % folds;

  const bool classify = loss.kind == Loss::Kind::LinearClassification;
  CvResult cv;

  // a fold whose training labels are single-class cannot be scored fairly
  std::vector<bool> usable(folds, true);
  if (classify) {
    for (int f = 0; f < folds; ++f) {
      bool pos = false, neg = false;
      for (int i = 0; i < n; ++i)
        if (fold_of[i] != f) (y[i] > 0 ? pos : neg) = true;
      if (!(pos && neg)) {
        usable[f] = false;
        cv.any_fold_skipped = true;
      }
    }
  }
  if (std::none_of(usable.begin(), usable.end(), [](bool u) { return u; }))
    throw std::invalid_argument("cv: every fold has single-class training set");

  cv.mean_errors.assign(grid.size(), 0.0);
  for (std::size_t ci = 0; ci < grid.size(); ++ci) {
    double total = 0.0;
    int used = 0;
    for (int f = 0; f < folds; ++f) {
      if (!usable[f]) continue;
      std::vector<int> tr, va;
      for (int i = 0; i < n; ++i) (fold_of[i] == f ? va : tr).push_back(i);
      Eigen::MatrixXd Phi_tr(tr.size(), Phi.cols());
      Eigen::VectorXd y_tr(tr.size());
      for (std::size_t r = 0; r < tr.size(); ++r) {
        Phi_tr.row(r) = Phi.row(tr[r]);
        y_tr[r] = y[tr[r]];
      }
      FitResult fr = fit(Phi_tr, y_tr, layout, loss, grid[ci]);
      double err = 0.0;
      for (int idx : va) {
        double pred = Phi.row(idx).dot(fr.x_hat);
        if (classify)
          err += ((pred >= 0 ? 1.0 : -1.0) != y[idx]) ? 1.0 : 0.0;
        else
          err += (pred - y[idx]) * (pred - y[idx]);
      }
      total += err / va.size();
      ++used;
    }
    cv.mean_errors[ci] = total / used;
  }

  cv.best_index = 0;
  for (std::size_t ci = 1; ci < grid.size(); ++ci) {
    double cur = cv.mean_errors[ci], best = cv.mean_errors[cv.best_index];
    if (cur < best - 1e-12 ||
        (std::abs(cur - best) <= 1e-12 &&
         grid[ci].eta1 > grid[cv.best_index].eta1))
      cv.best_index = static_cast<int>(ci);
  }
  cv.best = grid[cv.best_index];
  return cv;
}

MultitaskProblem stack_multitask(const std::vector<Eigen::MatrixXd>& Phis,
                                 const std::vector<Eigen::VectorXd>& ys,
                                 const GroupLayout& base_layout) {
  if (Phis.empty() || Phis.size() != ys.size())
    throw std::invalid_argument("stack: need matching task design/label lists");
  const int T = static_cast<int>(Phis.size());
  const int p = base_layout.p;
  Eigen::Index total_rows = 0;
  for (int t = 0; t < T; ++t) {
    if (Phis[t].cols() != p)
      throw std::invalid_argument("stack: task " + std::to_string(t) +
                                  " has inconsistent dimension " +
                                  std::to_string(Phis[t].cols()) + " vs " +
                                  std::to_string(p));
    if (Phis[t].rows() != ys[t].size())
      throw std::invalid_argument("stack: task " + std::to_string(t) +
                                  " design/label row mismatch");
    total_rows += Phis[t].rows();
  }

  MultitaskProblem mp;
  mp.Phi = Eigen::MatrixXd::Zero(total_rows, Eigen::Index(T) * p);
  mp.y.resize(total_rows);
  Eigen::Index row = 0;
  for (int t = 0; t < T; ++t) {
    mp.Phi.block(row, Eigen::Index(t) * p, Phis[t].rows(), p) = Phis[t];
    mp.y.segment(row, ys[t].size()) = ys[t];
    row += Phis[t].rows();
  }

  std::vector<std::vector<int>> stacked(base_layout.K);
  for (int g = 0; g < base_layout.K; ++g)
    for (int t = 0; t < T; ++t)
      for (int idx : base_layout.groups[g]) stacked[g].push_back(t * p + idx);
  mp.layout = build_layout(std::move(stacked), T * p);
  return mp;
}

}  // namespace sog
