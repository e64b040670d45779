#include "sog/meanwidth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sog/simulate.hpp"

namespace sog {

namespace {

double log_binomial(int n, int m) {
  if (m < 0 || m > n) throw std::invalid_argument("log_binomial: bad args");
  return std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0);
}

void check_kl(const GroupLayout& layout, int k, int l) {
  if (k < 1 || k > layout.K)
    throw std::invalid_argument("width: k must be in [1, K]");
  if (l < 1 || l > layout.L)
    throw std::invalid_argument("width: l must be in [1, L]");
}

// top-l energy per group, then the k best groups
double selection_sup(const Eigen::VectorXd& g, const GroupLayout& layout,
                     int k, int l) {
  std::vector<double> energy(layout.K);
  std::vector<double> sq;
  for (int gi = 0; gi < layout.K; ++gi) {
    const auto& grp = layout.groups[gi];
    sq.clear();
    for (int idx : grp) sq.push_back(g[idx] * g[idx]);
    int take = std::min<int>(l, static_cast<int>(sq.size()));
    std::partial_sort(sq.begin(), sq.begin() + take, sq.end(),
                      std::greater<double>());
    double e = 0.0;
    for (int j = 0; j < take; ++j) e += sq[j];
    energy[gi] = e;
  }
  std::partial_sort(energy.begin(), energy.begin() + k, energy.end(),
                    std::greater<double>());
  double total = 0.0;
  for (int j = 0; j < k; ++j) total += energy[j];
  return std::sqrt(total);
}

WidthEstimate run_width(const GroupLayout& layout, int k, int l, int trials,
                        std::mt19937_64& rng,
                        WidthEstimate::InnerMax method) {
  if (trials < 30)
    throw std::invalid_argument("width: need at least 30 trials");
  // per-trial streams so the estimate does not depend on evaluation order
  uint64_t root = rng();
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 trng(mix_seed(root, static_cast<uint64_t>(t)));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd g(layout.p);
    for (int i = 0; i < layout.p; ++i) g[i] = normal(trng);
    double s = selection_sup(g, layout, k, l);
    sum += s;
    sumsq += s * s;
  }
  WidthEstimate est;
  est.mean = sum / trials;
  double var = (sumsq - sum * sum / trials) / (trials - 1);
  est.std_error = std::sqrt(std::max(0.0, var) / trials);
  est.trials = trials;
  est.inner_max_method = method;
  return est;
}

}  // namespace

double nc_sup_disjoint(const Eigen::VectorXd& g, const GroupLayout& layout,
                       int k, int l) {
  if (!layout.disjoint())
    throw std::invalid_argument(
        "nc_sup_disjoint: groups overlap; use nc_sup_greedy");
  check_kl(layout, k, l);
  if (g.size() != layout.p)
    throw std::invalid_argument("nc_sup_disjoint: dimension mismatch");
  return selection_sup(g, layout, k, l);
}

double nc_sup_greedy(const Eigen::VectorXd& g, const GroupLayout& layout,
                     int k, int l) {
  check_kl(layout, k, l);
  if (g.size() != layout.p)
    throw std::invalid_argument("nc_sup_greedy: dimension mismatch");
  return selection_sup(g, layout, k, l);
}

WidthEstimate width_nc_exact(const GroupLayout& layout, int k, int l,
                             int trials, std::mt19937_64& rng) {
  if (!layout.disjoint())
    throw std::invalid_argument(
        "width_nc_exact: groups overlap; use width_nc_greedy");
  check_kl(layout, k, l);
  double log_count =
      log_binomial(layout.K, k) + k * log_binomial(layout.L, std::min(l, layout.L));
  if (log_count > std::log(1e7))
    throw std::invalid_argument(
        "width_nc_exact: support enumeration exceeds 1e7; use a smaller "
        "instance");
  return run_width(layout, k, l, trials, rng,
                   WidthEstimate::InnerMax::ExactEnumeration);
}

WidthEstimate width_nc_greedy(const GroupLayout& layout, int k, int l,
                              int trials, std::mt19937_64& rng) {
  check_kl(layout, k, l);
  return run_width(layout, k, l, trials, rng,
                   WidthEstimate::InnerMax::GreedyUpperBound);
}

double log_support_count(int K, int k, int L, int l) {
  if (k < 1 || k > K || l < 1 || l > L)
    throw std::invalid_argument("log_support_count: need 1<=k<=K, 1<=l<=L");
  return log_binomial(K, k) + log_binomial(k * L, k * l);
}

double bound_nc(int K, int k, int L, int l) {
  if (k < 1 || k > K || l < 1 || l > L)
    throw std::invalid_argument("bound_nc: need 1<=k<=K, 1<=l<=L");
  double inner = k * (std::log(double(K) / k) + l * std::log(double(L) / l) + 2.0);
  double root = std::sqrt(inner) + std::sqrt(double(k) * l);
  return root * root;
}

double bound_nc_counted(int K, int k, int L, int l) {
  double root = std::sqrt(log_support_count(K, k, L, l)) +
                std::sqrt(double(k) * l);
  return root * root;
}

ChisqCheck chisq_max_check(int K, int d, int trials, std::mt19937_64& rng) {
  if (K < 1 || d < 1) throw std::invalid_argument("chisq_max_check: K,d >= 1");
  if (trials < 1000)
    throw std::invalid_argument("chisq_max_check: need at least 1000 trials");
  uint64_t root = rng();
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 trng(mix_seed(root, static_cast<uint64_t>(t)));
    std::normal_distribution<double> normal(0.0, 1.0);
    double mx = 0.0;
    for (int i = 0; i < K; ++i) {
      double q = 0.0;
      for (int j = 0; j < d; ++j) {
        double z = normal(trng);
        q += z * z;
      }
      mx = std::max(mx, q);
    }
    sum += mx;
    sumsq += mx * mx;
  }
  ChisqCheck c;
  c.trials = trials;
  c.empirical_mean = sum / trials;
  double var = (sumsq - sum * sum / trials) / (trials - 1);
  c.std_error = std::sqrt(std::max(0.0, var) / trials);
  double root_b = std::sqrt(2.0 * std::log(double(K))) + std::sqrt(double(d));
  c.bound = root_b * root_b;
  return c;
}

RelaxationReport relaxation_check(const GroupLayout& layout, int k, int l,
                                  const PenaltyParams& params, int trials,
                                  std::mt19937_64& rng) {
  check_kl(layout, k, l);
  if (trials < 1)
    throw std::invalid_argument("relaxation_check: need at least 1 trial");
  params.validate(layout);
  double denom = std::sqrt(double(k)) * (1.0 + params.lambda1);

  RelaxationReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    GroundTruth gt = gen_ground_truth(layout, k, l, rng);
    double h = eval_penalty(gt.x_star, layout, params).objective;
    rep.worst_ratio = std::max(rep.worst_ratio, h / denom);
  }

  // the bound-attaining configuration: k disjoint groups of l entries,
  // all equal to 1/sqrt(kl)
  GroupLayout witness_layout = make_block_layout(k, l);
  Eigen::VectorXd witness =
      Eigen::VectorXd::Constant(k * l, 1.0 / std::sqrt(double(k) * l));
  PenaltyParams witness_params = PenaltyParams::uniform(params.lambda1, l);
  double hw = eval_penalty(witness, witness_layout, witness_params).objective;
  rep.witness_ratio = hw / denom;
  return rep;
}

}  // namespace sog
