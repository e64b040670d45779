#include "sog/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sog {

ObservationModel ObservationModel::logistic(double beta) {
  if (beta <= 0)
    throw std::invalid_argument("logistic model: beta must be positive");
  ObservationModel m;
  m.kind = Kind::Logistic;
  m.beta = beta;
  return m;
}

ObservationModel ObservationModel::sign() {
  ObservationModel m;
  m.kind = Kind::Sign;
  return m;
}

ObservationModel ObservationModel::linear(double sigma_noise) {
  if (sigma_noise < 0)
    throw std::invalid_argument("linear model: noise level must be >= 0");
  ObservationModel m;
  m.kind = Kind::Linear;
  m.sigma_noise = sigma_noise;
  return m;
}

GroundTruth gen_ground_truth(const GroupLayout& layout, int k, int l,
                             std::mt19937_64& rng) {
  if (k < 1 || k > layout.K)
    throw std::invalid_argument("ground truth: k must be in [1, K]");
  if (l < 1 || l > layout.L)
    throw std::invalid_argument("ground truth: l must be in [1, L]");

  std::vector<int> all(layout.K);
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> chosen;
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), k, rng);

  GroundTruth gt;
  gt.x_star = Eigen::VectorXd::Zero(layout.p);
  gt.active_groups = chosen;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int g : chosen) {
    const auto& grp = layout.groups[g];
    int take = std::min<int>(l, static_cast<int>(grp.size()));
    std::vector<int> coords;
    std::sample(grp.begin(), grp.end(), std::back_inserter(coords), take, rng);
    std::sort(coords.begin(), coords.end());
    for (int idx : coords) gt.x_star[idx] += unif(rng);
    gt.group_support[g] = std::move(coords);
  }
  double nrm = gt.x_star.norm();
  if (nrm < 1e-12) {
    // overlap sums cancelling to zero has probability zero, but don't
    // return garbage if it happens
    return gen_ground_truth(layout, k, l, rng);
  }
  gt.x_star /= nrm;
  return gt;
}

DesignSpec DesignSpec::identity(int n, int p, uint64_t seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("design: n,p must be >= 1");
  DesignSpec s;
  s.n = n;
  s.p = p;
  s.seed = seed;
  return s;
}

DesignSpec DesignSpec::ar1(int n, int p, double rho, uint64_t seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("design: n,p must be >= 1");
  if (!(std::abs(rho) < 1.0))
    throw std::invalid_argument("design: ar1 correlation must satisfy |rho|<1");
  DesignSpec s;
  s.n = n;
  s.p = p;
  s.cov = Cov::Ar1;
  s.rho = rho;
  s.seed = seed;
  return s;
}

DesignSpec DesignSpec::explicit_cov(int n, Eigen::MatrixXd sigma,
                                    uint64_t seed) {
  if (n < 1) throw std::invalid_argument("design: n must be >= 1");
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1)
    throw std::invalid_argument("design: covariance must be square");
  DesignSpec s;
  s.n = n;
  s.p = static_cast<int>(sigma.rows());
  s.cov = Cov::Explicit;
  s.sigma = std::move(sigma);
  s.seed = seed;
  return s;
}

Eigen::MatrixXd ar1_covariance(int p, double rho) {
  if (!(std::abs(rho) < 1.0))
    throw std::invalid_argument("ar1_covariance: need |rho| < 1");
  Eigen::MatrixXd sigma(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
  return sigma;
}

Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols())
    throw std::invalid_argument("covariance_sqrt: matrix must be square");
  double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, sigma.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("covariance_sqrt: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("covariance_sqrt: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  double lo = ev.minCoeff();
  if (lo < -1e-12)
    throw std::invalid_argument(
        "covariance_sqrt: not positive semidefinite (eigenvalue " +
        std::to_string(lo) + ")");
  Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd gen_design(const DesignSpec& spec, std::mt19937_64& rng) {
  Eigen::MatrixXd Z(spec.n, spec.p);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.p; ++j) Z(i, j) = normal(rng);
  switch (spec.cov) {
    case DesignSpec::Cov::Identity:
      return Z;
    case DesignSpec::Cov::Ar1:
      return Z * covariance_sqrt(ar1_covariance(spec.p, spec.rho));
    case DesignSpec::Cov::Explicit:
      return Z * covariance_sqrt(spec.sigma);
  }
  throw std::logic_error("gen_design: unknown covariance kind");
}

Eigen::VectorXd gen_labels(const Eigen::MatrixXd& Phi,
                           const Eigen::VectorXd& x_star,
                           const ObservationModel& model,
                           std::mt19937_64& rng) {
  if (Phi.cols() != x_star.size())
    throw std::invalid_argument("gen_labels: design/signal dimension mismatch");
  if (model.classification() && std::abs(x_star.norm() - 1.0) > 1e-6)
    throw std::invalid_argument(
        "gen_labels: classification models need a unit-norm signal");
  Eigen::VectorXd u = Phi * x_star;
  Eigen::VectorXd y(u.size());
  switch (model.kind) {
    case ObservationModel::Kind::Sign:
      for (int i = 0; i < u.size(); ++i) y[i] = u[i] >= 0 ? 1.0 : -1.0;
      return y;
    case ObservationModel::Kind::Logistic: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (int i = 0; i < u.size(); ++i) {
        double prob = 1.0 / (1.0 + std::exp(-model.beta * u[i]));
        y[i] = unif(rng) < prob ? 1.0 : -1.0;
      }
      return y;
    }
    case ObservationModel::Kind::Linear: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (int i = 0; i < u.size(); ++i)
        y[i] = u[i] + model.sigma_noise * normal(rng);
      return y;
    }
  }
  throw std::logic_error("gen_labels: unknown model kind");
}

GaussHermite gauss_hermite(int points) {
  if (points < 1) throw std::invalid_argument("gauss_hermite: need >= 1 point");
  // Golub-Welsch on the Hermite Jacobi matrix (off-diagonal sqrt(i/2)),
  // then rescale so the rule integrates against the standard normal.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(points, points);
  for (int i = 1; i < points; ++i) {
    double b = std::sqrt(i / 2.0);
    J(i, i - 1) = J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gauss_hermite: eigendecomposition failed");
  GaussHermite gh;
  gh.nodes = es.eigenvalues() * std::sqrt(2.0);
  gh.weights = es.eigenvectors().row(0).transpose().array().square();
  return gh;
}

double label_scale_constant(const ObservationModel& model, int quad_points) {
  switch (model.kind) {
    case ObservationModel::Kind::Linear:
      throw std::invalid_argument(
          "label_scale_constant: defined for classification links only");
    case ObservationModel::Kind::Sign:
      // E[sign(g) g] = E|g| = sqrt(2/pi)
      return std::sqrt(M_PI / 2.0);
    case ObservationModel::Kind::Logistic: {
      if (quad_points < 64)
        throw std::invalid_argument(
            "label_scale_constant: logistic rule needs >= 64 points");
      GaussHermite gh = gauss_hermite(quad_points);
      // f(u) = 2*sigmoid(beta u) - 1 = tanh(beta u / 2)
      double m = 0.0;
      for (int i = 0; i < quad_points; ++i)
        m += gh.weights[i] * std::tanh(model.beta * gh.nodes[i] / 2.0) *
             gh.nodes[i];
      if (m <= 0)
        throw std::runtime_error("label_scale_constant: degenerate link");
      return 1.0 / m;
    }
  }
  throw std::logic_error("label_scale_constant: unknown model kind");
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace sog
