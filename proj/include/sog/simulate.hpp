#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sog/groups.hpp"

namespace sog {

/// How labels are produced from the linear measurement u = <phi, x*>.
struct ObservationModel {
  enum class Kind { Logistic, Sign, Linear };
  Kind kind = Kind::Linear;
  double beta = 1.0;         // logistic steepness
  double sigma_noise = 0.0;  // linear-model noise level

  static ObservationModel logistic(double beta);
  static ObservationModel sign();
  static ObservationModel linear(double sigma_noise);

  bool classification() const { return kind != Kind::Linear; }
};

struct GroundTruth {
  Eigen::VectorXd x_star;
  std::vector<int> active_groups;                 // sorted
  std::map<int, std::vector<int>> group_support;  // group -> chosen coords
};

/// Draws a vector supported on k groups with at most l nonzeros each:
/// groups uniformly without replacement, min(l, |G|) coordinates per
/// group, values uniform on [-1,1] (overlap collisions just add), then
/// normalized to unit length.
GroundTruth gen_ground_truth(const GroupLayout& layout, int k, int l,
                             std::mt19937_64& rng);

struct DesignSpec {
  enum class Cov { Identity, Ar1, Explicit };
  int n = 0;
  int p = 0;
  Cov cov = Cov::Identity;
  double rho = 0.0;       // ar1 correlation
  Eigen::MatrixXd sigma;  // explicit covariance
  uint64_t seed = 0;

  static DesignSpec identity(int n, int p, uint64_t seed);
  static DesignSpec ar1(int n, int p, double rho, uint64_t seed);
  static DesignSpec explicit_cov(int n, Eigen::MatrixXd sigma, uint64_t seed);
};

/// Rows i.i.d. N(0, Sigma).  Standard normals are drawn row-major and
/// multiplied by the symmetric square root of Sigma.
Eigen::MatrixXd gen_design(const DesignSpec& spec, std::mt19937_64& rng);

/// Labels under the model.  Classification models require unit ||x*||;
/// sign ties resolve to +1.
Eigen::VectorXd gen_labels(const Eigen::MatrixXd& Phi,
                           const Eigen::VectorXd& x_star,
                           const ObservationModel& model, std::mt19937_64& rng);

Eigen::MatrixXd ar1_covariance(int p, double rho);

/// Symmetric PSD square root via eigendecomposition; eigenvalues below
/// -1e-12 are rejected (message names the most negative one).
Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& sigma);

/// 1 / E[f(g) g] for standard normal g, where f is the classification
/// link: sign gives sqrt(pi/2) in closed form, logistic is computed by
/// Gauss-Hermite quadrature.  Effective noise level of the link; linear
/// models are rejected.
double label_scale_constant(const ObservationModel& model,
                            int quad_points = 96);

/// Nodes/weights for E[h(g)], g standard normal, by Gauss-Hermite rules
/// (Jacobi-matrix eigenvalues).  Exposed for tests.
struct GaussHermite {
  Eigen::VectorXd nodes;    // evaluate h at these
  Eigen::VectorXd weights;  // sum w_i h(node_i) = E[h(g)]
};
GaussHermite gauss_hermite(int points);

/// Stream splitter for per-trial generators: decorrelates (seed, stream)
/// pairs so trials are independent and order-free.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

}  // namespace sog
