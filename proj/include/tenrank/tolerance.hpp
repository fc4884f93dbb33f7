#pragma once

#include <stdexcept>

namespace tenrank {

/// Numerical contract shared by every rank / diagonalizability decision.
/// All cutoffs are relative; the operations document what they scale by.
struct TolerancePolicy {
  /// Singular values below rank_rel_tol * max(dim) * sigma_max are zero.
  double rank_rel_tol = 1e-10;
  /// Eigenvalues within eig_cluster_tol * spectral scale form one cluster.
  double eig_cluster_tol = 1e-8;
  /// Max |Im(lambda)| / scale treated as a real eigenvalue.
  double real_axis_tol = 1e-8;
  /// Relative residual accepted for reconstructions and commutator checks.
  double residual_tol = 1e-8;
  /// Random combinations sampled when probing a slice span.
  int span_trials = 32;
  /// ALS sweep cap per restart.
  int als_max_iters = 400;

  void validate() const {
    if (rank_rel_tol <= 0 || eig_cluster_tol <= 0 || real_axis_tol <= 0 ||
        residual_tol <= 0)
      throw std::invalid_argument("TolerancePolicy: tolerances must be > 0");
    if (span_trials <= 0 || als_max_iters <= 0)
      throw std::invalid_argument("TolerancePolicy: counts must be > 0");
  }
};

}  // namespace tenrank
