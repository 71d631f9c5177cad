#pragma once

#include <span>
#include <string>

#include "mfalloc/linalg.hpp"

namespace mfalloc {

// Coefficients expressing each non-basis column in the basis columns:
// (A_S)^+ A restricted to columns outside S. Rows follow the sorted
// basis indices, columns the non-basis indices in ascending order.
// Requires a numerically full-rank basis (sigma_min > 1e-10 sigma_max).
Matrix expansion_matrix(const Matrix& ensemble, std::span<const Index> basis);

// Largest column l1 norm of the expansion coefficients; recovery theory
// wants this below 1.
double consistency_bound(const Matrix& expansion);

// Smallest eigenvalue of (A_S)^T A_S, computed as sigma_min(A_S)^2.
double lambda_min(const Matrix& ensemble, std::span<const Index> basis);

struct RecoveryDiagnostics {
  double consistency_bound = 0.0;     // max expansion column l1 mass
  double basis_min_eigenvalue = 0.0;  // smallest basis Gram eigenvalue
  double epsilon_threshold = 0.0;     // noise floor the stop rule must clear
  double min_row_mass = 0.0;          // smallest expansion row 2-norm
  bool consistency_ok = false;        // consistency_bound < 1
  bool row_mass_ok = false;           // min_row_mass > eps * sqrt(8) / lambda

  bool all_ok() const { return consistency_ok && row_mass_ok; }
  std::string to_json() const;
};

// Noisy-recovery conditions for noise level sigma at confidence 1 - 2*eta
// on an n-column, dim-row ensemble whose planted expansion is `expansion`
// and whose basis Gram has smallest eigenvalue lambda:
//   epsilon_threshold = sigma * sqrt(2 n dim log(2 n dim / eta)) / (1 - Dbar)
//   min_row_mass must exceed epsilon_threshold * sqrt(8) / lambda.
RecoveryDiagnostics noisy_thresholds(const Matrix& expansion, double sigma,
                                     double eta, Index n, Index dim, double lambda);

struct CsspOptimum {
  IndexList subset;      // ascending; ties go to the lexicographically
                         // smallest subset
  double residual = 0.0; // projection residual of the winner
};

// Exhaustive search over all size-m column subsets; guarded to
// C(n, m) <= 1e6 enumerations.
CsspOptimum brute_force_cssp(const Matrix& ensemble, Index m);

}  // namespace mfalloc
