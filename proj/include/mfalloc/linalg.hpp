#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace mfalloc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

// Snapshot inner-product matrix Q = A^T W A. Construction validates the
// invariants every consumer relies on: square, finite, symmetric to
// relative 1e-12, nonnegative diagonal, eigenvalues >= -1e-10 * largest.
class GramMatrix {
public:
  explicit GramMatrix(Matrix q);

  const Matrix& matrix() const { return q_; }
  Index dim() const { return q_.rows(); }

private:
  Matrix q_;
};

struct SvdFactors {
  Matrix u;                // rows x r, orthonormal columns
  Vector singular_values;  // descending, length r = min(rows, cols)
  Matrix v;                // cols x r, orthonormal columns
};

// Thin SVD; factors reconstruct the input to relative 1e-10 Frobenius.
SvdFactors svd(const Matrix& a);

// Unweighted Gram matrix Q_ij = <a_i, a_j>.
GramMatrix gram(const Matrix& ensemble);

// Weighted Gram matrix Q = A^T diag(w) A; weights must be nonnegative.
GramMatrix gram(const Matrix& ensemble, const Vector& weights);

// Moore-Penrose pseudoinverse with singular values below
// max(rows, cols) * eps * sigma_max treated as zero.
Matrix pseudoinverse(const Matrix& a);

// Minimum-norm least-squares solution of basis * X ~= targets, one column
// of X per column of targets. Rank decisions use the pseudoinverse cutoff.
Matrix least_squares(const Matrix& basis, const Matrix& targets);

// Squared Frobenius distance of the ensemble from the span of the listed
// columns: ||A - A_S (A_S)^+ A||_F^2. An empty subset gives ||A||_F^2.
// Indices are 0-based, in-range and duplicate-free.
double projection_residual(const Matrix& ensemble, std::span<const Index> subset);

// Eckart-Young floor: squared Frobenius error of the best rank-k
// approximation, i.e. the sum of the trailing squared singular values.
// Requires 1 <= k <= min(rows, cols).
double rank_k_error(const Matrix& ensemble, Index k);

// Mixed l2,1 norm: sum of column 2-norms.
double mixed_norm_21(const Matrix& m);

// Throws std::invalid_argument naming `what` if any entry is NaN or Inf.
void require_finite(const Matrix& m, const char* what);

}  // namespace mfalloc
