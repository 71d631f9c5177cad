#include "mfalloc/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace mfalloc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double rank_cutoff(const Matrix& a, double sigma_max) {
  return static_cast<double>(std::max(a.rows(), a.cols())) * kEps * sigma_max;
}

void check_subset(const Matrix& ensemble, std::span<const Index> subset) {
  std::unordered_set<Index> seen;
  for (Index j : subset) {
    if (j < 0 || j >= ensemble.cols())
      throw std::invalid_argument("column index " + std::to_string(j) +
                                  " out of range [0, " + std::to_string(ensemble.cols()) + ")");
    if (!seen.insert(j).second)
      throw std::invalid_argument("duplicate column index " + std::to_string(j));
  }
}

}  // namespace

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    for (Index j = 0; j < m.cols(); ++j)
      if (!m.col(j).allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite entry in column " +
                                    std::to_string(j));
    throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

GramMatrix::GramMatrix(Matrix q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols())
    throw std::invalid_argument("gram matrix must be square");
  require_finite(q_, "gram matrix");
  const double scale = q_.cwiseAbs().maxCoeff();
  if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
    throw std::invalid_argument("gram matrix not symmetric");
  if (q_.diagonal().minCoeff() < 0.0)
    throw std::invalid_argument("gram matrix has a negative diagonal entry");
  Eigen::SelfAdjointEigenSolver<Matrix> es(q_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -1e-10 * std::max(hi, 0.0))
    throw std::invalid_argument("gram matrix not positive semidefinite");
}

SvdFactors svd(const Matrix& a) {
  require_finite(a, "svd input");
  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

GramMatrix gram(const Matrix& ensemble) {
  require_finite(ensemble, "ensemble");
  return GramMatrix(ensemble.transpose() * ensemble);
}

GramMatrix gram(const Matrix& ensemble, const Vector& weights) {
  require_finite(ensemble, "ensemble");
  if (weights.size() != ensemble.rows())
    throw std::invalid_argument("weight vector length must match ensemble rows");
  if (!weights.allFinite() || weights.minCoeff() < 0.0)
    throw std::invalid_argument("quadrature weights must be finite and nonnegative");
  return GramMatrix(ensemble.transpose() * weights.asDiagonal() * ensemble);
}

Matrix pseudoinverse(const Matrix& a) {
  const SvdFactors f = svd(a);
  const double cutoff = f.singular_values.size() == 0
                            ? 0.0
                            : rank_cutoff(a, f.singular_values(0));
  Vector inv = Vector::Zero(f.singular_values.size());
  for (Index i = 0; i < inv.size(); ++i)
    if (f.singular_values(i) > cutoff) inv(i) = 1.0 / f.singular_values(i);
  return f.v * inv.asDiagonal() * f.u.transpose();
}

Matrix least_squares(const Matrix& basis, const Matrix& targets) {
  if (basis.rows() != targets.rows())
    throw std::invalid_argument("basis and targets must have equal row counts");
  const SvdFactors f = svd(basis);
  require_finite(targets, "least-squares targets");
  const double cutoff = f.singular_values.size() == 0
                            ? 0.0
                            : rank_cutoff(basis, f.singular_values(0));
  Matrix y = f.u.transpose() * targets;
  for (Index i = 0; i < f.singular_values.size(); ++i) {
    if (f.singular_values(i) > cutoff)
      y.row(i) /= f.singular_values(i);
    else
      y.row(i).setZero();
  }
  return f.v * y;
}

double projection_residual(const Matrix& ensemble, std::span<const Index> subset) {
  require_finite(ensemble, "ensemble");
  check_subset(ensemble, subset);
  if (subset.empty()) return ensemble.squaredNorm();
  Matrix basis(ensemble.rows(), static_cast<Index>(subset.size()));
  for (Index k = 0; k < basis.cols(); ++k) basis.col(k) = ensemble.col(subset[k]);
  const Matrix coeffs = least_squares(basis, ensemble);
  return (ensemble - basis * coeffs).squaredNorm();
}

double rank_k_error(const Matrix& ensemble, Index k) {
  const Index r = std::min(ensemble.rows(), ensemble.cols());
  if (k < 1 || k > r)
    throw std::invalid_argument("rank k must lie in [1, " + std::to_string(r) + "]");
  const SvdFactors f = svd(ensemble);
  double tail = 0.0;
  for (Index i = k; i < f.singular_values.size(); ++i)
    tail += f.singular_values(i) * f.singular_values(i);
  return tail;
}

double mixed_norm_21(const Matrix& m) {
  double total = 0.0;
  for (Index j = 0; j < m.cols(); ++j) total += m.col(j).norm();
  return total;
}

}  // namespace mfalloc
