#include "mfalloc/theory.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace mfalloc {

namespace {

IndexList checked_sorted_basis(const Matrix& ensemble, std::span<const Index> basis) {
  if (basis.empty()) throw std::invalid_argument("basis index list is empty");
  std::unordered_set<Index> seen;
  IndexList sorted;
  sorted.reserve(basis.size());
  for (Index j : basis) {
    if (j < 0 || j >= ensemble.cols())
      throw std::invalid_argument("basis index " + std::to_string(j) + " out of range");
    if (!seen.insert(j).second)
      throw std::invalid_argument("duplicate basis index " + std::to_string(j));
    sorted.push_back(j);
  }
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

Matrix basis_columns(const Matrix& ensemble, const IndexList& sorted) {
  Matrix out(ensemble.rows(), static_cast<Index>(sorted.size()));
  for (Index k = 0; k < out.cols(); ++k) out.col(k) = ensemble.col(sorted[static_cast<size_t>(k)]);
  return out;
}

}  // namespace

Matrix expansion_matrix(const Matrix& ensemble, std::span<const Index> basis) {
  require_finite(ensemble, "ensemble");
  const IndexList sorted = checked_sorted_basis(ensemble, basis);
  const Matrix a_s = basis_columns(ensemble, sorted);

  const SvdFactors f = svd(a_s);
  const double smax = f.singular_values.size() ? f.singular_values(0) : 0.0;
  const double smin = f.singular_values.size()
                          ? f.singular_values(f.singular_values.size() - 1)
                          : 0.0;
  if (static_cast<Index>(sorted.size()) > a_s.rows() || !(smin > 1e-10 * smax))
    throw std::invalid_argument("basis columns are numerically rank deficient");

  std::vector<char> in_basis(static_cast<size_t>(ensemble.cols()), 0);
  for (Index j : sorted) in_basis[static_cast<size_t>(j)] = 1;

  Matrix rest(ensemble.rows(), ensemble.cols() - static_cast<Index>(sorted.size()));
  Index c = 0;
  for (Index j = 0; j < ensemble.cols(); ++j)
    if (!in_basis[static_cast<size_t>(j)]) rest.col(c++) = ensemble.col(j);

  return least_squares(a_s, rest);
}

double consistency_bound(const Matrix& expansion) {
  double worst = 0.0;
  for (Index j = 0; j < expansion.cols(); ++j)
    worst = std::max(worst, expansion.col(j).lpNorm<1>());
  return worst;
}

double lambda_min(const Matrix& ensemble, std::span<const Index> basis) {
  require_finite(ensemble, "ensemble");
  const IndexList sorted = checked_sorted_basis(ensemble, basis);
  const Matrix a_s = basis_columns(ensemble, sorted);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a_s.transpose() * a_s, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().minCoeff());
}

std::string RecoveryDiagnostics::to_json() const {
  nlohmann::ordered_json j;
  j["consistency_bound"] = consistency_bound;
  j["basis_min_eigenvalue"] = basis_min_eigenvalue;
  j["epsilon_threshold"] = epsilon_threshold;
  j["min_row_mass"] = min_row_mass;
  j["consistency_ok"] = consistency_ok;
  j["row_mass_ok"] = row_mass_ok;
  j["all_ok"] = all_ok();
  return j.dump();
}

RecoveryDiagnostics noisy_thresholds(const Matrix& expansion, double sigma,
                                     double eta, Index n, Index dim, double lambda) {
  if (sigma < 0.0) throw std::invalid_argument("noise sigma must be nonnegative");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  if (n < 1 || dim < 1) throw std::invalid_argument("ensemble dimensions must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("basis Gram eigenvalue must be positive");

  RecoveryDiagnostics diag;
  diag.consistency_bound = mfalloc::consistency_bound(expansion);
  diag.basis_min_eigenvalue = lambda;
  diag.consistency_ok = diag.consistency_bound < 1.0;

  const double nd = static_cast<double>(n) * static_cast<double>(dim);
  const double tail = sigma * std::sqrt(2.0 * nd * std::log(2.0 * nd / eta));
  diag.epsilon_threshold = diag.consistency_ok
                               ? tail / (1.0 - diag.consistency_bound)
                               : std::numeric_limits<double>::infinity();

  diag.min_row_mass = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < expansion.rows(); ++i)
    diag.min_row_mass = std::min(diag.min_row_mass, expansion.row(i).norm());
  if (expansion.rows() == 0) diag.min_row_mass = 0.0;

  diag.row_mass_ok =
      diag.min_row_mass > diag.epsilon_threshold * std::sqrt(8.0) / lambda;
  return diag;
}

CsspOptimum brute_force_cssp(const Matrix& ensemble, Index m) {
  const Index n = ensemble.cols();
  if (m < 1 || m > n)
    throw std::invalid_argument("subset size must lie in [1, " + std::to_string(n) + "]");

  // C(n, m) computed through the symmetric arm so partial products are
  // monotone; anything past 1e6 subsets is refused.
  const Index k = std::min(m, n - m);
  double count = 1.0;
  for (Index i = 0; i < k; ++i) {
    count = count * static_cast<double>(n - i) / static_cast<double>(i + 1);
    if (count > 1e6)
      throw std::invalid_argument("C(n, m) exceeds the 1e6 enumeration guard");
  }

  IndexList comb(static_cast<size_t>(m));
  std::iota(comb.begin(), comb.end(), Index{0});

  CsspOptimum best;
  best.residual = std::numeric_limits<double>::infinity();
  for (;;) {
    const double r = projection_residual(ensemble, comb);
    // Strict improvement keeps the lexicographically smallest tie winner.
    if (r < best.residual) {
      best.residual = r;
      best.subset = comb;
    }
    Index i = m - 1;
    while (i >= 0 && comb[static_cast<size_t>(i)] == n - m + i) --i;
    if (i < 0) break;
    ++comb[static_cast<size_t>(i)];
    for (Index j = i + 1; j < m; ++j)
      comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
  }
  return best;
}

}  // namespace mfalloc
