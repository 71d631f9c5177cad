#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "mfalloc/models.hpp"
#include "mfalloc/selectors.hpp"
#include "test_util.hpp"

using namespace mfalloc;
using mfalloc::testing::axes_and_bisector;
using mfalloc::testing::random_matrix;
using mfalloc::testing::unit_columns;

namespace {

SelectorConfig cfg_for(SelectionMethod method, Index m) {
  SelectorConfig cfg;
  cfg.method = method;
  cfg.target_size = m;
  return cfg;
}

const SelectionMethod kDeterministic[] = {
    SelectionMethod::gomp, SelectionMethod::cholesky, SelectionMethod::qr,
    SelectionMethod::lu, SelectionMethod::leverage};

}  // namespace

TEST_SUITE("selectors") {

TEST_CASE("labels and parsing round-trip; bad names list the valid set") {
  for (SelectionMethod m : {SelectionMethod::gomp, SelectionMethod::cholesky,
                            SelectionMethod::qr, SelectionMethod::lu,
                            SelectionMethod::leverage, SelectionMethod::random})
    CHECK(parse_method(method_label(m)) == m);
  CHECK(parse_method("cholesky") == SelectionMethod::cholesky);
  try {
    parse_method("qrcp");
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("rand, lev, qr, chol, lu, gomp") != std::string::npos);
  }
}

TEST_CASE("gomp first pick on the axes-plus-bisector ensemble") {
  // Correlation column norms are sqrt(1.5), sqrt(1.5), sqrt(2): the
  // bisector wins with score sqrt(2).
  const GramMatrix q = gram(axes_and_bisector());
  const SelectionResult r = select_gomp(q, cfg_for(SelectionMethod::gomp, 1));
  REQUIRE(r.ordered_indices.size() == 1);
  CHECK(r.ordered_indices[0] == 2);
  CHECK(r.step_scores[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(r.termination == Termination::reached_target);
  REQUIRE(r.coefficient_matrix.has_value());
  CHECK(r.coefficient_matrix->rows() == 1);
  CHECK(r.coefficient_matrix->cols() == 3);
}

TEST_CASE("gomp exhausts rank on the axes-plus-bisector ensemble") {
  // Rank is two: the second step ties between the axes (smaller index
  // wins) and the third finds a numerically zero residual.
  const GramMatrix q = gram(axes_and_bisector());
  const SelectionResult r = select_gomp(q, cfg_for(SelectionMethod::gomp, 3));
  REQUIRE(r.ordered_indices.size() == 2);
  CHECK(r.ordered_indices[0] == 2);
  CHECK(r.ordered_indices[1] == 0);
  CHECK(r.termination == Termination::exhausted_rank);
}

TEST_CASE("gomp coefficients satisfy the active normal equations") {
  const Matrix a = random_matrix(8, 12, 101);
  const GramMatrix q = gram(a);
  const SelectionResult r = select_gomp(q, cfg_for(SelectionMethod::gomp, 5));
  REQUIRE(r.coefficient_matrix.has_value());
  const Matrix& b = *r.coefficient_matrix;
  const Index k = static_cast<Index>(r.ordered_indices.size());
  Matrix q_aa(k, k), q_rows(k, 12);
  for (Index i = 0; i < k; ++i) {
    q_rows.row(i) = q.matrix().row(r.ordered_indices[i]);
    for (Index j = 0; j < k; ++j)
      q_aa(i, j) = q.matrix()(r.ordered_indices[i], r.ordered_indices[j]);
  }
  CHECK((q_aa * b - q_rows).norm() <= 1e-8 * q.matrix().norm());
}

TEST_CASE("gomp epsilon stops once correlations fall to the noise floor") {
  const RecoveryInstance inst =
      synthetic_recovery_instance(8, 3, 12, 0.7, 1e-5, 7);
  SelectorConfig cfg = cfg_for(SelectionMethod::gomp, 12);
  cfg.gomp_epsilon = 1e-2;
  const SelectionResult r = select_gomp(gram(inst.ensemble), cfg);
  CHECK(r.termination == Termination::epsilon_stop);
  CHECK(IndexList(r.ordered_indices.begin(), r.ordered_indices.end()).size() == 3);
  IndexList got = r.ordered_indices;
  std::sort(got.begin(), got.end());
  CHECK(got == inst.basis_indices);
}

TEST_CASE("gomp lambda budget stops the loop") {
  const GramMatrix q = gram(random_matrix(6, 10, 111));
  SelectorConfig cfg = cfg_for(SelectionMethod::gomp, 10);
  cfg.gomp_lambda = 1e6;  // budget 1/lambda is tiny: one pick then stop
  const SelectionResult r = select_gomp(q, cfg);
  CHECK(r.termination == Termination::lambda_stop);
  CHECK(r.ordered_indices.size() == 1);

  cfg.gomp_lambda.reset();  // unbounded never stops on the budget
  const SelectionResult full = select_gomp(q, cfg);
  CHECK(full.termination != Termination::lambda_stop);

  cfg.gomp_lambda = -1.0;
  CHECK_THROWS_AS(select_gomp(q, cfg), std::invalid_argument);
}

TEST_CASE("pivoted cholesky worked example with a dominant diagonal") {
  Matrix q(3, 3);
  q << 1.0, 0.2, 0.0,
       0.2, 4.0, 0.1,
       0.0, 0.1, 2.0;
  const SelectionResult r = select_pivoted_cholesky(GramMatrix(q), 2);
  REQUIRE(r.ordered_indices.size() == 2);
  CHECK(r.ordered_indices[0] == 1);
  CHECK(r.ordered_indices[1] == 2);
  CHECK(r.step_scores[0] == doctest::Approx(4.0));
  // Schur complement diagonal after eliminating column 1: 2 - 0.01/4.
  CHECK(r.step_scores[1] == doctest::Approx(2.0 - 0.01 / 4.0).epsilon(1e-12));
}

TEST_CASE("cholesky ties break toward the smaller index") {
  const SelectionResult r =
      select_pivoted_cholesky(gram(axes_and_bisector()), 1);
  CHECK(r.ordered_indices[0] == 0);  // all diagonals equal 1
}

TEST_CASE("pivoted qr picks by residual column norm") {
  const Matrix a = axes_and_bisector();
  const SelectionResult r = select_pivoted_qr(a, 2);
  REQUIRE(r.ordered_indices.size() == 2);
  CHECK(r.ordered_indices[0] == 0);  // unit norms tie, smallest index
  CHECK(r.ordered_indices[1] == 1);  // residual norms 1 vs 1/sqrt(2)
  CHECK(r.step_scores[1] == doctest::Approx(1.0));
}

TEST_CASE("qr and cholesky stop early on an exactly rank-deficient ensemble") {
  Matrix a = random_matrix(5, 3, 121);
  Matrix wide(5, 6);
  wide << a, a;  // rank three, six columns
  const SelectionResult rq = select_pivoted_qr(wide, 5);
  CHECK(rq.termination == Termination::exhausted_rank);
  CHECK(rq.ordered_indices.size() == 3);
  const SelectionResult rc = select_pivoted_cholesky(gram(wide), 5);
  CHECK(rc.termination == Termination::exhausted_rank);
  CHECK(rc.ordered_indices.size() == 3);
}

TEST_CASE("pivoted lu picks the largest residual entry") {
  Matrix a(2, 3);
  a << 0.5, 0.0, 3.0,
       0.0, 2.0, 0.0;
  const SelectionResult r = select_pivoted_lu(a, 2);
  REQUIRE(r.ordered_indices.size() == 2);
  CHECK(r.ordered_indices[0] == 2);  // |3.0| is the largest entry
  CHECK(r.step_scores[0] == doctest::Approx(3.0));
  CHECK(r.ordered_indices[1] == 1);  // residual leaves |2.0| in column 1
  CHECK(r.step_scores[1] == doctest::Approx(2.0));
}

TEST_CASE("leverage worked scores on the axes-plus-bisector ensemble") {
  const Matrix a = axes_and_bisector();
  const SelectionResult r = select_leverage(a, 3, 1);
  // Top right-singular-vector weights: (0.25, 0.25, 0.5).
  REQUIRE(r.ordered_indices.size() == 3);
  CHECK(r.ordered_indices[0] == 2);
  CHECK(r.ordered_indices[1] == 0);  // tie between the axes
  CHECK(r.ordered_indices[2] == 1);
  CHECK(r.step_scores[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.step_scores[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(select_leverage(a, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(select_leverage(a, 2, 0), std::invalid_argument);
}

TEST_CASE("leverage scores for the full rank sum to the subset count") {
  const Matrix a = random_matrix(4, 7, 131);
  const SelectionResult r = select_leverage(a, 7, 4);
  double total = 0.0;
  for (double s : r.step_scores) total += s;
  CHECK(total == doctest::Approx(4.0).epsilon(1e-10));  // ||V||_F^2 = k
}

TEST_CASE("random selection is seed-deterministic and well spread") {
  const SelectionResult a = select_random(30, 5, 99);
  const SelectionResult b = select_random(30, 5, 99);
  CHECK(a.ordered_indices == b.ordered_indices);
  CHECK(a.termination == Termination::reached_target);
  std::set<Index> distinct(a.ordered_indices.begin(), a.ordered_indices.end());
  CHECK(distinct.size() == 5);

  // Frequency check: 10,000 seeds, n = 5, m = 1; each index lands within
  // three binomial standard deviations of 2,000.
  std::vector<int> counts(5, 0);
  for (std::uint64_t seed = 0; seed < 10000; ++seed)
    counts[static_cast<size_t>(select_random(5, 1, seed).ordered_indices[0])]++;
  for (int c : counts) {
    CHECK(c >= 1880);
    CHECK(c <= 2120);
  }
}

TEST_CASE("every selector validates the subset size") {
  const Matrix a = random_matrix(4, 6, 141);
  for (SelectionMethod m : kDeterministic) {
    CHECK_THROWS_AS(select(a, cfg_for(m, 0)), std::invalid_argument);
    CHECK_THROWS_AS(select(a, cfg_for(m, 7)), std::invalid_argument);
  }
  CHECK_THROWS_AS(select_random(6, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(select_random(6, 7, 1), std::invalid_argument);
}

TEST_CASE("selected indices are distinct and in range for all methods") {
  const Matrix a = random_matrix(6, 11, 151);
  for (SelectionMethod m : kDeterministic) {
    const SelectionResult r = select(a, cfg_for(m, 6));
    std::set<Index> distinct(r.ordered_indices.begin(), r.ordered_indices.end());
    CHECK(distinct.size() == r.ordered_indices.size());
    CHECK(static_cast<Index>(r.ordered_indices.size()) <= 6);
    for (Index j : r.ordered_indices) {
      CHECK(j >= 0);
      CHECK(j < 11);
    }
    CHECK(r.step_scores.size() == r.ordered_indices.size());
  }
}

TEST_CASE("greedy residuals never increase along the selection order") {
  const Matrix a = random_matrix(8, 15, 161);
  for (SelectionMethod m :
       {SelectionMethod::gomp, SelectionMethod::cholesky, SelectionMethod::qr,
        SelectionMethod::lu}) {
    const SelectionResult r = select(a, cfg_for(m, 8));
    double prev = a.squaredNorm();
    IndexList prefix;
    for (Index j : r.ordered_indices) {
      prefix.push_back(j);
      const double cur = projection_residual(a, prefix);
      CHECK(cur <= prev + 1e-9);
      prev = cur;
    }
  }
}

TEST_CASE("selections are equivariant under column permutation") {
  const Matrix a = random_matrix(6, 10, 171);
  std::vector<Index> perm{3, 7, 1, 9, 0, 4, 8, 2, 6, 5};
  Matrix shuffled(6, 10);
  for (Index j = 0; j < 10; ++j) shuffled.col(j) = a.col(perm[static_cast<size_t>(j)]);
  for (SelectionMethod m : kDeterministic) {
    const SelectionResult base = select(a, cfg_for(m, 4));
    const SelectionResult moved = select(shuffled, cfg_for(m, 4));
    REQUIRE(base.ordered_indices.size() == moved.ordered_indices.size());
    for (size_t s = 0; s < base.ordered_indices.size(); ++s)
      CHECK(perm[static_cast<size_t>(moved.ordered_indices[s])] ==
            base.ordered_indices[s]);
  }
}

TEST_CASE("selections are invariant under global scaling") {
  const Matrix a = random_matrix(5, 9, 181);
  const Matrix scaled = 2.5 * a;
  for (SelectionMethod m : kDeterministic) {
    const SelectionResult base = select(a, cfg_for(m, 4));
    const SelectionResult big = select(scaled, cfg_for(m, 4));
    CHECK(base.ordered_indices == big.ordered_indices);
  }
}

TEST_CASE("gram-based selectors agree for ensembles with equal gram matrices") {
  const Matrix a = random_matrix(7, 9, 191);
  // Re-express the same inner products through an orthonormal rotation.
  const Matrix g = random_matrix(7, 7, 192);
  const Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix rot = qr.householderQ();
  const Matrix rotated = rot * a;
  for (SelectionMethod m : {SelectionMethod::gomp, SelectionMethod::cholesky}) {
    const SelectionResult base = select(a, cfg_for(m, 4));
    const SelectionResult other = select(rotated, cfg_for(m, 4));
    CHECK(base.ordered_indices == other.ordered_indices);
  }
}

TEST_CASE("column normalization can change the winner") {
  Matrix a(3, 3);
  a << 0.1 / std::sqrt(2.0), 2.0, 0.0,
       0.1 / std::sqrt(2.0), 0.0, 2.0,
       0.0,                  0.0, 0.0;
  SelectorConfig cfg = cfg_for(SelectionMethod::gomp, 1);
  CHECK(select(a, cfg).ordered_indices[0] != 0);  // raw norms favor 1 or 2
  cfg.normalize_columns = true;
  CHECK(select(a, cfg).ordered_indices[0] == 0);  // the hub wins once unit
}

TEST_CASE("group lasso objective worked values") {
  const Matrix a = axes_and_bisector();
  const Matrix zero = Matrix::Zero(3, 3);
  CHECK(group_lasso_objective(a, zero, 0.5) == doctest::Approx(3.0));
  const Matrix eye = Matrix::Identity(3, 3);
  CHECK(group_lasso_objective(a, eye, 0.5) == doctest::Approx(1.5));
  CHECK_THROWS_AS(group_lasso_objective(a, Matrix::Zero(2, 3), 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(group_lasso_objective(a, zero, -1.0), std::invalid_argument);
}

TEST_CASE("gomp coefficients drive the lasso objective below the zero guess") {
  const Matrix a = unit_columns(random_matrix(6, 10, 201));
  SelectorConfig cfg = cfg_for(SelectionMethod::gomp, 4);
  const SelectionResult r = select_gomp(gram(a), cfg);
  REQUIRE(r.coefficient_matrix.has_value());
  Matrix b = Matrix::Zero(10, 10);
  for (size_t k = 0; k < r.ordered_indices.size(); ++k)
    b.row(r.ordered_indices[k]) = r.coefficient_matrix->row(static_cast<Index>(k));
  const double lambda = 1e-3;
  CHECK(group_lasso_objective(a, b, lambda) <
        group_lasso_objective(a, Matrix::Zero(10, 10), lambda));
}

}  // TEST_SUITE
