#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mfalloc/linalg.hpp"

namespace mfalloc {

enum class SelectionMethod { gomp, cholesky, qr, lu, leverage, random };

// Short labels used in CSV/JSON output and on the command line.
const char* method_label(SelectionMethod m);
SelectionMethod parse_method(const std::string& name);  // throws listing valid names

enum class Termination {
  reached_target,  // collected m indices
  epsilon_stop,    // best residual correlation fell to epsilon or below
  lambda_stop,     // coefficient norm budget ||B^T||_{2,1} reached 1/lambda
  exhausted_rank   // nothing numerically nonzero left to pick
};

const char* termination_label(Termination t);

struct SelectorConfig {
  SelectionMethod method = SelectionMethod::gomp;
  Index target_size = 1;  // m, 1 <= m <= candidate count
  // Stopping weight for gomp; unset means unbounded (the budget check is
  // skipped and only m / epsilon can stop the loop).
  std::optional<double> gomp_lambda{};
  double gomp_epsilon = 0.0;
  // Rank for leverage scores; 0 means "default to min(m, rows, cols)".
  Index leverage_rank = 0;
  std::uint64_t rng_seed = 0;
  bool normalize_columns = false;
};

struct SelectionResult {
  IndexList ordered_indices;        // selection order, 0-based, distinct
  std::vector<double> step_scores;  // criterion value that won each step
  // gomp only: final coefficient rows, one per selected index (in
  // selection order), so B has coefficient_matrix->row(k) at
  // ordered_indices[k] and zeros elsewhere.
  std::optional<Matrix> coefficient_matrix{};
  Termination termination = Termination::reached_target;
};

// Greedy orthogonal matching pursuit on snapshot correlations. Each step
// scores candidate i by the 2-norm of column i of R = Q - Q B (columns,
// not rows: Q is symmetric but Q B is not), picks the largest (ties to
// the smallest index), then refits B on the active set by least squares.
SelectionResult select_gomp(const GramMatrix& q, const SelectorConfig& cfg);

// Outer-product pivoted Cholesky on the Gram matrix; each step picks the
// largest Schur-complement diagonal. Stops early below the 1e-12 floor.
SelectionResult select_pivoted_cholesky(const GramMatrix& q, Index m);

// Greedy column-pivoted QR on the snapshots; each step picks the column
// with the largest residual 2-norm after projecting out prior picks.
SelectionResult select_pivoted_qr(const Matrix& ensemble, Index m);

// Column selection by largest single residual entry magnitude; the
// residual is recomputed from scratch by projection each step.
SelectionResult select_pivoted_lu(const Matrix& ensemble, Index m);

// Deterministic leverage scores l_i = sum_{j<k} V(i,j)^2 from the top-k
// right singular vectors; takes the m largest, ties to smaller index.
SelectionResult select_leverage(const Matrix& ensemble, Index m, Index k);

// Uniform size-m subset of {0..n-1} without replacement (partial
// Fisher-Yates over SplitMix64); identical (seed,n,m) gives identical
// output on every platform.
SelectionResult select_random(Index n, Index m, std::uint64_t seed);

// Dispatcher: validates cfg against the ensemble shape, applies the
// column-normalization flag, and routes to the method above.
SelectionResult select(const Matrix& ensemble, const SelectorConfig& cfg);

// ||A - A B||_F^2 + lambda * sum_j ||row_j(B)||_2.
double group_lasso_objective(const Matrix& ensemble, const Matrix& b, double lambda);

}  // namespace mfalloc
