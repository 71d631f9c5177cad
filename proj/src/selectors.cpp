#include "mfalloc/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mfalloc/rng.hpp"

namespace mfalloc {

namespace {

// Shared floor for "numerically nothing left": greedy scores at or below
// this end selection with exhausted_rank.
constexpr double kRankFloor = 1e-12;

void check_target(Index m, Index n) {
  if (m < 1 || m > n)
    throw std::invalid_argument("subset size must lie in [1, " + std::to_string(n) + "]");
}

Matrix columns_at(const Matrix& a, const IndexList& idx) {
  Matrix out(a.rows(), static_cast<Index>(idx.size()));
  for (Index k = 0; k < out.cols(); ++k) out.col(k) = a.col(idx[k]);
  return out;
}

}  // namespace

const char* method_label(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::gomp: return "gomp";
    case SelectionMethod::cholesky: return "chol";
    case SelectionMethod::qr: return "qr";
    case SelectionMethod::lu: return "lu";
    case SelectionMethod::leverage: return "lev";
    case SelectionMethod::random: return "rand";
  }
  return "?";
}

SelectionMethod parse_method(const std::string& name) {
  if (name == "gomp") return SelectionMethod::gomp;
  if (name == "chol" || name == "cholesky") return SelectionMethod::cholesky;
  if (name == "qr") return SelectionMethod::qr;
  if (name == "lu") return SelectionMethod::lu;
  if (name == "lev" || name == "leverage") return SelectionMethod::leverage;
  if (name == "rand" || name == "random") return SelectionMethod::random;
  throw std::invalid_argument("unknown selection method '" + name +
                              "' (valid: rand, lev, qr, chol, lu, gomp)");
}

const char* termination_label(Termination t) {
  switch (t) {
    case Termination::reached_target: return "reached_target";
    case Termination::epsilon_stop: return "epsilon_stop";
    case Termination::lambda_stop: return "lambda_stop";
    case Termination::exhausted_rank: return "exhausted_rank";
  }
  return "?";
}

SelectionResult select_gomp(const GramMatrix& q, const SelectorConfig& cfg) {
  const Matrix& Q = q.matrix();
  const Index n = q.dim();
  check_target(cfg.target_size, n);
  if (cfg.gomp_epsilon < 0.0)
    throw std::invalid_argument("gomp epsilon must be nonnegative");
  if (cfg.gomp_lambda && !(*cfg.gomp_lambda > 0.0))
    throw std::invalid_argument("gomp lambda must be positive when bounded");

  SelectionResult res;
  Matrix coeffs(0, n);  // rows follow res.ordered_indices
  std::vector<char> active(static_cast<size_t>(n), 0);

  for (;;) {
    if (cfg.gomp_lambda) {
      const double used = coeffs.rows() == 0 ? 0.0 : coeffs.rowwise().norm().sum();
      if (used >= 1.0 / *cfg.gomp_lambda) {
        res.termination = Termination::lambda_stop;
        break;
      }
    }
    if (static_cast<Index>(res.ordered_indices.size()) >= cfg.target_size) {
      res.termination = Termination::reached_target;
      break;
    }

    Matrix residual = Q;
    if (!res.ordered_indices.empty())
      residual.noalias() -= columns_at(Q, res.ordered_indices) * coeffs;

    double best = -1.0;
    Index best_i = -1;
    for (Index i = 0; i < n; ++i) {
      if (active[static_cast<size_t>(i)]) continue;
      const double c = residual.col(i).norm();
      if (c > best) {
        best = c;
        best_i = i;
      }
    }
    if (best_i < 0 || best <= kRankFloor) {
      res.termination = Termination::exhausted_rank;
      break;
    }
    if (best <= cfg.gomp_epsilon) {
      res.termination = Termination::epsilon_stop;
      break;
    }

    active[static_cast<size_t>(best_i)] = 1;
    res.ordered_indices.push_back(best_i);
    res.step_scores.push_back(best);

    const Index k = static_cast<Index>(res.ordered_indices.size());
    Matrix q_aa(k, k), q_arows(k, n);
    for (Index r = 0; r < k; ++r) {
      q_arows.row(r) = Q.row(res.ordered_indices[static_cast<size_t>(r)]);
      for (Index c = 0; c < k; ++c)
        q_aa(r, c) = Q(res.ordered_indices[static_cast<size_t>(r)],
                       res.ordered_indices[static_cast<size_t>(c)]);
    }
    coeffs = least_squares(q_aa, q_arows);
  }

  res.coefficient_matrix = std::move(coeffs);
  return res;
}

SelectionResult select_pivoted_cholesky(const GramMatrix& q, Index m) {
  const Matrix& Q = q.matrix();
  const Index n = q.dim();
  check_target(m, n);

  SelectionResult res;
  Vector diag = Q.diagonal();
  Matrix chol(n, m);
  Index used = 0;
  std::vector<char> selected(static_cast<size_t>(n), 0);

  while (used < m) {
    double best = -1.0;
    Index best_i = -1;
    for (Index i = 0; i < n; ++i) {
      if (selected[static_cast<size_t>(i)]) continue;
      if (diag(i) > best) {
        best = diag(i);
        best_i = i;
      }
    }
    if (best_i < 0 || best < kRankFloor) {
      res.termination = Termination::exhausted_rank;
      return res;
    }

    Vector col = Q.col(best_i);
    if (used > 0)
      col.noalias() -= chol.leftCols(used) * chol.row(best_i).head(used).transpose();
    col /= std::sqrt(best);
    chol.col(used) = col;
    ++used;

    selected[static_cast<size_t>(best_i)] = 1;
    res.ordered_indices.push_back(best_i);
    res.step_scores.push_back(best);

    for (Index i = 0; i < n; ++i)
      if (!selected[static_cast<size_t>(i)]) diag(i) -= col(i) * col(i);
  }
  res.termination = Termination::reached_target;
  return res;
}

SelectionResult select_pivoted_qr(const Matrix& ensemble, Index m) {
  require_finite(ensemble, "ensemble");
  const Index n = ensemble.cols();
  check_target(m, n);

  SelectionResult res;
  Matrix residual = ensemble;
  std::vector<char> selected(static_cast<size_t>(n), 0);

  for (Index step = 0; step < m; ++step) {
    double best = -1.0;
    Index best_i = -1;
    for (Index i = 0; i < n; ++i) {
      if (selected[static_cast<size_t>(i)]) continue;
      const double nrm = residual.col(i).norm();
      if (nrm > best) {
        best = nrm;
        best_i = i;
      }
    }
    if (best_i < 0 || best < kRankFloor) {
      res.termination = Termination::exhausted_rank;
      return res;
    }

    const Vector q = residual.col(best_i) / best;
    selected[static_cast<size_t>(best_i)] = 1;
    res.ordered_indices.push_back(best_i);
    res.step_scores.push_back(best);

    for (Index i = 0; i < n; ++i) {
      if (selected[static_cast<size_t>(i)]) continue;
      residual.col(i) -= q * q.dot(residual.col(i));
    }
    residual.col(best_i).setZero();
  }
  res.termination = Termination::reached_target;
  return res;
}

SelectionResult select_pivoted_lu(const Matrix& ensemble, Index m) {
  require_finite(ensemble, "ensemble");
  const Index n = ensemble.cols();
  check_target(m, n);

  SelectionResult res;
  std::vector<char> selected(static_cast<size_t>(n), 0);

  for (Index step = 0; step < m; ++step) {
    Matrix residual;
    if (res.ordered_indices.empty()) {
      residual = ensemble;
    } else {
      const Matrix basis = columns_at(ensemble, res.ordered_indices);
      residual = ensemble - basis * least_squares(basis, ensemble);
    }

    double best = -1.0;
    Index best_col = -1;
    for (Index c = 0; c < n; ++c) {
      if (selected[static_cast<size_t>(c)]) continue;
      for (Index r = 0; r < ensemble.rows(); ++r) {
        const double v = std::abs(residual(r, c));
        if (v > best) {
          best = v;
          best_col = c;
        }
      }
    }
    if (best_col < 0 || best < kRankFloor) {
      res.termination = Termination::exhausted_rank;
      return res;
    }
    selected[static_cast<size_t>(best_col)] = 1;
    res.ordered_indices.push_back(best_col);
    res.step_scores.push_back(best);
  }
  res.termination = Termination::reached_target;
  return res;
}

SelectionResult select_leverage(const Matrix& ensemble, Index m, Index k) {
  require_finite(ensemble, "ensemble");
  const Index n = ensemble.cols();
  check_target(m, n);
  const Index max_rank = std::min(ensemble.rows(), ensemble.cols());
  if (k < 1 || k > max_rank)
    throw std::invalid_argument("leverage rank must lie in [1, " +
                                std::to_string(max_rank) + "]");

  const SvdFactors f = svd(ensemble);
  std::vector<double> scores(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i)
    scores[static_cast<size_t>(i)] = f.v.row(i).head(k).squaredNorm();

  IndexList order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
  });

  SelectionResult res;
  for (Index r = 0; r < m; ++r) {
    res.ordered_indices.push_back(order[static_cast<size_t>(r)]);
    res.step_scores.push_back(scores[static_cast<size_t>(order[static_cast<size_t>(r)])]);
  }
  res.termination = Termination::reached_target;
  return res;
}

SelectionResult select_random(Index n, Index m, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("candidate count must be positive");
  check_target(m, n);

  IndexList pool(static_cast<size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  SplitMix64 rng(seed);
  SelectionResult res;
  for (Index i = 0; i < m; ++i) {
    const auto j = static_cast<size_t>(i) +
                   static_cast<size_t>(rng.bounded(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<size_t>(i)], pool[j]);
    res.ordered_indices.push_back(pool[static_cast<size_t>(i)]);
    res.step_scores.push_back(0.0);
  }
  res.termination = Termination::reached_target;
  return res;
}

SelectionResult select(const Matrix& ensemble, const SelectorConfig& cfg) {
  require_finite(ensemble, "ensemble");
  const Index n = ensemble.cols();
  check_target(cfg.target_size, n);

  Matrix work = ensemble;
  if (cfg.normalize_columns) {
    for (Index j = 0; j < n; ++j) {
      const double nrm = work.col(j).norm();
      if (nrm > 0.0) work.col(j) /= nrm;
    }
  }

  switch (cfg.method) {
    case SelectionMethod::gomp:
      return select_gomp(gram(work), cfg);
    case SelectionMethod::cholesky:
      return select_pivoted_cholesky(gram(work), cfg.target_size);
    case SelectionMethod::qr:
      return select_pivoted_qr(work, cfg.target_size);
    case SelectionMethod::lu:
      return select_pivoted_lu(work, cfg.target_size);
    case SelectionMethod::leverage: {
      Index k = cfg.leverage_rank;
      if (k == 0) k = std::min({cfg.target_size, work.rows(), work.cols()});
      return select_leverage(work, cfg.target_size, k);
    }
    case SelectionMethod::random:
      return select_random(n, cfg.target_size, cfg.rng_seed);
  }
  throw std::logic_error("unreachable selection method");
}

double group_lasso_objective(const Matrix& ensemble, const Matrix& b, double lambda) {
  if (b.rows() != ensemble.cols() || b.cols() != ensemble.cols())
    throw std::invalid_argument("coefficient matrix must be cols x cols");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  return (ensemble - ensemble * b).squaredNorm() + lambda * mixed_norm_21(b.transpose());
}

}  // namespace mfalloc
