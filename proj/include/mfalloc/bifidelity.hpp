#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfalloc/linalg.hpp"
#include "mfalloc/selectors.hpp"

namespace mfalloc {

// Snapshot collection for one model at one fidelity. Column j of
// `snapshots` is the state for parameter point `parameters[j]`.
struct Ensemble {
  Matrix snapshots;
  std::vector<Vector> parameters;
  std::string fidelity_label;  // "low" or "high"
  std::string model_id;

  Index rows() const { return snapshots.rows(); }
  Index cols() const { return snapshots.cols(); }
  // Checks column/parameter count agreement, consistent parameter
  // dimension >= 1 and finite entries; throws std::invalid_argument.
  void validate() const;
};

// Frozen surrogate: the selected columns at both fidelities plus the
// selection that produced them.
struct BifidelityModel {
  IndexList selected_indices;
  Matrix low_basis;   // low-fidelity snapshots at the selected points
  Matrix high_basis;  // high-fidelity snapshots at the same points
  SelectorConfig selector_used;
};

BifidelityModel fit(const Ensemble& low, const Ensemble& high,
                    const SelectionResult& selection, const SelectorConfig& used);

// Least-squares coefficients of one low-fidelity snapshot in the
// low-fidelity basis.
Vector coefficients(const BifidelityModel& model, const Vector& low_snapshot);

// Lifts coefficients through the high-fidelity basis.
Vector reconstruct_high(const BifidelityModel& model, const Vector& coeffs);

// Relative squared error sum_i ||truth_i - pred_i||^2 / sum_i ||truth_i||^2
// over columns. Shapes must match; an all-zero truth is rejected.
double evaluate_error(const Matrix& truth, const Matrix& predictions);
inline double evaluate_error(const Ensemble& truth, const Matrix& predictions) {
  return evaluate_error(truth.snapshots, predictions);
}

struct ErrorRecord {
  std::string method;
  Index subset_size = 0;
  double low_error = 0.0;
  double high_error = 0.0;
  std::optional<std::uint64_t> seed{};  // random trials only
};

struct ErrorReport {
  std::vector<ErrorRecord> rows;  // ordered method, then size, then seed

  // Header "method,subset_size,low_error,high_error,seed"; floats in
  // shortest round-trip form; missing seed prints as an empty field.
  std::string to_csv() const;

  // Whitespace table for plotting: one row per subset size, one column
  // per method and fidelity; random trials collapse to mean/min/max.
  std::string to_plot_table() const;
};

struct SweepOptions {
  IndexList sizes;                  // ascending, within [1, cols]
  Index random_trials = 100;        // seeds base_seed + 0 .. + trials-1
  std::uint64_t base_seed = 0;
  bool held_out_only = true;        // score only non-selected columns
  int workers = 1;
};

// Runs every method at every subset size (selection on the low-fidelity
// ensemble only) and scores reconstruction at both fidelities. Greedy
// methods run once at the largest size and reuse prefixes; leverage and
// random re-run per size; random repeats over `random_trials` seeds.
// Output is identical for any worker count.
ErrorReport sweep(const Ensemble& low, const Ensemble& high,
                  const std::vector<SelectorConfig>& methods,
                  const SweepOptions& options);

}  // namespace mfalloc
