#include "mfalloc/bifidelity.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

namespace mfalloc {

namespace {

std::string format_double(double v) {
  char buf[40];
  const auto out = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, out.ptr);
}

Matrix columns_at(const Matrix& a, const IndexList& idx) {
  Matrix out(a.rows(), static_cast<Index>(idx.size()));
  for (Index k = 0; k < out.cols(); ++k) out.col(k) = a.col(idx[k]);
  return out;
}

void check_aligned(const Ensemble& low, const Ensemble& high) {
  low.validate();
  high.validate();
  if (low.cols() != high.cols())
    throw std::invalid_argument("low and high ensembles have different column counts");
  for (size_t j = 0; j < low.parameters.size(); ++j)
    if (low.parameters[j] != high.parameters[j])
      throw std::invalid_argument("low and high ensembles disagree at parameter " +
                                  std::to_string(j));
}

// Relative squared error over the masked columns; an empty evaluation set
// is defined as zero error (nothing left to predict).
double masked_error(const Matrix& truth, const Matrix& pred,
                    const std::vector<char>& skip) {
  double num = 0.0, den = 0.0;
  Index counted = 0;
  for (Index j = 0; j < truth.cols(); ++j) {
    if (skip[static_cast<size_t>(j)]) continue;
    num += (truth.col(j) - pred.col(j)).squaredNorm();
    den += truth.col(j).squaredNorm();
    ++counted;
  }
  if (counted == 0) return 0.0;
  if (den == 0.0) throw std::invalid_argument("evaluation columns are identically zero");
  return num / den;
}

}  // namespace

void Ensemble::validate() const {
  if (snapshots.cols() != static_cast<Index>(parameters.size()))
    throw std::invalid_argument("ensemble has " + std::to_string(snapshots.cols()) +
                                " snapshot columns but " + std::to_string(parameters.size()) +
                                " parameter vectors");
  if (!parameters.empty()) {
    const Index dim = parameters.front().size();
    if (dim < 1) throw std::invalid_argument("parameter vectors must be non-empty");
    for (const Vector& p : parameters) {
      if (p.size() != dim)
        throw std::invalid_argument("parameter vectors have inconsistent dimensions");
      if (!p.allFinite())
        throw std::invalid_argument("parameter vector has a non-finite entry");
    }
  }
  require_finite(snapshots, "ensemble snapshots");
}

BifidelityModel fit(const Ensemble& low, const Ensemble& high,
                    const SelectionResult& selection, const SelectorConfig& used) {
  check_aligned(low, high);
  if (selection.ordered_indices.empty())
    throw std::invalid_argument("selection is empty; nothing to fit");
  for (Index j : selection.ordered_indices)
    if (j < 0 || j >= low.cols())
      throw std::invalid_argument("selected index " + std::to_string(j) + " out of range");

  BifidelityModel model;
  model.selected_indices = selection.ordered_indices;
  model.low_basis = columns_at(low.snapshots, selection.ordered_indices);
  model.high_basis = columns_at(high.snapshots, selection.ordered_indices);
  model.selector_used = used;
  return model;
}

Vector coefficients(const BifidelityModel& model, const Vector& low_snapshot) {
  if (low_snapshot.size() != model.low_basis.rows())
    throw std::invalid_argument("snapshot length does not match the low-fidelity basis");
  return least_squares(model.low_basis, low_snapshot);
}

Vector reconstruct_high(const BifidelityModel& model, const Vector& coeffs) {
  if (coeffs.size() != model.high_basis.cols())
    throw std::invalid_argument("coefficient count does not match the basis size");
  return model.high_basis * coeffs;
}

double evaluate_error(const Matrix& truth, const Matrix& predictions) {
  if (truth.rows() != predictions.rows() || truth.cols() != predictions.cols())
    throw std::invalid_argument("truth and prediction shapes differ");
  require_finite(truth, "truth");
  require_finite(predictions, "predictions");
  const double den = truth.squaredNorm();
  if (den == 0.0) throw std::invalid_argument("truth ensemble is identically zero");
  return (truth - predictions).squaredNorm() / den;
}

std::string ErrorReport::to_csv() const {
  std::string out = "method,subset_size,low_error,high_error,seed\n";
  for (const ErrorRecord& r : rows) {
    out += r.method;
    out += ',';
    out += std::to_string(r.subset_size);
    out += ',';
    out += format_double(r.low_error);
    out += ',';
    out += format_double(r.high_error);
    out += ',';
    if (r.seed) out += std::to_string(*r.seed);
    out += '\n';
  }
  return out;
}

std::string ErrorReport::to_plot_table() const {
  // Preserve first-appearance method order; aggregate seeded rows.
  std::vector<std::string> methods;
  std::vector<bool> seeded;
  for (const ErrorRecord& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
      seeded.push_back(r.seed.has_value());
    }
  }
  std::vector<Index> sizes;
  for (const ErrorRecord& r : rows)
    if (std::find(sizes.begin(), sizes.end(), r.subset_size) == sizes.end())
      sizes.push_back(r.subset_size);
  std::sort(sizes.begin(), sizes.end());

  std::string out = "# subset_size";
  for (size_t mi = 0; mi < methods.size(); ++mi) {
    if (seeded[mi]) {
      for (const char* fid : {"low", "high"})
        for (const char* stat : {"mean", "min", "max"})
          out += " " + methods[mi] + "_" + fid + "_" + stat;
    } else {
      out += " " + methods[mi] + "_low " + methods[mi] + "_high";
    }
  }
  out += '\n';

  for (Index size : sizes) {
    out += std::to_string(size);
    for (size_t mi = 0; mi < methods.size(); ++mi) {
      double lo_sum = 0, hi_sum = 0;
      double lo_min = 0, lo_max = 0, hi_min = 0, hi_max = 0;
      Index count = 0;
      for (const ErrorRecord& r : rows) {
        if (r.method != methods[mi] || r.subset_size != size) continue;
        if (count == 0) {
          lo_min = lo_max = r.low_error;
          hi_min = hi_max = r.high_error;
        }
        lo_sum += r.low_error;
        hi_sum += r.high_error;
        lo_min = std::min(lo_min, r.low_error);
        lo_max = std::max(lo_max, r.low_error);
        hi_min = std::min(hi_min, r.high_error);
        hi_max = std::max(hi_max, r.high_error);
        ++count;
      }
      const double denom = count > 0 ? static_cast<double>(count) : 1.0;
      if (seeded[mi]) {
        for (double v : {lo_sum / denom, lo_min, lo_max, hi_sum / denom, hi_min, hi_max})
          out += ' ' + (count > 0 ? format_double(v) : std::string("nan"));
      } else {
        out += ' ' + (count > 0 ? format_double(lo_sum / denom) : std::string("nan"));
        out += ' ' + (count > 0 ? format_double(hi_sum / denom) : std::string("nan"));
      }
    }
    out += '\n';
  }
  return out;
}

ErrorReport sweep(const Ensemble& low, const Ensemble& high,
                  const std::vector<SelectorConfig>& methods,
                  const SweepOptions& options) {
  check_aligned(low, high);
  const Index n = low.cols();
  if (methods.empty()) throw std::invalid_argument("no selection methods given");
  if (options.sizes.empty()) throw std::invalid_argument("no subset sizes given");
  for (size_t i = 0; i < options.sizes.size(); ++i) {
    if (options.sizes[i] < 1 || options.sizes[i] > n)
      throw std::invalid_argument("subset sizes must lie in [1, " + std::to_string(n) + "]");
    if (i > 0 && options.sizes[i] <= options.sizes[i - 1])
      throw std::invalid_argument("subset sizes must be strictly increasing");
  }
  if (options.random_trials < 1)
    throw std::invalid_argument("random trial count must be positive");

  const Index max_size = options.sizes.back();

  // Phase 1: selections, sequential. Greedy orders are nested, so one
  // max-size run per greedy method serves every requested size.
  struct Cell {
    std::string method;
    Index size = 0;
    IndexList indices;
    std::optional<std::uint64_t> seed{};
  };
  std::vector<Cell> cells;

  for (const SelectorConfig& method_cfg : methods) {
    const std::string label = method_label(method_cfg.method);
    switch (method_cfg.method) {
      case SelectionMethod::gomp:
      case SelectionMethod::cholesky:
      case SelectionMethod::qr:
      case SelectionMethod::lu: {
        SelectorConfig run = method_cfg;
        run.target_size = max_size;
        const SelectionResult full = select(low.snapshots, run);
        for (Index size : options.sizes) {
          const auto take = std::min<size_t>(static_cast<size_t>(size),
                                             full.ordered_indices.size());
          cells.push_back({label, size,
                           IndexList(full.ordered_indices.begin(),
                                     full.ordered_indices.begin() + take),
                           std::nullopt});
        }
        break;
      }
      case SelectionMethod::leverage: {
        for (Index size : options.sizes) {
          SelectorConfig run = method_cfg;
          run.target_size = size;
          const SelectionResult sel = select(low.snapshots, run);
          cells.push_back({label, size, sel.ordered_indices, std::nullopt});
        }
        break;
      }
      case SelectionMethod::random: {
        for (Index size : options.sizes) {
          for (Index t = 0; t < options.random_trials; ++t) {
            const std::uint64_t seed =
                options.base_seed + static_cast<std::uint64_t>(t);
            const SelectionResult sel = select_random(n, size, seed);
            cells.push_back({label, size, sel.ordered_indices, seed});
          }
        }
        break;
      }
    }
  }

  // Phase 2: score cells concurrently. Every cell owns a distinct output
  // slot, so the report is identical for any worker count.
  ErrorReport report;
  report.rows.resize(cells.size());
  std::atomic<size_t> cursor{0};
  const int workers = std::max(1, options.workers);

  auto run_cells = [&]() {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      const Matrix basis_low = columns_at(low.snapshots, cell.indices);
      const Matrix basis_high = columns_at(high.snapshots, cell.indices);
      const Matrix coeff = least_squares(basis_low, low.snapshots);

      std::vector<char> skip(static_cast<size_t>(n), 0);
      if (options.held_out_only)
        for (Index j : cell.indices) skip[static_cast<size_t>(j)] = 1;

      ErrorRecord& row = report.rows[i];
      row.method = cell.method;
      row.subset_size = cell.size;
      row.seed = cell.seed;
      row.low_error = masked_error(low.snapshots, basis_low * coeff, skip);
      row.high_error = masked_error(high.snapshots, basis_high * coeff, skip);
    }
  };

  if (workers == 1) {
    run_cells();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_cells);
    for (std::thread& t : pool) t.join();
  }
  return report;
}

}  // namespace mfalloc
