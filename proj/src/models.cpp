#include "mfalloc/models.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mfalloc/rng.hpp"

namespace mfalloc {

namespace {

double flux(double u) { return 0.5 * u * u; }

// Exact Riemann flux for the convex flux u^2/2: min of f over [a, b] when
// a <= b (zero if the interval straddles the sonic point), max otherwise.
double godunov_flux(double a, double b) {
  if (a <= b) {
    if (a <= 0.0 && 0.0 <= b) return 0.0;
    return std::min(flux(a), flux(b));
  }
  return std::max(flux(a), flux(b));
}

using State4 = Eigen::Vector4d;  // theta1, theta2, omega1, omega2

State4 pendulum_rhs_nonlinear(const PendulumSpec& p, const State4& y) {
  const double th1 = y(0), th2 = y(1), w1 = y(2), w2 = y(3);
  const double delta = th1 - th2;
  const double den = 2.0 * p.m1 + p.m2 - p.m2 * std::cos(2.0 * delta);
  State4 dy;
  dy(0) = w1;
  dy(1) = w2;
  dy(2) = (-p.g * (2.0 * p.m1 + p.m2) * std::sin(th1) -
           p.m2 * p.g * std::sin(th1 - 2.0 * th2) -
           2.0 * std::sin(delta) * p.m2 *
               (w2 * w2 * p.l2 + w1 * w1 * p.l1 * std::cos(delta))) /
          (p.l1 * den);
  dy(3) = (2.0 * std::sin(delta) *
           (w1 * w1 * p.l1 * (p.m1 + p.m2) + p.g * (p.m1 + p.m2) * std::cos(th1) +
            w2 * w2 * p.l2 * p.m2 * std::cos(delta))) /
          (p.l2 * den);
  return dy;
}

// Small-angle limit: M thdd + K th = 0 with the standard mass/stiffness
// pair; the 2x2 inverse is applied analytically.
State4 pendulum_rhs_linear(const PendulumSpec& p, const State4& y) {
  const double m11 = (p.m1 + p.m2) * p.l1 * p.l1;
  const double m12 = p.m2 * p.l1 * p.l2;
  const double m22 = p.m2 * p.l2 * p.l2;
  const double det = m11 * m22 - m12 * m12;
  const double k1 = (p.m1 + p.m2) * p.g * p.l1;
  const double k2 = p.m2 * p.g * p.l2;
  const double r1 = -k1 * y(0);
  const double r2 = -k2 * y(1);
  State4 dy;
  dy(0) = y(2);
  dy(1) = y(3);
  dy(2) = (m22 * r1 - m12 * r2) / det;
  dy(3) = (m11 * r2 - m12 * r1) / det;
  return dy;
}

std::string point_string(const Vector& p) {
  std::ostringstream os;
  os << '(';
  for (Index i = 0; i < p.size(); ++i) {
    if (i) os << ", ";
    os << p(i);
  }
  os << ')';
  return os.str();
}

}  // namespace

SteadyResult burgers_steady(const BurgersSpec& spec) {
  if (!(spec.viscosity > 0.0)) throw std::invalid_argument("viscosity must be positive");
  if (spec.interior_points < 1) throw std::invalid_argument("need at least one interior point");
  if (!(spec.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (spec.max_steps < 1) throw std::invalid_argument("max_steps must be positive");
  if (!(spec.cfl > 0.0 && spec.cfl <= 1.0))
    throw std::invalid_argument("cfl safety factor must lie in (0, 1]");

  const Index nx = spec.interior_points;
  const double dx = 2.0 / static_cast<double>(nx + 1);
  const double nu = spec.viscosity;
  const double u_left = 1.0 + spec.boundary_delta;
  const double u_right = -1.0;

  Vector u(nx + 2);
  for (Index i = 0; i <= nx + 1; ++i) {
    const double frac = static_cast<double>(i) * dx / 2.0;  // (x + 1) / 2
    u(i) = u_left + (u_right - u_left) * frac;
  }
  u(0) = u_left;
  u(nx + 1) = u_right;

  Vector faces(nx + 1), du(nx);
  SteadyResult out;
  for (long step = 0; step < spec.max_steps; ++step) {
    const double umax = u.cwiseAbs().maxCoeff();
    const double dt = spec.cfl / (umax / dx + 2.0 * nu / (dx * dx));

    for (Index i = 0; i <= nx; ++i) faces(i) = godunov_flux(u(i), u(i + 1));
    for (Index i = 1; i <= nx; ++i)
      du(i - 1) = -(faces(i) - faces(i - 1)) / dx +
                  nu * (u(i + 1) - 2.0 * u(i) + u(i - 1)) / (dx * dx);

    double change = 0.0;
    for (Index i = 1; i <= nx; ++i) {
      const double delta = dt * du(i - 1);
      u(i) += delta;
      change = std::max(change, std::abs(delta));
    }
    out.steps = step + 1;
    out.last_change = change;
    if (change < spec.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.profile = std::move(u);
  return out;
}

TrajectoryResult pendulum_trajectory(const PendulumSpec& spec, PendulumFidelity fidelity) {
  if (!(spec.m1 > 0.0) || !(spec.m2 > 0.0)) throw std::invalid_argument("masses must be positive");
  if (!(spec.l1 > 0.0) || !(spec.l2 > 0.0)) throw std::invalid_argument("lengths must be positive");
  if (!(spec.dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (spec.horizon < 0.0) throw std::invalid_argument("horizon must be nonnegative");

  const auto samples =
      static_cast<Index>(std::floor(spec.horizon / spec.dt + 1e-9)) + 1;
  const bool linear = fidelity == PendulumFidelity::linear;
  auto rhs = [&](const State4& y) {
    return linear ? pendulum_rhs_linear(spec, y) : pendulum_rhs_nonlinear(spec, y);
  };

  State4 y;
  y << spec.theta1_0, spec.theta2_0, 0.0, 0.0;

  TrajectoryResult out;
  out.states.resize(4, samples);
  out.states.col(0) = y;

  const double h = spec.dt;
  for (Index k = 1; k < samples; ++k) {
    const State4 k1 = rhs(y);
    const State4 k2 = rhs(State4(y + 0.5 * h * k1));
    const State4 k3 = rhs(State4(y + 0.5 * h * k2));
    const State4 k4 = rhs(State4(y + h * k3));
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!y.allFinite() || std::abs(y(0)) > 1e3 || std::abs(y(1)) > 1e3) {
      out.blew_up = true;
      for (Index r = k; r < samples; ++r) out.states.col(r) = out.states.col(k - 1);
      return out;
    }
    out.states.col(k) = y;
  }
  return out;
}

SeriesResult pendulum_series(const PendulumSpec& spec, PendulumFidelity fidelity) {
  const TrajectoryResult traj = pendulum_trajectory(spec, fidelity);
  SeriesResult out;
  out.series = traj.states.row(1).transpose();
  out.blew_up = traj.blew_up;
  return out;
}

double GridAxis::point(Index i) const {
  if (count < 1) throw std::invalid_argument("grid axis needs a positive count");
  if (i < 0 || i >= count) throw std::invalid_argument("grid axis index out of range");
  if (!(hi > lo)) throw std::invalid_argument("grid axis needs hi > lo");
  if (include_endpoints) {
    if (count == 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
}

Index ParameterGrid::size() const {
  Index total = 1;
  for (const GridAxis& ax : axes) total *= ax.count;
  return axes.empty() ? 0 : total;
}

Vector ParameterGrid::point(Index flat) const {
  if (flat < 0 || flat >= size()) throw std::invalid_argument("grid point index out of range");
  Vector p(static_cast<Index>(axes.size()));
  Index rem = flat;
  for (Index k = static_cast<Index>(axes.size()) - 1; k >= 0; --k) {
    const Index c = axes[static_cast<size_t>(k)].count;
    p(k) = axes[static_cast<size_t>(k)].point(rem % c);
    rem /= c;
  }
  return p;
}

ParameterGrid burgers_default_grid(Index n_delta, Index n_nu) {
  ParameterGrid g;
  g.axes.push_back({0.0, 0.1, n_delta, false});
  g.axes.push_back({0.1, 1.0, n_nu, false});
  return g;
}

ParameterGrid pendulum_default_grid(Index n_m2, Index n_l2) {
  ParameterGrid g;
  g.axes.push_back({0.25, 0.75, n_m2, true});
  g.axes.push_back({0.25, 4.0, n_l2, true});
  return g;
}

Ensemble build_burgers_ensemble(const ParameterGrid& grid, Fidelity fidelity,
                                const BurgersModelOptions& options) {
  if (grid.axes.size() != 2)
    throw std::invalid_argument("burgers grid needs two axes (delta, nu)");
  const Index n = grid.size();
  const Index nx = fidelity == Fidelity::low ? options.nx_low : options.nx_high;

  Ensemble ens;
  ens.model_id = "burgers";
  ens.fidelity_label = fidelity == Fidelity::low ? "low" : "high";
  ens.snapshots.resize(nx + 2, n);
  ens.parameters.reserve(static_cast<size_t>(n));

  for (Index j = 0; j < n; ++j) {
    const Vector p = grid.point(j);
    BurgersSpec spec;
    spec.boundary_delta = p(0);
    spec.viscosity = p(1);
    spec.interior_points = nx;
    spec.tolerance = options.tolerance;
    spec.max_steps = options.max_steps;
    const SteadyResult sol = burgers_steady(spec);
    if (!sol.converged)
      throw SolveFailure("burgers steady solve did not converge at " + point_string(p));
    ens.snapshots.col(j) = sol.profile;
    ens.parameters.push_back(p);
  }
  return ens;
}

Ensemble build_pendulum_ensemble(const ParameterGrid& grid, Fidelity fidelity,
                                 const PendulumModelOptions& options) {
  if (grid.axes.size() != 2)
    throw std::invalid_argument("pendulum grid needs two axes (m2, l2)");
  const Index n = grid.size();
  const bool low = fidelity == Fidelity::low;
  const double dt = low ? options.dt_low : options.dt_high;
  const auto rows = static_cast<Index>(std::floor(options.horizon / dt + 1e-9)) + 1;

  Ensemble ens;
  ens.model_id = "pendulum";
  ens.fidelity_label = low ? "low" : "high";
  ens.snapshots.resize(rows, n);
  ens.parameters.reserve(static_cast<size_t>(n));

  for (Index j = 0; j < n; ++j) {
    const Vector p = grid.point(j);
    PendulumSpec spec;
    spec.m2 = p(0);
    spec.l2 = p(1);
    spec.dt = dt;
    spec.horizon = options.horizon;
    const SeriesResult sol =
        pendulum_series(spec, low ? PendulumFidelity::linear : PendulumFidelity::nonlinear);
    if (sol.blew_up)
      throw SolveFailure("pendulum trajectory blew up at " + point_string(p));
    ens.snapshots.col(j) = sol.series;
    ens.parameters.push_back(p);
  }
  return ens;
}

RecoveryInstance synthetic_recovery_instance(Index d, Index basis_size, Index n,
                                             double coeff_bound, double noise_sigma,
                                             std::uint64_t seed) {
  if (d < 1 || n < 1) throw std::invalid_argument("dimensions must be positive");
  if (basis_size < 1 || basis_size > std::min(d, n))
    throw std::invalid_argument("basis size must lie in [1, min(d, n)]");
  if (!(coeff_bound > 0.0 && coeff_bound < 1.0))
    throw std::invalid_argument("coefficient bound must lie in (0, 1)");
  if (noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be nonnegative");

  SplitMix64 rng(seed);

  // Unit-norm gaussian basis, redrawn until its Gram is well conditioned.
  Matrix basis(d, basis_size);
  bool conditioned = false;
  for (int attempt = 0; attempt < 100 && !conditioned; ++attempt) {
    for (Index j = 0; j < basis_size; ++j) {
      for (Index i = 0; i < d; ++i) basis(i, j) = rng.gaussian();
      basis.col(j) /= basis.col(j).norm();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(basis.transpose() * basis,
                                             Eigen::EigenvaluesOnly);
    conditioned = es.eigenvalues().minCoeff() >= 0.1;
  }
  if (!conditioned)
    throw std::runtime_error("could not draw a well-conditioned basis in 100 attempts");

  // Scatter the planted positions over the whole index range.
  IndexList pool(static_cast<size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < basis_size; ++i) {
    const auto j = static_cast<size_t>(i) +
                   static_cast<size_t>(rng.bounded(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<size_t>(i)], pool[j]);
  }
  IndexList positions(pool.begin(), pool.begin() + basis_size);
  std::sort(positions.begin(), positions.end());

  std::vector<char> is_basis(static_cast<size_t>(n), 0);
  for (Index p : positions) is_basis[static_cast<size_t>(p)] = 1;

  RecoveryInstance inst;
  inst.basis_indices = positions;
  inst.expansion.resize(basis_size, n - basis_size);
  inst.ensemble.resize(d, n);
  for (Index k = 0; k < basis_size; ++k) inst.ensemble.col(positions[static_cast<size_t>(k)]) = basis.col(k);

  // Each remaining column mixes the basis with l1 mass in
  // (coeff_bound/2, coeff_bound]; the direction is gaussian.
  Index out_col = 0;
  for (Index j = 0; j < n; ++j) {
    if (is_basis[static_cast<size_t>(j)]) continue;
    Vector c(basis_size);
    for (Index i = 0; i < basis_size; ++i) c(i) = rng.gaussian();
    const double mass = coeff_bound * (0.5 + 0.5 * rng.uniform01());
    c *= mass / c.lpNorm<1>();
    inst.expansion.col(out_col) = c;
    inst.ensemble.col(j) = basis * c;
    ++out_col;
  }

  if (noise_sigma > 0.0) {
    for (Index j = 0; j < n; ++j) {
      if (is_basis[static_cast<size_t>(j)]) continue;
      for (Index i = 0; i < d; ++i) inst.ensemble(i, j) += noise_sigma * rng.gaussian();
    }
  }
  return inst;
}

}  // namespace mfalloc
