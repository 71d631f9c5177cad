#pragma once

#include <cstdint>
#include <stdexcept>

#include "mfalloc/bifidelity.hpp"
#include "mfalloc/linalg.hpp"

namespace mfalloc {

// Raised when an ensemble build hits a non-converged or blown-up solve;
// the message names the parameter point.
class SolveFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Viscous Burgers steady state on (-1, 1), u(-1) = 1 + delta, u(1) = -1.
// Conservative Godunov flux plus central diffusion, marched in pseudo-time
// with forward Euler and dt = cfl / (max|u|/dx + 2 nu/dx^2).

struct BurgersSpec {
  double viscosity = 0.1;
  double boundary_delta = 0.0;
  Index interior_points = 40;         // profile has interior_points + 2 rows
  double tolerance = 1e-10;           // successive inf-norm change target
  // The transition layer parks at speed ~delta/2, so small-delta fine-grid
  // solves need ~9M diffusion-limited steps; 50M leaves headroom while
  // still bounding a genuinely stuck solve.
  long max_steps = 50'000'000;
  double cfl = 0.4;
};

struct SteadyResult {
  Vector profile;     // boundary values included
  bool converged = false;
  double last_change = 0.0;
  long steps = 0;
};

SteadyResult burgers_steady(const BurgersSpec& spec);

// ---------------------------------------------------------------------------
// Planar double pendulum released from rest, fixed m1 = 1, l1 = 1, g = 9.8,
// theta1(0) = theta2(0) = pi/4. Classical RK4 at fixed dt.

struct PendulumSpec {
  double m2 = 0.5;
  double l2 = 1.0;
  double dt = 0.01;
  double horizon = 15.0;
  double m1 = 1.0;
  double l1 = 1.0;
  double g = 9.8;
  double theta1_0 = 0.78539816339744830961;  // pi/4
  double theta2_0 = 0.78539816339744830961;
};

enum class PendulumFidelity { nonlinear, linear };

struct SeriesResult {
  Vector series;        // theta2 samples at t = 0, dt, ..., horizon
  bool blew_up = false; // any |angle| exceeded 1e3
};

struct TrajectoryResult {
  Matrix states;        // 4 x samples: theta1, theta2, omega1, omega2
  bool blew_up = false;
};

// Sample count is floor(horizon/dt + 1e-9) + 1, so dt = 0.01, T = 15
// yields 1501 and dt = 0.25 yields 61. On blow-up the remaining samples
// repeat the last finite state and the flag is set.
TrajectoryResult pendulum_trajectory(const PendulumSpec& spec, PendulumFidelity fidelity);
SeriesResult pendulum_series(const PendulumSpec& spec, PendulumFidelity fidelity);

// ---------------------------------------------------------------------------
// Parameter grids and ensemble builders.

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  Index count = 1;
  // true: inclusive linspace over [lo, hi]; false: midpoints of `count`
  // equal cells of the open interval (lo, hi).
  bool include_endpoints = true;

  double point(Index i) const;
};

// Row-major product of axes (last axis fastest).
struct ParameterGrid {
  std::vector<GridAxis> axes;

  Index size() const;
  Vector point(Index flat) const;
};

enum class Fidelity { low, high };

struct BurgersModelOptions {
  Index nx_low = 40;
  Index nx_high = 256;
  double tolerance = 1e-10;
  long max_steps = 50'000'000;
};

struct PendulumModelOptions {
  double dt_low = 0.25;
  double dt_high = 0.01;
  double horizon = 15.0;
};

// Default 20 x 20 grids: Burgers delta over open (0, 0.1) and nu over
// open (0.1, 1.0) by cell midpoints; pendulum m2 over [0.25, 0.75] and
// l2 over [0.25, 4.0] inclusive.
ParameterGrid burgers_default_grid(Index n_delta = 20, Index n_nu = 20);
ParameterGrid pendulum_default_grid(Index n_m2 = 20, Index n_l2 = 20);

// Column j solves grid.point(j); throws SolveFailure naming the point if
// a solve does not converge or blows up.
Ensemble build_burgers_ensemble(const ParameterGrid& grid, Fidelity fidelity,
                                const BurgersModelOptions& options = {});
Ensemble build_pendulum_ensemble(const ParameterGrid& grid, Fidelity fidelity,
                                 const PendulumModelOptions& options = {});

// ---------------------------------------------------------------------------
// Synthetic instances with a planted basis for recovery experiments.

struct RecoveryInstance {
  Matrix ensemble;          // d x n
  IndexList basis_indices;  // sorted planted positions, size basis_size
  // Planted coefficients: rows follow basis_indices, columns the
  // non-basis positions in ascending order.
  Matrix expansion;
};

// Basis columns are unit-norm gaussians redrawn (at most 100 attempts)
// until their Gram's smallest eigenvalue reaches 0.1; every non-basis
// column is a combination of basis columns with coefficient-column l1
// mass at most coeff_bound (< 1), plus optional iid gaussian noise.
// Non-basis columns are not renormalized.
RecoveryInstance synthetic_recovery_instance(Index d, Index basis_size, Index n,
                                             double coeff_bound, double noise_sigma,
                                             std::uint64_t seed);

}  // namespace mfalloc
