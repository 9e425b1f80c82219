#pragma once

// Grid propagation used as an independent check on the closed forms: exact
// free evolution by a momentum-space phase, Strang split-step evolution in a
// potential, and quadrature moments of sampled fields.

#include <functional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "wavepacket/core.hpp"

namespace wpl {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// phi(p, t) = phi0(p) exp(-i p^2 t / 2 m hbar). Accepts either representation
/// and returns the same representation it was given.
ComplexField evolve_free(const ComplexField& field, double t);

/// Strang splitting: half potential kick, full kinetic drift, half kick.
/// `potential` holds V(x_j) on the field's grid.
ComplexField evolve_split_step(const ComplexField& psi0, std::span<const double> potential, double dt,
                               std::size_t n_steps);

struct ConvergenceCheck {
  /// max|psi_dt - psi_dt/2| and max|psi_dt/2 - psi_dt/4|.
  double coarse_change = 0.0;
  double fine_change = 0.0;
  double ratio = 0.0;
  bool passed = false;
};

/// Smallest coarse/fine change ratio accepted as second-order behaviour.
inline constexpr double kSecondOrderRatio = 3.5;
/// Changes below this are rounding noise and pass regardless of ratio.
inline constexpr double kConvergenceFloor = 1e-11;

/// Runs the evolution at dt, dt/2 and dt/4 over the same duration.
ConvergenceCheck check_split_step_convergence(const ComplexField& psi0, std::span<const double> potential,
                                              double dt, std::size_t n_steps);

/// evolve_split_step that throws ConvergenceError when the check fails.
ComplexField evolve_split_step_checked(const ComplexField& psi0, std::span<const double> potential,
                                       double dt, std::size_t n_steps);

std::vector<double> harmonic_potential(const Grid1D& grid, double omega);
/// V = -F x (force F to the right).
std::vector<double> linear_potential(const Grid1D& grid, double force);

/// Advances fields by arbitrary durations: one exact phase multiply for a
/// free particle, or split-step in a sampled potential.
class Propagator {
 public:
  static Propagator free();
  static Propagator in_potential(std::vector<double> potential, double dt);

  bool is_free() const { return potential_.empty(); }
  double dt() const { return dt_; }
  /// Split-step count used for a given duration (dt shrinks to divide it evenly).
  std::size_t steps_for(double duration) const;
  ComplexField advance(const ComplexField& field, double duration) const;

 private:
  Propagator(std::vector<double> potential, double dt) : potential_(std::move(potential)), dt_(dt) {}
  std::vector<double> potential_;
  double dt_;
};

/// All first and second moments by quadrature: x-moments from |psi|^2,
/// p-moments from |phi|^2, covariance from one spectral derivative.
MomentReport quadrature_moments(const ComplexField& field);

struct ConvergenceSweep {
  /// Max-abs difference of each level against the finest level.
  std::vector<double> errors;
  bool monotone = true;
};

/// Evaluates `op(level)` for level = 0..levels (each a refinement of the
/// last) and compares every level to the finest. Errors below `floor` count
/// as converged when checking monotonicity.
ConvergenceSweep convergence_sweep(const std::function<std::vector<double>(int level)>& op, int levels,
                                   double floor = 1e-13);

}  // namespace wpl
