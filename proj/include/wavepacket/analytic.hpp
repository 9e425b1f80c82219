#pragma once

// Closed-form wavefunctions and moments for every packet family.
//
// Pointwise evaluators (`*_at`) return exact values; the grid versions
// sample them and throw GridError when the sampled norm departs from one by
// more than kNormTolerance (the grid does not hold the packet).

#include "wavepacket/core.hpp"

namespace wpl {

/// Delta x_t^2 = dx0_sq + linear_coeff * t + quad_coeff * t^2.
struct SpreadCurve {
  double dx0_sq = 0.0;
  double linear_coeff = 0.0;
  double quad_coeff = 0.0;

  double at(double t) const { return dx0_sq + t * (linear_coeff + t * quad_coeff); }
  /// Time of minimum width (0 when there is no quadratic term).
  double argmin() const;
  /// dx0_sq * quad_coeff >= (linear_coeff/2)^2 - 1e-9, i.e. the width never vanishes.
  bool is_valid() const;
};

// --- standard Gaussian -----------------------------------------------------

cplx gaussian_phi_at(const GaussianSpec& spec, double p, double t);
cplx gaussian_psi_at(const GaussianSpec& spec, double x, double t);
ComplexField gaussian_phi(const GaussianSpec& spec, const Grid1D& grid, double t);
ComplexField gaussian_psi(const GaussianSpec& spec, const Grid1D& grid, double t);
MomentReport gaussian_moments(const GaussianSpec& spec, double t);

// --- general spread ----------------------------------------------------------

/// Spread curve implied by a set of initial moments under free evolution.
SpreadCurve spread_curve(const MomentReport& initial, double mass);
/// Delta x^2 a time t after the moments in `initial` were taken.
double general_spread(const MomentReport& initial, double mass, double t);

// --- squeezed ------------------------------------------------------------

/// b(t) = beta sqrt(1 + (C + t/t0)^2).
double squeezed_width(const SqueezedSpec& spec, double t);
cplx squeezed_phi_at(const SqueezedSpec& spec, double p, double t);
cplx squeezed_psi_at(const SqueezedSpec& spec, double x, double t);
ComplexField squeezed_phi(const SqueezedSpec& spec, const Grid1D& grid, double t);
ComplexField squeezed_psi(const SqueezedSpec& spec, const Grid1D& grid, double t);
MomentReport squeezed_moments(const SqueezedSpec& spec, double t);

struct ShiftPair {
  double a = 0.0;    // length
  double tau = 0.0;  // time
};

/// Multiplies a momentum field by exp(-i p a/hbar) exp(+i p^2 tau / 2 m hbar), so
/// the position field becomes psi(x - a, t - tau).
ComplexField shift_transform(const ComplexField& momentum_field, double a, double tau);

/// The (a, tau) shift that maps the unsqueezed packet onto the squeezed one
/// (up to a constant phase exp(-i C alpha^2 p0^2 / 2)).
ShiftPair squeezed_equivalent_shift(const SqueezedSpec& spec);

// --- two-Gaussian superposition ---------------------------------------------

/// Overall normalization N > 0.
double superposition_norm(const SuperpositionSpec& spec);
cplx superposition_psi_at(const SuperpositionSpec& spec, double x, double t);
cplx superposition_phi_at(const SuperpositionSpec& spec, double p, double t);
ComplexField superposition_psi(const SuperpositionSpec& spec, const Grid1D& grid, double t);
ComplexField superposition_phi(const SuperpositionSpec& spec, const Grid1D& grid, double t);

inline constexpr double kFarApartThreshold = 10.0;

struct FarApartMoments {
  MomentReport report;
  double separation = 0.0;
  /// False when separation < kFarApartThreshold; the formulas neglect overlap terms.
  bool far_apart = true;
};

FarApartMoments superposition_moments_far(const SuperpositionSpec& spec, double t);

// --- harmonic oscillator ----------------------------------------------------

/// A(t) = beta cos(wt) + i (hbar / m w beta) sin(wt).
cplx sho_width_factor(const OscillatorSpec& spec, double t);
/// x_s(t) = p0 sin(wt) / m w.
double sho_center(const OscillatorSpec& spec, double t);
cplx sho_psi_at(const OscillatorSpec& spec, double x, double t);
ComplexField sho_psi(const OscillatorSpec& spec, const Grid1D& grid, double t);
MomentReport sho_moments(const OscillatorSpec& spec, double t);
/// Moments at the instant the binding potential is removed; free evolution
/// afterwards follows general_spread of this report.
MomentReport sho_release(const OscillatorSpec& spec, double t_release);

// --- uniform force -------------------------------------------------------------

cplx accel_phi_at(const AccelerationSpec& spec, double p, double t);
ComplexField accel_phi(const AccelerationSpec& spec, const Grid1D& grid, double t);
MomentReport accel_moments(const AccelerationSpec& spec, double t);

// --- family dispatch -----------------------------------------------------------

/// Closed-form moments for any family at time t.
MomentReport analytic_moments(const PacketSpec& spec, double t);
/// Closed-form position field; the accelerated family is transformed from momentum space.
ComplexField analytic_psi(const PacketSpec& spec, const Grid1D& grid, double t);
/// Initial state in momentum representation.
ComplexField analytic_phi0(const PacketSpec& spec, const Grid1D& grid);

}  // namespace wpl
