#pragma once

// Observables of sampled fields: symmetric x-p covariance, kinetic-energy
// density and its front/back split, Wigner distributions and contour levels.

#include <array>
#include <span>
#include <vector>

#include "wavepacket/core.hpp"

namespace wpl {

struct CovarianceResult {
  double cov = 0.0;
  double rho = 0.0;
  /// |Im| of the symmetrized operator expectation; zero for a Hermitian product.
  double imag_residue = 0.0;
};

/// (1/2)<(x-<x>)(p-<p>) + (p-<p>)(x-<x>)> by quadrature with spectral derivatives.
/// Rejects fields that are not normalized.
CovarianceResult covariance_quadrature(const ComplexField& field);

/// (hbar^2 / 2m) |d psi/dx|^2 on the position grid.
std::vector<double> kinetic_density(const ComplexField& field);

struct KineticSplit {
  double total = 0.0;
  double t_plus = 0.0;
  double t_minus = 0.0;
  double r_plus = 0.5;
  double r_minus = 0.5;
  double time = 0.0;
};

/// Kinetic energy on either side of `mean_x`. The split point must lie on the grid.
KineticSplit kinetic_split(const ComplexField& field, double mean_x);

struct KineticFractions {
  double r_plus = 0.5;
  double r_minus = 0.5;
};

/// Closed-form front/back kinetic fractions of the free (squeezed) Gaussian.
KineticFractions r_fraction_closed(const GaussianSpec& spec, double t);
KineticFractions r_fraction_closed(const SqueezedSpec& spec, double t);

struct WignerGrid {
  std::vector<double> x_axis;
  std::vector<double> p_axis;
  /// Row-major, values[i * p_axis.size() + j] = W(x_i, p_j).
  std::vector<double> values;
  double time = 0.0;
  /// Largest |Im| seen before discarding the imaginary part.
  double max_imag_residue = 0.0;

  double at(std::size_t i, std::size_t j) const { return values[i * p_axis.size() + j]; }
  bool empty() const { return values.empty(); }
};

/// Evenly spaced axis of `count` points spanning center +/- half_width.
std::vector<double> centered_axis(double center, double half_width, std::size_t count);

inline constexpr std::size_t kDefaultWignerPoints = 512;
inline constexpr double kDefaultWignerSpan = 6.0;

/// (1/pi hbar) Int psi*(x+y) psi(x-y) exp(2ipy/hbar) dy on the requested axes.
/// The y-integral uses band-limited interpolation of the field; rows run on
/// up to `threads` workers.
WignerGrid wigner_numeric(const ComplexField& field, std::span<const double> x_axis,
                          std::span<const double> p_axis, std::size_t threads = 1);

/// Axes centred on the field's mean with kDefaultWignerSpan standard deviations.
WignerGrid wigner_numeric(const ComplexField& field, std::size_t points = kDefaultWignerPoints,
                          std::size_t threads = 1);

double wigner_gaussian_closed(const GaussianSpec& spec, double x, double p, double t);
double wigner_squeezed_closed(const SqueezedSpec& spec, double x, double p, double t);

/// Int W dp at each x (trapezoid over p_axis).
std::vector<double> position_marginal(const WignerGrid& grid);
/// Int W dx at each p (trapezoid over x_axis).
std::vector<double> momentum_marginal(const WignerGrid& grid);
/// Double trapezoid integral of W.
double wigner_integral(const WignerGrid& grid);

inline constexpr std::array<double, 3> kDefaultContourFractions{0.7, 0.3, 0.1};

/// fraction * max(W) for each fraction. Empty or all-zero grids are rejected.
std::vector<double> contour_levels(const WignerGrid& grid,
                                   std::span<const double> fractions = kDefaultContourFractions);

}  // namespace wpl
