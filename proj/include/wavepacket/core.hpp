#pragma once

// Domain types shared by every module: physical constants, packet parameter
// bundles, the periodic 1-D grid, sampled wavefunctions and moment reports.
//
// Conventions:
//   * position grid x_j = xmin + j*dx, j = 0..n-1, periodic with period n*dx
//   * momentum grid p_k = (k - n/2)*dp, k = 0..n-1, dp = 2*pi*hbar/(n*dx)
//   * phi(p) = (2*pi*hbar)^(-1/2) * Int psi(x) exp(-i p x / hbar) dx

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace wpl {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Physics tolerance on field normalization (discretization-level error).
inline constexpr double kNormTolerance = 1e-9;
/// Arithmetic tolerance for operations that should be exact up to rounding.
inline constexpr double kArithmeticTolerance = 1e-12;
/// Default grid point count.
inline constexpr std::size_t kDefaultGridPoints = 4096;
/// Smallest admissible grid.
inline constexpr std::size_t kMinGridPoints = 256;
/// Standard deviations of margin kept around the packet at its widest.
inline constexpr double kDefaultPadding = 12.0;

/// Invalid physical parameters or malformed input values.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The grid cannot represent the requested field (too small or too coarse).
class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Constants {
  double hbar = 1.0;
  double mass = 1.0;

  void validate() const;
};

/// Minimum-uncertainty Gaussian, momentum width alpha (phi ~ exp(-alpha^2 (p-p0)^2 / 2)).
class GaussianSpec {
 public:
  GaussianSpec(double alpha, double x0, double p0, Constants constants = {});
  static GaussianSpec from_beta(double beta, double x0, double p0, Constants constants = {});

  double alpha() const { return alpha_; }
  double x0() const { return x0_; }
  double p0() const { return p0_; }
  const Constants& constants() const { return constants_; }

  /// Position width beta = alpha*hbar.
  double beta() const { return alpha_ * constants_.hbar; }
  /// Spreading time t0 = m*hbar*alpha^2.
  double t0() const { return constants_.mass * constants_.hbar * alpha_ * alpha_; }
  double sigma_x0() const;
  double sigma_p0() const;

 private:
  double alpha_;
  double x0_;
  double p0_;
  Constants constants_;
};

/// Gaussian with the extra momentum-space phase exp(-i C alpha^2 (p-p0)^2 / 2).
class SqueezedSpec {
 public:
  SqueezedSpec(GaussianSpec base, double squeeze);

  const GaussianSpec& base() const { return base_; }
  double squeeze() const { return squeeze_; }

 private:
  GaussianSpec base_;
  double squeeze_;
};

struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
};

/// N [cos(theta) G_A + sin(theta) G_B], both components of width beta.
class SuperpositionSpec {
 public:
  SuperpositionSpec(PhasePoint a, PhasePoint b, double beta, double theta, Constants constants = {});

  const PhasePoint& a() const { return a_; }
  const PhasePoint& b() const { return b_; }
  double beta() const { return beta_; }
  double theta() const { return theta_; }
  const Constants& constants() const { return constants_; }

  GaussianSpec component_a() const;
  GaussianSpec component_b() const;
  /// (xA-xB)^2/4beta^2 + (pA-pB)^2 beta^2/4hbar^2.
  double separation() const;

 private:
  PhasePoint a_;
  PhasePoint b_;
  double beta_;
  double theta_;
  Constants constants_;
};

/// Packet prepared in V = m w^2 x^2 / 2, psi(x,0) ~ exp(i p0 x/hbar) exp(-x^2/2beta^2).
class OscillatorSpec {
 public:
  OscillatorSpec(double beta, double p0, double omega, Constants constants = {});

  double beta() const { return beta_; }
  double p0() const { return p0_; }
  double omega() const { return omega_; }
  const Constants& constants() const { return constants_; }

  /// sqrt(hbar / (m w)), the width of the coherent state.
  double coherent_beta() const;
  bool is_coherent(double tolerance = 1e-12) const;
  double period() const { return 2.0 * kPi / omega_; }

 private:
  double beta_;
  double p0_;
  double omega_;
  Constants constants_;
};

using AccelerationBase = std::variant<GaussianSpec, SqueezedSpec>;

/// Free packet under a constant force F (H = p^2/2m - F x).
class AccelerationSpec {
 public:
  AccelerationSpec(AccelerationBase base, double force);

  const AccelerationBase& base() const { return base_; }
  const GaussianSpec& gaussian() const;
  /// Squeeze parameter of the base packet (0 for a plain Gaussian).
  double squeeze() const;
  double force() const { return force_; }
  const Constants& constants() const { return gaussian().constants(); }

 private:
  AccelerationBase base_;
  double force_;
};

using PacketSpec =
    std::variant<GaussianSpec, SqueezedSpec, SuperpositionSpec, OscillatorSpec, AccelerationSpec>;

const Constants& constants_of(const PacketSpec& spec);
/// m beta^2 / hbar for the packet's width parameter.
double spreading_time(const PacketSpec& spec);
std::string family_name(const PacketSpec& spec);

class Grid1D {
 public:
  Grid1D(std::size_t n, double xmin, double xmax, Constants constants = {});

  std::size_t size() const { return n_; }
  double xmin() const { return xmin_; }
  double xmax() const { return xmax_; }
  double dx() const { return (xmax_ - xmin_) / static_cast<double>(n_); }
  double dp() const;
  double p_max() const;  // pi*hbar/dx, exclusive upper edge of the momentum axis
  const Constants& constants() const { return constants_; }
  double hbar() const { return constants_.hbar; }

  double x(std::size_t j) const { return xmin_ + static_cast<double>(j) * dx(); }
  double p(std::size_t k) const;
  std::vector<double> positions() const;
  std::vector<double> momenta() const;
  bool contains(double x) const { return x >= xmin_ && x < xmax_; }

 private:
  std::size_t n_;
  double xmin_;
  double xmax_;
  Constants constants_;
};

enum class Representation { position, momentum };

/// Complex samples on a Grid1D in either representation.
class ComplexField {
 public:
  ComplexField(Grid1D grid, std::vector<cplx> values, Representation representation, double time);

  const Grid1D& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  std::vector<cplx>& mutable_values() { return values_; }
  Representation representation() const { return representation_; }
  bool is_position() const { return representation_ == Representation::position; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  /// dx in position representation, dp in momentum representation.
  double spacing() const;
  /// Sum |values|^2 * spacing.
  double norm() const;
  /// Axis coordinate of sample i in this field's representation.
  double coordinate(std::size_t i) const;

 private:
  Grid1D grid_;
  std::vector<cplx> values_;
  Representation representation_;
  double time_;
};

/// Throws SpecError if |norm - 1| exceeds the physics tolerance.
void require_normalized(const ComplexField& field, const char* what);

/// Rescales to unit norm; zero-norm input is a SpecError.
ComplexField normalize(ComplexField field);

/// Discrete transform between representations (unitary on the grid).
ComplexField to_momentum(const ComplexField& field);
ComplexField to_position(const ComplexField& field);

/// d psi / dx by spectral differentiation.
std::vector<cplx> spectral_derivative(const ComplexField& field);

struct MomentReport {
  double mean_x = 0.0;
  double mean_x2 = 0.0;
  double mean_p = 0.0;
  double mean_p2 = 0.0;
  double sigma_x = 0.0;
  double sigma_p = 0.0;
  double cov_xp = 0.0;
  double rho = 0.0;
  double time = 0.0;

  /// Builds a report from means, variances and the symmetric covariance.
  static MomentReport from_moments(double mean_x, double var_x, double mean_p, double var_p,
                                   double cov_xp, double time);

  /// ((x p + p x)/2) - <x><p>, i.e. the symmetric covariance times two.
  double correlation_term() const { return 2.0 * cov_xp; }
  /// sigma_x sigma_p >= hbar/2 - 1e-9.
  bool satisfies_uncertainty(double hbar) const;
  /// 1 - (hbar / 2 sigma_x sigma_p)^2 - rho^2; the bound holds if >= -1e-9.
  double rho_bound_slack(double hbar) const;
};

/// Grid covering the packet over [0, t_max] with `padding` standard
/// deviations of margin in both position and momentum. The point count is
/// the smallest power of two >= min_points that resolves the momentum range.
Grid1D make_grid(const PacketSpec& spec, double t_max, double padding = kDefaultPadding,
                 std::size_t min_points = kMinGridPoints);

/// Points needed at a given span; used to report aliasing for fixed-size grids.
std::size_t required_points(const PacketSpec& spec, double t_max, double padding = kDefaultPadding);

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

/// Runs body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace wpl
