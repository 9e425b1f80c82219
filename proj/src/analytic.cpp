#include "wavepacket/analytic.hpp"

#include <cmath>
#include <sstream>

namespace wpl {
namespace {

constexpr cplx kI{0.0, 1.0};

template <typename Fn>
ComplexField sample(const Grid1D& grid, Representation rep, double t, Fn&& fn, const char* what) {
  const std::size_t n = grid.size();
  std::vector<cplx> values(n);
  const bool position = rep == Representation::position;
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = fn(position ? grid.x(i) : grid.p(i));
  }
  ComplexField field(grid, std::move(values), rep, t);
  const double norm = field.norm();
  if (!(std::abs(norm - 1.0) <= kNormTolerance)) {
    std::ostringstream msg;
    msg << what << ": grid [" << grid.xmin() << ", " << grid.xmax() << ") with n=" << grid.size()
        << " does not hold the packet at t=" << t << " (sampled norm " << norm << ")";
    throw GridError(msg.str());
  }
  return field;
}

/// sqrt(alpha / sqrt(pi)), the peak amplitude of the normalized momentum Gaussian.
double momentum_amplitude(double alpha) { return std::sqrt(alpha / std::sqrt(kPi)); }

/// Position-space Gaussian with the complex width factor 1 + i*s.
cplx shifted_gaussian_psi(const GaussianSpec& g, double s, double x, double t) {
  const Constants& c = g.constants();
  const double beta = g.beta();
  const cplx width = 1.0 + kI * s;
  const cplx prefactor = 1.0 / std::sqrt(std::sqrt(kPi) * beta * width);
  const double u = x - g.x0() - g.p0() * t / c.mass;
  const double phase = g.p0() * (x - g.x0()) / c.hbar - g.p0() * g.p0() * t / (2.0 * c.mass * c.hbar);
  return prefactor * std::polar(1.0, phase) * std::exp(-u * u / (2.0 * beta * beta * width));
}

cplx squeezed_phi_with(const GaussianSpec& g, double squeeze, double p, double t) {
  const Constants& c = g.constants();
  const double q = p - g.p0();
  const double a2 = g.alpha() * g.alpha();
  const double envelope = std::exp(-a2 * q * q / 2.0);
  const double phase =
      -a2 * q * q * squeeze / 2.0 - p * g.x0() / c.hbar - p * p * t / (2.0 * c.mass * c.hbar);
  return momentum_amplitude(g.alpha()) * envelope * std::polar(1.0, phase);
}

MomentReport squeezed_moments_with(const GaussianSpec& g, double squeeze, double t) {
  const Constants& c = g.constants();
  const double s = squeeze + t / g.t0();
  const double beta = g.beta();
  const double var_x = beta * beta * (1.0 + s * s) / 2.0;
  const double var_p = 1.0 / (2.0 * g.alpha() * g.alpha());
  const double cov = c.hbar * s / 2.0;
  return MomentReport::from_moments(g.x0() + g.p0() * t / c.mass, var_x, g.p0(), var_p, cov, t);
}

}  // namespace

double SpreadCurve::argmin() const {
  if (quad_coeff <= 0.0) return 0.0;
  return -linear_coeff / (2.0 * quad_coeff);
}

bool SpreadCurve::is_valid() const {
  return dx0_sq > 0.0 && quad_coeff >= 0.0 &&
         dx0_sq * quad_coeff >= 0.25 * linear_coeff * linear_coeff - 1e-9;
}

// --- standard Gaussian -----------------------------------------------------

cplx gaussian_phi_at(const GaussianSpec& spec, double p, double t) {
  return squeezed_phi_with(spec, 0.0, p, t);
}

cplx gaussian_psi_at(const GaussianSpec& spec, double x, double t) {
  return shifted_gaussian_psi(spec, t / spec.t0(), x, t);
}

ComplexField gaussian_phi(const GaussianSpec& spec, const Grid1D& grid, double t) {
  return sample(grid, Representation::momentum, t,
                [&](double p) { return gaussian_phi_at(spec, p, t); }, "gaussian_phi");
}

ComplexField gaussian_psi(const GaussianSpec& spec, const Grid1D& grid, double t) {
  return sample(grid, Representation::position, t,
                [&](double x) { return gaussian_psi_at(spec, x, t); }, "gaussian_psi");
}

MomentReport gaussian_moments(const GaussianSpec& spec, double t) {
  return squeezed_moments_with(spec, 0.0, t);
}

// --- general spread ----------------------------------------------------------

SpreadCurve spread_curve(const MomentReport& initial, double mass) {
  SpreadCurve curve;
  curve.dx0_sq = initial.sigma_x * initial.sigma_x;
  curve.linear_coeff = initial.correlation_term() / mass;
  curve.quad_coeff = initial.sigma_p * initial.sigma_p / (mass * mass);
  return curve;
}

double general_spread(const MomentReport& initial, double mass, double t) {
  return spread_curve(initial, mass).at(t);
}

// --- squeezed ------------------------------------------------------------

double squeezed_width(const SqueezedSpec& spec, double t) {
  const double s = spec.squeeze() + t / spec.base().t0();
  return spec.base().beta() * std::sqrt(1.0 + s * s);
}

cplx squeezed_phi_at(const SqueezedSpec& spec, double p, double t) {
  return squeezed_phi_with(spec.base(), spec.squeeze(), p, t);
}

cplx squeezed_psi_at(const SqueezedSpec& spec, double x, double t) {
  const GaussianSpec& g = spec.base();
  return shifted_gaussian_psi(g, spec.squeeze() + t / g.t0(), x, t);
}

ComplexField squeezed_phi(const SqueezedSpec& spec, const Grid1D& grid, double t) {
  return sample(grid, Representation::momentum, t,
                [&](double p) { return squeezed_phi_at(spec, p, t); }, "squeezed_phi");
}

ComplexField squeezed_psi(const SqueezedSpec& spec, const Grid1D& grid, double t) {
  return sample(grid, Representation::position, t,
                [&](double x) { return squeezed_psi_at(spec, x, t); }, "squeezed_psi");
}

MomentReport squeezed_moments(const SqueezedSpec& spec, double t) {
  return squeezed_moments_with(spec.base(), spec.squeeze(), t);
}

ComplexField shift_transform(const ComplexField& momentum_field, double a, double tau) {
  if (momentum_field.is_position()) {
    throw SpecError("shift_transform expects a momentum-representation field");
  }
  const Grid1D& g = momentum_field.grid();
  const double hbar = g.hbar();
  const double mass = g.constants().mass;
  ComplexField out = momentum_field;
  auto& values = out.mutable_values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double p = g.p(k);
    values[k] *= std::polar(1.0, -p * a / hbar + p * p * tau / (2.0 * mass * hbar));
  }
  return out;
}

ShiftPair squeezed_equivalent_shift(const SqueezedSpec& spec) {
  const GaussianSpec& g = spec.base();
  const double c = spec.squeeze();
  return {-c * g.alpha() * g.alpha() * g.constants().hbar * g.p0(), -c * g.t0()};
}

// --- two-Gaussian superposition ---------------------------------------------

double superposition_norm(const SuperpositionSpec& spec) {
  const double hbar = spec.constants().hbar;
  const double beta = spec.beta();
  const PhasePoint& a = spec.a();
  const PhasePoint& b = spec.b();
  const double dx = a.x - b.x;
  const double dp = a.p - b.p;
  const double overlap = std::exp(-dx * dx / (4.0 * beta * beta) - dp * dp * beta * beta / (4.0 * hbar * hbar)) *
                         std::cos((b.x - a.x) * (b.p + a.p) / (2.0 * hbar));
  const double inv_sq = 1.0 + std::sin(2.0 * spec.theta()) * overlap;
  return 1.0 / std::sqrt(inv_sq);
}

cplx superposition_psi_at(const SuperpositionSpec& spec, double x, double t) {
  const double n = superposition_norm(spec);
  return n * (std::cos(spec.theta()) * gaussian_psi_at(spec.component_a(), x, t) +
              std::sin(spec.theta()) * gaussian_psi_at(spec.component_b(), x, t));
}

cplx superposition_phi_at(const SuperpositionSpec& spec, double p, double t) {
  const double n = superposition_norm(spec);
  return n * (std::cos(spec.theta()) * gaussian_phi_at(spec.component_a(), p, t) +
              std::sin(spec.theta()) * gaussian_phi_at(spec.component_b(), p, t));
}

ComplexField superposition_psi(const SuperpositionSpec& spec, const Grid1D& grid, double t) {
  const double n = superposition_norm(spec);
  const GaussianSpec ga = spec.component_a();
  const GaussianSpec gb = spec.component_b();
  const double ca = n * std::cos(spec.theta());
  const double cb = n * std::sin(spec.theta());
  return sample(grid, Representation::position, t,
                [&](double x) { return ca * gaussian_psi_at(ga, x, t) + cb * gaussian_psi_at(gb, x, t); },
                "superposition_psi");
}

ComplexField superposition_phi(const SuperpositionSpec& spec, const Grid1D& grid, double t) {
  const double n = superposition_norm(spec);
  const GaussianSpec ga = spec.component_a();
  const GaussianSpec gb = spec.component_b();
  const double ca = n * std::cos(spec.theta());
  const double cb = n * std::sin(spec.theta());
  return sample(grid, Representation::momentum, t,
                [&](double p) { return ca * gaussian_phi_at(ga, p, t) + cb * gaussian_phi_at(gb, p, t); },
                "superposition_phi");
}

FarApartMoments superposition_moments_far(const SuperpositionSpec& spec, double t) {
  const Constants& c = spec.constants();
  const double beta = spec.beta();
  const double cos2 = std::pow(std::cos(spec.theta()), 2);
  const double sin2 = std::pow(std::sin(spec.theta()), 2);
  const double s2 = std::pow(std::sin(2.0 * spec.theta()), 2);
  const PhasePoint& a = spec.a();
  const PhasePoint& b = spec.b();
  const double half_dx = (a.x - b.x) / 2.0;
  const double half_dp = (a.p - b.p) / 2.0;

  const double mean_p = cos2 * a.p + sin2 * b.p;
  const double mean_x = cos2 * a.x + sin2 * b.x + mean_p * t / c.mass;
  const double var_p = s2 * half_dp * half_dp + c.hbar * c.hbar / (2.0 * beta * beta);
  const double lump = half_dx + half_dp * t / c.mass;
  const double var_x = s2 * lump * lump + beta * beta / 2.0 +
                       c.hbar * c.hbar * t * t / (2.0 * c.mass * c.mass * beta * beta);
  // Half the t=0 correlation term, carried forward by d(var_x)/dt = 2 cov / m.
  const double cov = s2 * half_dx * half_dp + var_p * t / c.mass;

  FarApartMoments out;
  out.report = MomentReport::from_moments(mean_x, var_x, mean_p, var_p, cov, t);
  out.separation = spec.separation();
  out.far_apart = out.separation >= kFarApartThreshold;
  return out;
}

// --- harmonic oscillator ----------------------------------------------------

cplx sho_width_factor(const OscillatorSpec& spec, double t) {
  const Constants& c = spec.constants();
  const double lambda = c.hbar / (c.mass * spec.omega() * spec.beta());
  const double wt = spec.omega() * t;
  return {spec.beta() * std::cos(wt), lambda * std::sin(wt)};
}

double sho_center(const OscillatorSpec& spec, double t) {
  const Constants& c = spec.constants();
  return spec.p0() * std::sin(spec.omega() * t) / (c.mass * spec.omega());
}

cplx sho_psi_at(const OscillatorSpec& spec, double x, double t) {
  // The textbook form divides by sin(wt); multiplying through by A(t) gives
  // an exponent that is regular at every t:
  //   -(m w / 2 hbar) (lambda cos + i beta sin) x^2 / A
  //   + i beta p0 x / (hbar A) - i beta p0^2 sin / (2 hbar m w A)
  const Constants& c = spec.constants();
  const double beta = spec.beta();
  const double w = spec.omega();
  const double lambda = c.hbar / (c.mass * w * beta);
  const double wt = w * t;
  const double s = std::sin(wt);
  const double co = std::cos(wt);
  const cplx a = sho_width_factor(spec, t);

  const cplx exponent = -(c.mass * w / (2.0 * c.hbar)) * cplx(lambda * co, beta * s) * x * x / a +
                        kI * beta * spec.p0() * x / (c.hbar * a) -
                        kI * beta * spec.p0() * spec.p0() * s / (2.0 * c.hbar * c.mass * w * a);

  // sqrt(A) on the branch that follows A(t) continuously around the origin.
  const double turns = std::round(wt / kPi);
  const double theta = wt - turns * kPi;
  const double arg = turns * kPi + std::atan2(lambda * std::sin(theta), beta * std::cos(theta));
  const cplx sqrt_a = std::polar(std::sqrt(std::abs(a)), arg / 2.0);

  return std::exp(exponent) / (sqrt_a * std::sqrt(std::sqrt(kPi)));
}

ComplexField sho_psi(const OscillatorSpec& spec, const Grid1D& grid, double t) {
  return sample(grid, Representation::position, t,
                [&](double x) { return sho_psi_at(spec, x, t); }, "sho_psi");
}

MomentReport sho_moments(const OscillatorSpec& spec, double t) {
  const Constants& c = spec.constants();
  const double beta = spec.beta();
  const double w = spec.omega();
  const double lambda = c.hbar / (c.mass * w * beta);
  const double s = std::sin(w * t);
  const double co = std::cos(w * t);
  const double var_x = std::norm(sho_width_factor(spec, t)) / 2.0;
  const double hb = c.hbar / beta;
  const double mwb = c.mass * w * beta;
  const double var_p = (hb * hb * co * co + mwb * mwb * s * s) / 2.0;
  const double cov = c.mass * w * s * co / 2.0 * (lambda * lambda - beta * beta);
  return MomentReport::from_moments(sho_center(spec, t), var_x, spec.p0() * co, var_p, cov, t);
}

MomentReport sho_release(const OscillatorSpec& spec, double t_release) {
  return sho_moments(spec, t_release);
}

// --- uniform force -------------------------------------------------------------

cplx accel_phi_at(const AccelerationSpec& spec, double p, double t) {
  // [(p - Ft)^3 - p^3] / 6 m F hbar, expanded so F = 0 needs no special case.
  const Constants& c = spec.constants();
  const double f = spec.force();
  const double mh = c.mass * c.hbar;
  const double phase = -p * p * t / (2.0 * mh) + p * f * t * t / (2.0 * mh) - f * f * t * t * t / (6.0 * mh);
  const cplx phi0 = squeezed_phi_with(spec.gaussian(), spec.squeeze(), p - f * t, 0.0);
  return phi0 * std::polar(1.0, phase);
}

ComplexField accel_phi(const AccelerationSpec& spec, const Grid1D& grid, double t) {
  return sample(grid, Representation::momentum, t,
                [&](double p) { return accel_phi_at(spec, p, t); }, "accel_phi");
}

MomentReport accel_moments(const AccelerationSpec& spec, double t) {
  const Constants& c = spec.constants();
  const double m = c.mass;
  const double f = spec.force();
  const MomentReport m0 = squeezed_moments_with(spec.gaussian(), spec.squeeze(), 0.0);
  const double xp_sym0 = 2.0 * m0.cov_xp + 2.0 * m0.mean_x * m0.mean_p;  // <xp + px>_0

  const double mean_p = f * t + m0.mean_p;
  const double mean_p2 = f * f * t * t + 2.0 * f * m0.mean_p * t + m0.mean_p2;
  const double mean_x = f * t * t / (2.0 * m) + m0.mean_p * t / m + m0.mean_x;
  const double mean_x2 = f * f * t * t * t * t / (4.0 * m * m) + f * m0.mean_p * t * t * t / (m * m) +
                         m0.mean_p2 * t * t / (m * m) + f * m0.mean_x * t * t / m + xp_sym0 * t / m +
                         m0.mean_x2;
  const double var_p = mean_p2 - mean_p * mean_p;
  const double var_x = mean_x2 - mean_x * mean_x;
  const double cov = m0.cov_xp + m0.sigma_p * m0.sigma_p * t / m;
  return MomentReport::from_moments(mean_x, var_x, mean_p, var_p, cov, t);
}

// --- family dispatch -----------------------------------------------------------

MomentReport analytic_moments(const PacketSpec& spec, double t) {
  return std::visit(
      [t](const auto& s) -> MomentReport {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) return gaussian_moments(s, t);
        if constexpr (std::is_same_v<T, SqueezedSpec>) return squeezed_moments(s, t);
        if constexpr (std::is_same_v<T, SuperpositionSpec>) return superposition_moments_far(s, t).report;
        if constexpr (std::is_same_v<T, OscillatorSpec>) return sho_moments(s, t);
        if constexpr (std::is_same_v<T, AccelerationSpec>) return accel_moments(s, t);
      },
      spec);
}

ComplexField analytic_psi(const PacketSpec& spec, const Grid1D& grid, double t) {
  return std::visit(
      [&](const auto& s) -> ComplexField {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) return gaussian_psi(s, grid, t);
        if constexpr (std::is_same_v<T, SqueezedSpec>) return squeezed_psi(s, grid, t);
        if constexpr (std::is_same_v<T, SuperpositionSpec>) return superposition_psi(s, grid, t);
        if constexpr (std::is_same_v<T, OscillatorSpec>) return sho_psi(s, grid, t);
        if constexpr (std::is_same_v<T, AccelerationSpec>) return to_position(accel_phi(s, grid, t));
      },
      spec);
}

ComplexField analytic_phi0(const PacketSpec& spec, const Grid1D& grid) {
  return std::visit(
      [&](const auto& s) -> ComplexField {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) return gaussian_phi(s, grid, 0.0);
        if constexpr (std::is_same_v<T, SqueezedSpec>) return squeezed_phi(s, grid, 0.0);
        if constexpr (std::is_same_v<T, SuperpositionSpec>) return superposition_phi(s, grid, 0.0);
        if constexpr (std::is_same_v<T, OscillatorSpec>) return to_momentum(sho_psi(s, grid, 0.0));
        if constexpr (std::is_same_v<T, AccelerationSpec>) return accel_phi(s, grid, 0.0);
      },
      spec);
}

}  // namespace wpl
