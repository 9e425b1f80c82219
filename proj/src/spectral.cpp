#include "wavepacket/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fft.hpp"

namespace wpl {
namespace {

constexpr cplx kI{0.0, 1.0};

/// Momentum of FFT bin m, matching the grid's [-n/2, n/2) index range.
double bin_momentum(const Grid1D& g, std::size_t m) {
  const std::size_t n = g.size();
  const auto q = m < n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
  return q * g.dp();
}

double max_abs_difference(std::span<const cplx> a, std::span<const cplx> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

ComplexField evolve_free(const ComplexField& field, double t) {
  ComplexField phi = to_momentum(field);
  const Grid1D& g = phi.grid();
  const double mh = g.constants().mass * g.hbar();
  auto& values = phi.mutable_values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double p = g.p(k);
    values[k] *= std::polar(1.0, -p * p * t / (2.0 * mh));
  }
  phi.set_time(field.time() + t);
  return field.is_position() ? to_position(phi) : phi;
}

ComplexField evolve_split_step(const ComplexField& psi0, std::span<const double> potential, double dt,
                               std::size_t n_steps) {
  const ComplexField start = to_position(psi0);
  const Grid1D& g = start.grid();
  const std::size_t n = g.size();
  if (potential.size() != n) throw SpecError("potential sample count does not match grid");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw SpecError("split-step dt must be > 0");

  const double hbar = g.hbar();
  const double mass = g.constants().mass;
  std::vector<cplx> half_kick(n), full_kick(n), drift(n);
  for (std::size_t j = 0; j < n; ++j) {
    half_kick[j] = std::polar(1.0, -potential[j] * dt / (2.0 * hbar));
    full_kick[j] = half_kick[j] * half_kick[j];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double p = bin_momentum(g, m);
    drift[m] = std::polar(inv_n, -p * p * dt / (2.0 * mass * hbar));
  }

  std::vector<cplx> psi(start.values().begin(), start.values().end());
  if (n_steps > 0) {
    for (std::size_t j = 0; j < n; ++j) psi[j] *= half_kick[j];
    for (std::size_t step = 0; step < n_steps; ++step) {
      detail::fft_forward(psi);
      for (std::size_t m = 0; m < n; ++m) psi[m] *= drift[m];
      detail::fft_backward(psi);
      // Adjacent half kicks of consecutive steps merge into one full kick.
      const auto& kick = step + 1 == n_steps ? half_kick : full_kick;
      for (std::size_t j = 0; j < n; ++j) psi[j] *= kick[j];
    }
  }
  return ComplexField(g, std::move(psi), Representation::position,
                      start.time() + dt * static_cast<double>(n_steps));
}

ConvergenceCheck check_split_step_convergence(const ComplexField& psi0, std::span<const double> potential,
                                              double dt, std::size_t n_steps) {
  const ComplexField coarse = evolve_split_step(psi0, potential, dt, n_steps);
  const ComplexField mid = evolve_split_step(psi0, potential, dt / 2.0, 2 * n_steps);
  const ComplexField fine = evolve_split_step(psi0, potential, dt / 4.0, 4 * n_steps);
  ConvergenceCheck out;
  out.coarse_change = max_abs_difference(coarse.values(), mid.values());
  out.fine_change = max_abs_difference(mid.values(), fine.values());
  out.ratio = out.fine_change > 0.0 ? out.coarse_change / out.fine_change : 0.0;
  out.passed = out.coarse_change < kConvergenceFloor || out.ratio >= kSecondOrderRatio;
  return out;
}

ComplexField evolve_split_step_checked(const ComplexField& psi0, std::span<const double> potential,
                                       double dt, std::size_t n_steps) {
  const ConvergenceCheck check = check_split_step_convergence(psi0, potential, dt, n_steps);
  if (!check.passed) {
    std::ostringstream msg;
    msg << "split-step convergence check failed: halving dt reduced the change by " << check.ratio
        << "x (need >= " << kSecondOrderRatio << "x); reduce dt";
    throw ConvergenceError(msg.str());
  }
  return evolve_split_step(psi0, potential, dt, n_steps);
}

std::vector<double> harmonic_potential(const Grid1D& grid, double omega) {
  const double k = grid.constants().mass * omega * omega / 2.0;
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = k * grid.x(j) * grid.x(j);
  return v;
}

std::vector<double> linear_potential(const Grid1D& grid, double force) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = -force * grid.x(j);
  return v;
}

Propagator Propagator::free() { return Propagator({}, 0.0); }

Propagator Propagator::in_potential(std::vector<double> potential, double dt) {
  if (potential.empty()) throw SpecError("potential propagator needs potential samples");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw SpecError("propagator dt must be > 0");
  return Propagator(std::move(potential), dt);
}

std::size_t Propagator::steps_for(double duration) const {
  if (is_free() || duration <= 0.0) return 0;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / dt_ - 1e-9)));
}

ComplexField Propagator::advance(const ComplexField& field, double duration) const {
  if (is_free()) return evolve_free(field, duration);
  if (duration < 0.0) throw SpecError("split-step propagation only runs forward in time");
  const std::size_t steps = steps_for(duration);
  if (steps == 0) return to_position(field);
  ComplexField out = evolve_split_step(field, potential_, duration / static_cast<double>(steps), steps);
  out.set_time(field.time() + duration);
  return out;
}

MomentReport quadrature_moments(const ComplexField& field) {
  require_normalized(field, "quadrature_moments");
  const ComplexField psi = to_position(field);
  const ComplexField phi = to_momentum(field);
  const Grid1D& g = psi.grid();
  const std::size_t n = g.size();
  const auto v = psi.values();
  const auto w = phi.values();

  double mean_x = 0.0, mean_p = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += g.x(i) * std::norm(v[i]);
    mean_p += g.p(i) * std::norm(w[i]);
  }
  mean_x *= g.dx();
  mean_p *= g.dp();

  double var_x = 0.0, var_p = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = g.x(i) - mean_x;
    const double q = g.p(i) - mean_p;
    var_x += u * u * std::norm(v[i]);
    var_p += q * q * std::norm(w[i]);
  }
  var_x *= g.dx();
  var_p *= g.dp();

  // Re <(x - <x>)(p - <p>)> is the symmetric covariance.
  const auto d = spectral_derivative(psi);
  double cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx p_psi = -kI * g.hbar() * d[i] - mean_p * v[i];
    cov += (std::conj(v[i]) * (g.x(i) - mean_x) * p_psi).real();
  }
  cov *= g.dx();
  return MomentReport::from_moments(mean_x, var_x, mean_p, var_p, cov, field.time());
}

ConvergenceSweep convergence_sweep(const std::function<std::vector<double>(int level)>& op, int levels,
                                   double floor) {
  if (levels < 2) throw SpecError("convergence_sweep needs at least two refinements");
  std::vector<std::vector<double>> results;
  results.reserve(static_cast<std::size_t>(levels) + 1);
  for (int level = 0; level <= levels; ++level) results.push_back(op(level));
  const auto& finest = results.back();

  ConvergenceSweep out;
  for (int level = 0; level < levels; ++level) {
    const auto& r = results[static_cast<std::size_t>(level)];
    if (r.size() != finest.size()) throw SpecError("convergence_sweep: result sizes differ between levels");
    double worst = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) worst = std::max(worst, std::abs(r[i] - finest[i]));
    out.errors.push_back(worst);
  }
  for (std::size_t i = 1; i < out.errors.size(); ++i) {
    if (out.errors[i] >= floor && out.errors[i] >= out.errors[i - 1]) out.monotone = false;
  }
  return out;
}

}  // namespace wpl
