#include "wavepacket/observables.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"

namespace wpl {
namespace {

constexpr cplx kI{0.0, 1.0};

double fraction_shift(double p0_alpha, double s) {
  return (2.0 / std::sqrt(kPi)) * (p0_alpha / (2.0 * p0_alpha * p0_alpha + 1.0)) * s /
         std::sqrt(1.0 + s * s);
}

/// Int_{xmin}^{a} f dx for samples of a smooth, decaying f, from the
/// antiderivative of its trigonometric interpolant.
double spectral_cumulative(const Grid1D& grid, std::span<const double> f, double a) {
  const std::size_t n = grid.size();
  std::vector<cplx> c(f.begin(), f.end());
  detail::fft_forward(c);
  const double length = grid.xmax() - grid.xmin();
  const double offset = a - grid.xmin();
  double sum = c[0].real() / static_cast<double>(n) * offset;
  cplx periodic = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    if (m == n / 2) continue;
    const double q = m < n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
    const double kappa = 2.0 * kPi * q / length;
    periodic += c[m] * (std::polar(1.0, kappa * offset) - 1.0) / (kI * kappa);
  }
  sum += periodic.real() / static_cast<double>(n);
  return sum;
}

struct Spread {
  double mean_x, sigma_x, mean_p, sigma_p;
};

Spread field_spread(const ComplexField& field) {
  const ComplexField psi = to_position(field);
  const ComplexField phi = to_momentum(field);
  auto moments = [](const ComplexField& f) {
    double m1 = 0.0, w = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i) {
      const double d = std::norm(f.values()[i]);
      m1 += f.coordinate(i) * d;
      w += d;
    }
    m1 /= w;
    double m2 = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i) {
      const double u = f.coordinate(i) - m1;
      m2 += u * u * std::norm(f.values()[i]);
    }
    return std::pair{m1, std::sqrt(m2 / w)};
  };
  const auto [mx, sx] = moments(psi);
  const auto [mp, sp] = moments(phi);
  return {mx, sx, mp, sp};
}

double trapezoid(std::span<const double> axis, std::span<const double> values, std::size_t stride,
                 std::size_t offset) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < axis.size(); ++k) {
    sum += 0.5 * (axis[k + 1] - axis[k]) *
           (values[offset + k * stride] + values[offset + (k + 1) * stride]);
  }
  return sum;
}

}  // namespace

CovarianceResult covariance_quadrature(const ComplexField& field) {
  require_normalized(field, "covariance_quadrature");
  const ComplexField psi = to_position(field);
  const ComplexField phi = to_momentum(field);
  const Grid1D& g = psi.grid();
  const std::size_t n = g.size();
  const double hbar = g.hbar();
  const auto v = psi.values();

  double mean_x = 0.0, mean_p = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += g.x(i) * std::norm(v[i]);
    mean_p += g.p(i) * std::norm(phi.values()[i]);
  }
  mean_x *= g.dx();
  mean_p *= g.dp();
  double var_x = 0.0, var_p = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    var_x += std::pow(g.x(i) - mean_x, 2) * std::norm(v[i]);
    var_p += std::pow(g.p(i) - mean_p, 2) * std::norm(phi.values()[i]);
  }
  var_x *= g.dx();
  var_p *= g.dp();

  // <(x-<x>)(p-<p>)> + <(p-<p>)(x-<x>)>, each ordering evaluated separately.
  std::vector<cplx> shifted(n);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = (g.x(i) - mean_x) * v[i];
  const auto d_psi = spectral_derivative(psi);
  const auto d_shifted =
      spectral_derivative(ComplexField(g, shifted, Representation::position, psi.time()));
  cplx sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx p_psi = -kI * hbar * d_psi[i] - mean_p * v[i];
    const cplx p_shifted = -kI * hbar * d_shifted[i] - mean_p * shifted[i];
    sum += std::conj(v[i]) * ((g.x(i) - mean_x) * p_psi + p_shifted);
  }
  sum *= g.dx();

  CovarianceResult out;
  out.cov = sum.real() / 2.0;
  out.imag_residue = std::abs(sum.imag()) / 2.0;
  const double denom = std::sqrt(var_x * var_p);
  out.rho = denom > 0.0 ? out.cov / denom : 0.0;
  return out;
}

std::vector<double> kinetic_density(const ComplexField& field) {
  const ComplexField psi = to_position(field);
  const Constants& c = psi.grid().constants();
  const auto d = spectral_derivative(psi);
  std::vector<double> density(d.size());
  const double scale = c.hbar * c.hbar / (2.0 * c.mass);
  for (std::size_t i = 0; i < d.size(); ++i) density[i] = scale * std::norm(d[i]);
  return density;
}

KineticSplit kinetic_split(const ComplexField& field, double mean_x) {
  const ComplexField psi = to_position(field);
  const Grid1D& g = psi.grid();
  if (!std::isfinite(mean_x) || !g.contains(mean_x)) {
    throw SpecError("kinetic_split: split point lies outside the grid");
  }
  const auto density = kinetic_density(psi);
  KineticSplit out;
  out.time = psi.time();
  double total = 0.0;
  for (double d : density) total += d;
  out.total = total * g.dx();
  out.t_minus = spectral_cumulative(g, density, mean_x);
  out.t_plus = out.total - out.t_minus;
  if (out.total > 0.0) {
    out.r_plus = out.t_plus / out.total;
    out.r_minus = 1.0 - out.r_plus;
  }
  return out;
}

KineticFractions r_fraction_closed(const GaussianSpec& spec, double t) {
  return r_fraction_closed(SqueezedSpec(spec, 0.0), t);
}

KineticFractions r_fraction_closed(const SqueezedSpec& spec, double t) {
  const GaussianSpec& g = spec.base();
  const double shift = fraction_shift(g.p0() * g.alpha(), spec.squeeze() + t / g.t0());
  return {0.5 + shift, 0.5 - shift};
}

std::vector<double> centered_axis(double center, double half_width, std::size_t count) {
  if (count < 2) throw SpecError("axis needs at least two points");
  std::vector<double> axis(count);
  const double step = 2.0 * half_width / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    axis[i] = center - half_width + step * static_cast<double>(i);
  }
  return axis;
}

WignerGrid wigner_numeric(const ComplexField& field, std::span<const double> x_axis,
                          std::span<const double> p_axis, std::size_t threads) {
  require_normalized(field, "wigner_numeric");
  const ComplexField phi = to_momentum(field);
  const Grid1D& g = phi.grid();
  const std::size_t n = g.size();
  const double hbar = g.hbar();

  // Band-limited interpolation onto a grid of half the spacing: the product
  // psi*(x+y) psi(x-y) carries twice the field's bandwidth in y.
  const std::size_t fine_n = 2 * n;
  const double h = g.dx() / 2.0;
  const Grid1D fine(fine_n, g.xmin(), g.xmin() + h * static_cast<double>(fine_n), g.constants());
  std::vector<cplx> fine_phi(fine_n, 0.0);
  for (std::size_t k = 0; k < n; ++k) fine_phi[k + n / 2] = phi.values()[k];
  double peak_density = 0.0;
  for (const cplx& v : to_position(field).values()) peak_density = std::max(peak_density, std::norm(v));
  const double trim = 1e-18 * peak_density;

  WignerGrid out;
  out.x_axis.assign(x_axis.begin(), x_axis.end());
  out.p_axis.assign(p_axis.begin(), p_axis.end());
  out.time = field.time();
  const std::size_t np = p_axis.size();
  out.values.assign(x_axis.size() * np, 0.0);
  std::vector<double> row_residue(x_axis.size(), 0.0);

  parallel_for(x_axis.size(), threads, [&](std::size_t row) {
    const double x = x_axis[row];
    const double pos = (x - fine.xmin()) / h;
    if (!(pos >= 0.0) || pos > static_cast<double>(fine_n - 1)) return;
    const auto j0 = static_cast<std::size_t>(std::lround(pos));
    const double delta = x - fine.x(j0);

    // psi_delta(x_j) = psi(x_j + delta) on the fine grid.
    std::vector<cplx> shifted = fine_phi;
    for (std::size_t k = 0; k < fine_n; ++k) shifted[k] *= std::polar(1.0, fine.p(k) * delta / hbar);
    const ComplexField psi_delta =
        to_position(ComplexField(fine, std::move(shifted), Representation::momentum, field.time()));
    const auto v = psi_delta.values();

    const std::size_t kmax = std::min(j0, fine_n - 1 - j0);
    std::vector<cplx> integrand(2 * kmax + 1);
    std::ptrdiff_t first = -1, last = -1;
    for (std::size_t i = 0; i < integrand.size(); ++i) {
      const std::size_t k_plus = j0 + i - kmax;   // x + y, y = (i - kmax) h
      const std::size_t k_minus = j0 + kmax - i;  // x - y
      integrand[i] = std::conj(v[k_plus]) * v[k_minus];
      if (std::abs(integrand[i]) > trim) {
        if (first < 0) first = static_cast<std::ptrdiff_t>(i);
        last = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (first < 0) return;

    double residue = 0.0;
    const double scale = h / (kPi * hbar);
    for (std::size_t j = 0; j < np; ++j) {
      const double step_phase = 2.0 * p_axis[j] * h / hbar;
      const cplx step = std::polar(1.0, step_phase);
      cplx sum = 0.0;
      cplx w = 1.0;
      for (std::ptrdiff_t i = first; i <= last; ++i) {
        const std::ptrdiff_t offset = i - first;
        if (offset % 256 == 0) {
          const auto y_index = static_cast<double>(i - static_cast<std::ptrdiff_t>(kmax));
          w = std::polar(1.0, step_phase * y_index);
        }
        sum += integrand[static_cast<std::size_t>(i)] * w;
        w *= step;
      }
      sum *= scale;
      out.values[row * np + j] = sum.real();
      residue = std::max(residue, std::abs(sum.imag()));
    }
    row_residue[row] = residue;
  });
  out.max_imag_residue = *std::max_element(row_residue.begin(), row_residue.end());
  return out;
}

WignerGrid wigner_numeric(const ComplexField& field, std::size_t points, std::size_t threads) {
  const Spread s = field_spread(field);
  const auto xs = centered_axis(s.mean_x, kDefaultWignerSpan * s.sigma_x, points);
  const auto ps = centered_axis(s.mean_p, kDefaultWignerSpan * s.sigma_p, points);
  return wigner_numeric(field, xs, ps, threads);
}

double wigner_gaussian_closed(const GaussianSpec& spec, double x, double p, double t) {
  return wigner_squeezed_closed(SqueezedSpec(spec, 0.0), x, p, t);
}

double wigner_squeezed_closed(const SqueezedSpec& spec, double x, double p, double t) {
  const GaussianSpec& g = spec.base();
  const Constants& c = g.constants();
  const double dp = p - g.p0();
  const double u = x - g.x0() - p * t / c.mass - spec.squeeze() * dp * g.t0() / c.mass;
  const double beta = g.beta();
  return std::exp(-dp * dp * g.alpha() * g.alpha()) * std::exp(-u * u / (beta * beta)) /
         (kPi * c.hbar);
}

std::vector<double> position_marginal(const WignerGrid& grid) {
  std::vector<double> out(grid.x_axis.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = trapezoid(grid.p_axis, grid.values, 1, i * grid.p_axis.size());
  }
  return out;
}

std::vector<double> momentum_marginal(const WignerGrid& grid) {
  std::vector<double> out(grid.p_axis.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = trapezoid(grid.x_axis, grid.values, grid.p_axis.size(), j);
  }
  return out;
}

double wigner_integral(const WignerGrid& grid) {
  const auto marginal = position_marginal(grid);
  return trapezoid(grid.x_axis, marginal, 1, 0);
}

std::vector<double> contour_levels(const WignerGrid& grid, std::span<const double> fractions) {
  if (grid.empty()) throw SpecError("contour_levels: empty Wigner grid");
  const double peak = *std::max_element(grid.values.begin(), grid.values.end());
  if (!(peak > 0.0)) throw SpecError("contour_levels: Wigner grid has no positive peak");
  std::vector<double> levels;
  levels.reserve(fractions.size());
  for (double f : fractions) levels.push_back(f * peak);
  return levels;
}

}  // namespace wpl
