#include <algorithm>
#include <cmath>
#include <limits>

#include "wavepacket/analytic.hpp"
#include "wavepacket/core.hpp"

namespace wpl {
namespace {

constexpr int kTimeSamples = 1024;

/// Phase-space box a packet (or one lump of it) occupies over [0, t_max].
struct Extent {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -std::numeric_limits<double>::infinity();
  double sigma_x = 0.0;
  double p_lo = std::numeric_limits<double>::infinity();
  double p_hi = -std::numeric_limits<double>::infinity();
  double sigma_p = 0.0;

  void add(const MomentReport& m) {
    x_lo = std::min(x_lo, m.mean_x);
    x_hi = std::max(x_hi, m.mean_x);
    sigma_x = std::max(sigma_x, m.sigma_x);
    p_lo = std::min(p_lo, m.mean_p);
    p_hi = std::max(p_hi, m.mean_p);
    sigma_p = std::max(sigma_p, m.sigma_p);
  }
};

template <typename MomentsAt>
Extent sweep(double t_max, MomentsAt&& moments_at) {
  Extent e;
  for (int i = 0; i <= kTimeSamples; ++i) {
    e.add(moments_at(t_max * i / kTimeSamples));
  }
  return e;
}

std::vector<Extent> extents(const PacketSpec& spec, double t_max) {
  return std::visit(
      [t_max](const auto& s) -> std::vector<Extent> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SuperpositionSpec>) {
          // Each lump is padded by its own width, not by the lump separation.
          const GaussianSpec a = s.component_a();
          const GaussianSpec b = s.component_b();
          return {sweep(t_max, [&](double t) { return gaussian_moments(a, t); }),
                  sweep(t_max, [&](double t) { return gaussian_moments(b, t); })};
        } else if constexpr (std::is_same_v<T, OscillatorSpec>) {
          // Bounds over a full period regardless of t_max.
          const Constants& c = s.constants();
          const double lambda = c.hbar / (c.mass * s.omega() * s.beta());
          const double amplitude = std::abs(s.p0()) / (c.mass * s.omega());
          Extent e;
          e.x_lo = -amplitude;
          e.x_hi = amplitude;
          e.sigma_x = std::max(s.beta(), lambda) / std::sqrt(2.0);
          e.p_lo = -std::abs(s.p0());
          e.p_hi = std::abs(s.p0());
          e.sigma_p = std::max(c.hbar / s.beta(), c.mass * s.omega() * s.beta()) / std::sqrt(2.0);
          return {e};
        } else if constexpr (std::is_same_v<T, AccelerationSpec>) {
          Extent e = sweep(t_max, [&](double t) { return accel_moments(s, t); });
          // <x>_t is a parabola; include its vertex when it falls inside the window.
          const double f = s.force();
          if (f != 0.0) {
            const double vertex = -s.gaussian().p0() / f;
            if (vertex > 0.0 && vertex < t_max) e.add(accel_moments(s, vertex));
          }
          return {e};
        } else {
          return {sweep(t_max, [&](double t) { return analytic_moments(PacketSpec(s), t); })};
        }
      },
      spec);
}

struct Layout {
  double xmin;
  double xmax;
  std::size_t points;
};

Layout layout(const PacketSpec& spec, double t_max, double padding) {
  if (!std::isfinite(t_max) || t_max < 0.0) throw SpecError("t_max must be finite and >= 0");
  if (!std::isfinite(padding) || padding < 4.0) throw SpecError("padding must be >= 4");
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double p_cover = 0.0;
  for (const Extent& e : extents(spec, t_max)) {
    xmin = std::min(xmin, e.x_lo - padding * e.sigma_x);
    xmax = std::max(xmax, e.x_hi + padding * e.sigma_x);
    p_cover = std::max({p_cover, std::abs(e.p_lo - padding * e.sigma_p),
                        std::abs(e.p_hi + padding * e.sigma_p)});
  }
  if (!std::isfinite(xmin) || !std::isfinite(xmax) || !std::isfinite(p_cover)) {
    throw SpecError("packet extent is not finite");
  }
  // p_max = pi hbar n / L must reach p_cover.
  const double hbar = constants_of(spec).hbar;
  const double needed = (xmax - xmin) * p_cover / (kPi * hbar);
  if (needed > 1e9) throw GridError("packet needs more than 1e9 grid points");
  const auto points = next_power_of_two(
      std::max<std::size_t>(kMinGridPoints, static_cast<std::size_t>(std::ceil(needed))));
  return {xmin, xmax, points};
}

}  // namespace

Grid1D make_grid(const PacketSpec& spec, double t_max, double padding, std::size_t min_points) {
  const Layout l = layout(spec, t_max, padding);
  const std::size_t n = std::max(l.points, next_power_of_two(std::max(min_points, kMinGridPoints)));
  return Grid1D(n, l.xmin, l.xmax, constants_of(spec));
}

std::size_t required_points(const PacketSpec& spec, double t_max, double padding) {
  return layout(spec, t_max, padding).points;
}

}  // namespace wpl
