#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "wavepacket/analytic.hpp"

using namespace wpl;
using oracle::vec;

namespace {

const GaussianSpec kReference = GaussianSpec::from_beta(2.0, -4.0, 4.0);
const SqueezedSpec kSqueezed(kReference, -2.0);
const SuperpositionSpec kFar({-5, 2}, {5, -2}, 1.0, kPi / 4);

/// Finite-difference moments of the pointwise closed form on a fine grid of
/// the oracle's own; the library grid only supplies the integration range.
oracle::Moments fd_moments(const PacketSpec& spec, double t) {
  const Grid1D g = make_grid(spec, t);
  const double hbar = g.hbar();
  if (const auto* acc = std::get_if<AccelerationSpec>(&spec)) {
    const double reach = std::max(std::abs(g.xmin()), std::abs(g.xmax()));
    const double mid = acc->force() * t + analytic_moments(spec, 0.0).mean_p;
    const double half = 40.0 / acc->gaussian().alpha();
    return oracle::moments_of([&](double p) { return accel_phi_at(*acc, p, t); }, mid - half, mid + half,
                              0.05 / reach, hbar, true);
  }
  const auto f = std::visit(
      [&](const auto& s) -> std::function<cplx(double)> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) return [&s, t](double x) { return gaussian_psi_at(s, x, t); };
        if constexpr (std::is_same_v<T, SqueezedSpec>) return [&s, t](double x) { return squeezed_psi_at(s, x, t); };
        if constexpr (std::is_same_v<T, SuperpositionSpec>) return [&s, t](double x) { return superposition_psi_at(s, x, t); };
        if constexpr (std::is_same_v<T, OscillatorSpec>) return [&s, t](double x) { return sho_psi_at(s, x, t); };
        return {};
      },
      spec);
  return oracle::moments_of(f, g.xmin(), g.xmax(), 0.05 / g.p_max(), hbar);
}

void check_against_oracle(const MomentReport& r, const oracle::Moments& m, double tol) {
  CHECK(m.norm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(r.mean_x - m.mean_x) < tol);
  CHECK(std::abs(r.mean_p - m.mean_p) < tol);
  CHECK(std::abs(r.sigma_x - m.sigma_x()) < tol);
  CHECK(std::abs(r.sigma_p - m.sigma_p()) < tol);
  CHECK(std::abs(r.cov_xp - m.cov) < tol);
}

}  // namespace

TEST_CASE("gaussian fields against the textbook form") {
  const Grid1D g = make_grid(kReference, 8.0);
  for (double t : {0.0, 1.3, 4.0, 8.0}) {
    const ComplexField psi = gaussian_psi(kReference, g, t);
    const auto ref = oracle::sample(g.positions(), [&](double x) {
      return oracle::free_gaussian(2.0, -4.0, 4.0, 1.0, 1.0, x, t);
    });
    CHECK(oracle::max_diff_up_to_phase(vec(psi.values()), ref) < 1e-12);
  }
  // Peak of |psi|^2 at t=0 sits at x0 with height 1/(sqrt(pi) beta).
  CHECK(std::norm(gaussian_psi_at(kReference, -4.0, 0.0)) == doctest::Approx(1.0 / (2.0 * std::sqrt(kPi))).epsilon(1e-14));
  CHECK(std::abs(gaussian_phi_at(kReference, 4.0, 0.0)) == doctest::Approx(std::sqrt(2.0 / std::sqrt(kPi))).epsilon(1e-14));
  // At t=2t0 the center is at 28 and beta_t = 2 sqrt(5).
  const double peak = std::norm(gaussian_psi_at(kReference, 28.0, 8.0));
  CHECK(peak == doctest::Approx(1.0 / (std::sqrt(kPi) * 2.0 * std::sqrt(5.0))).epsilon(1e-13));
  CHECK(std::norm(gaussian_psi_at(kReference, 28.0 + 2.0 * std::sqrt(5.0), 8.0)) ==
        doctest::Approx(peak * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("gaussian phi: norm, stationary modulus and Fourier pairing") {
  const Grid1D g = make_grid(kReference, 8.0);
  REQUIRE(g.size() <= 1024);
  for (double t : {0.0, 2.0, 8.0}) {
    const ComplexField phi = gaussian_phi(kReference, g, t);
    CHECK(phi.norm() == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t k = 0; k < g.size(); k += 17) {
      CHECK(std::abs(phi.values()[k]) == doctest::Approx(std::abs(gaussian_phi_at(kReference, g.p(k), 0.0))).epsilon(1e-13));
    }
    const ComplexField psi = gaussian_psi(kReference, g, t);
    const auto direct = oracle::direct_dft(g.positions(), vec(psi.values()), g.momenta(), 1.0);
    CHECK(oracle::max_diff(direct, vec(phi.values())) < 1e-8);
  }
}

TEST_CASE("gaussian moments") {
  const MomentReport r0 = gaussian_moments(kReference, 0.0);
  CHECK(r0.mean_x == -4.0);
  CHECK(r0.mean_p == 4.0);
  CHECK(r0.cov_xp == 0.0);
  CHECK(r0.rho == 0.0);
  CHECK(r0.sigma_x * r0.sigma_p == doctest::Approx(0.5).epsilon(1e-15));

  const MomentReport r8 = gaussian_moments(kReference, 8.0);
  CHECK(r8.cov_xp == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r8.rho == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-14));
  CHECK(r8.sigma_x == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));
  CHECK(r8.mean_x == doctest::Approx(28.0));

  for (double t : {0.0, 2.0, 4.0, 8.0, 16.0}) {
    check_against_oracle(gaussian_moments(kReference, t), fd_moments(kReference, t), 1e-7);
  }
}

TEST_CASE("spread curve and general spread") {
  const MomentReport r0 = gaussian_moments(kReference, 0.0);
  const SpreadCurve c = spread_curve(r0, 1.0);
  CHECK(c.dx0_sq == doctest::Approx(2.0));
  CHECK(c.linear_coeff == 0.0);
  CHECK(c.quad_coeff == doctest::Approx(0.125));
  CHECK(c.argmin() == 0.0);
  CHECK(c.is_valid());

  const MomentReport s0 = squeezed_moments(kSqueezed, 0.0);
  for (double t : oracle::linspace(0.0, 16.0, 33)) {
    const double direct = squeezed_moments(kSqueezed, t).sigma_x;
    CHECK(general_spread(s0, 1.0, t) == doctest::Approx(direct * direct).epsilon(1e-12));
  }
  CHECK(spread_curve(s0, 1.0).argmin() == doctest::Approx(8.0));

  // An impossible report (width collapses to zero) is flagged.
  CHECK_FALSE(spread_curve(MomentReport::from_moments(0, 1.0, 0, 0.01, -1.0, 0), 1.0).is_valid());
}

TEST_CASE("squeezed family") {
  SUBCASE("C = 0 reduces to the plain Gaussian") {
    const SqueezedSpec plain(kReference, 0.0);
    for (double t : {0.0, 3.0}) {
      for (double x : {-8.0, -4.0, 0.5, 12.0}) {
        CHECK(std::abs(squeezed_psi_at(plain, x, t) - gaussian_psi_at(kReference, x, t)) < 1e-15);
      }
    }
  }
  SUBCASE("width b(t)") {
    CHECK(squeezed_width(kSqueezed, 0.0) == doctest::Approx(2.0 * std::sqrt(5.0)));
    CHECK(squeezed_width(kSqueezed, 8.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(squeezed_moments(kSqueezed, 8.0).sigma_x == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  }
  SUBCASE("moments at t = 0") {
    const MomentReport r = squeezed_moments(kSqueezed, 0.0);
    CHECK(r.rho == doctest::Approx(-2.0 / std::sqrt(5.0)).epsilon(1e-14));
    CHECK(r.sigma_x * r.sigma_p == doctest::Approx(0.5 * std::sqrt(5.0)).epsilon(1e-14));
    CHECK(r.cov_xp == doctest::Approx(-1.0));
  }
  SUBCASE("fields agree with the closed moments") {
    const Grid1D g = make_grid(kSqueezed, 16.0);
    for (double t : {0.0, 4.0, 8.0, 12.0, 16.0}) {
      const ComplexField psi = squeezed_psi(kSqueezed, g, t);
      CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-9));
      check_against_oracle(squeezed_moments(kSqueezed, t), fd_moments(kSqueezed, t), 1e-7);
      const auto direct = oracle::direct_dft(g.positions(), vec(psi.values()), g.momenta(), 1.0);
      if (g.size() <= 1024) CHECK(oracle::max_diff(direct, vec(squeezed_phi(kSqueezed, g, t).values())) < 1e-8);
    }
  }
  SUBCASE("minimum found by scanning sampled widths") {
    double best_t = -1.0, best = 1e300;
    for (double t : oracle::linspace(0.0, 16.0, 161)) {
      const double w = fd_moments(kSqueezed, t).var_x;
      if (w < best) {
        best = w;
        best_t = t;
      }
    }
    CHECK(best_t == doctest::Approx(8.0).epsilon(1e-12));
  }
}

TEST_CASE("shift transform") {
  const Grid1D g = make_grid(kReference, 8.0);
  const ComplexField phi = gaussian_phi(kReference, g, 0.0);
  CHECK(oracle::max_diff(vec(shift_transform(phi, 0.0, 0.0).values()), vec(phi.values())) < 1e-15);
  CHECK_THROWS_AS(shift_transform(gaussian_psi(kReference, g, 0.0), 1.0, 0.0), SpecError);

  const ComplexField moved = to_position(shift_transform(phi, 3.0, 0.0));
  double mean = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) mean += g.x(j) * std::norm(moved.values()[j]) * g.dx();
  CHECK(mean == doctest::Approx(-1.0).epsilon(1e-10));
  std::size_t peak = 0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (std::abs(moved.values()[j]) > std::abs(moved.values()[peak])) peak = j;
  }
  CHECK(std::abs(g.x(peak) + 1.0) <= g.dx());

  const ShiftPair shift = squeezed_equivalent_shift(kSqueezed);
  CHECK(shift.a == doctest::Approx(2.0 * 4.0 * 4.0));
  CHECK(shift.tau == doctest::Approx(8.0));
  const Grid1D gs = make_grid(kSqueezed, 8.0);
  for (double t : {0.0, 5.0}) {
    const ComplexField shifted = shift_transform(gaussian_phi(kReference, gs, t), shift.a, shift.tau);
    const ComplexField squeezed = squeezed_phi(kSqueezed, gs, t);
    CHECK(oracle::max_diff_up_to_phase(vec(shifted.values()), vec(squeezed.values())) < 1e-12);
    std::size_t top = 0;
    for (std::size_t k = 0; k < gs.size(); ++k) {
      if (std::abs(squeezed.values()[k]) > std::abs(squeezed.values()[top])) top = k;
    }
    const cplx phase = squeezed.values()[top] / shifted.values()[top];
    // exp(-i C alpha^2 p0^2 / 2) with C = -2, alpha = 2, p0 = 4.
    CHECK(std::arg(phase) == doctest::Approx(std::remainder(64.0, 2 * kPi)).epsilon(1e-9));
  }
}

TEST_CASE("superposition normalization and fields") {
  CHECK(superposition_norm(SuperpositionSpec({-5, 2}, {5, -2}, 1.0, 0.0)) == doctest::Approx(1.0));
  CHECK(superposition_norm(SuperpositionSpec({1, 1}, {1, 1}, 1.0, kPi / 4)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(superposition_norm(kFar) == doctest::Approx(1.0).epsilon(1e-9));

  // Moderately overlapping case: check N against a Simpson integral of |psi|^2.
  const SuperpositionSpec near({-1, 0.5}, {1.0, -0.2}, 1.3, 0.6);
  const auto xs = oracle::linspace(-30.0, 30.0, 6001);
  std::vector<double> dens;
  for (double x : xs) dens.push_back(std::norm(superposition_psi_at(near, x, 0.0)));
  CHECK(oracle::simpson(dens, xs[1] - xs[0]) == doctest::Approx(1.0).epsilon(1e-10));

  const SuperpositionSpec single({-5, 2}, {5, -2}, 1.0, 0.0);
  const GaussianSpec a = single.component_a();
  for (double x : {-7.0, -5.0, -2.0}) {
    CHECK(std::abs(superposition_psi_at(single, x, 1.0) - gaussian_psi_at(a, x, 1.0)) < 1e-15);
  }

  const Grid1D g = make_grid(kFar, 8.0);
  for (double t : {0.0, 2.0, 8.0}) {
    const ComplexField psi = superposition_psi(kFar, g, t);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
  const ComplexField psi0 = superposition_psi(kFar, g, 0.0);
  double left = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (g.x(j) < 0.0) left += std::norm(psi0.values()[j]) * g.dx();
  }
  CHECK(left == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("far-apart superposition moments") {
  const FarApartMoments m0 = superposition_moments_far(kFar, 0.0);
  CHECK(m0.far_apart);
  CHECK(m0.separation == doctest::Approx(29.0));
  CHECK(m0.report.sigma_x * m0.report.sigma_x == doctest::Approx(25.5));
  CHECK(m0.report.sigma_p * m0.report.sigma_p == doctest::Approx(4.5));
  CHECK(m0.report.correlation_term() == doctest::Approx(-20.0));

  const double tmin = oracle::argmin([](double t) {
    const double s = superposition_moments_far(kFar, t).report.sigma_x;
    return s * s;
  }, 0.0, 10.0);
  CHECK(tmin == doctest::Approx(20.0 / 9.0).epsilon(1e-6));

  for (double t : {0.0, 1.0, 20.0 / 9.0, 5.0, 8.0}) {
    check_against_oracle(superposition_moments_far(kFar, t).report, fd_moments(kFar, t), 1e-7);
  }

  const auto theta0 = superposition_moments_far(SuperpositionSpec({-5, 2}, {5, -2}, 1.0, 0.0), 3.0).report;
  const auto single = gaussian_moments(kFar.component_a(), 3.0);
  CHECK(theta0.sigma_x == doctest::Approx(single.sigma_x));
  CHECK(theta0.cov_xp == doctest::Approx(single.cov_xp));
  CHECK(theta0.mean_x == doctest::Approx(single.mean_x));

  CHECK_FALSE(superposition_moments_far(SuperpositionSpec({-1, 0}, {1, 0}, 1.0, kPi / 4), 0.0).far_apart);
}

TEST_CASE("oscillator closed form") {
  const OscillatorSpec sho(2.0, 4.0, 1.0);
  const Grid1D g = make_grid(sho, sho.period());

  SUBCASE("initial state") {
    const ComplexField psi = sho_psi(sho, g, 0.0);
    const auto ref = oracle::sample(g.positions(), [](double x) {
      return std::polar(std::exp(-x * x / 8.0) / std::sqrt(2.0 * std::sqrt(kPi)), 4.0 * x);
    });
    CHECK(oracle::max_diff(vec(psi.values()), ref) < 1e-14);
  }
  SUBCASE("moments against sampled fields, including multiples of pi/2w") {
    for (double t : {0.0, kPi / 8, kPi / 4, kPi / 2, 1.0, kPi, 3 * kPi / 2, 5.0, 2 * kPi}) {
      const MomentReport r = sho_moments(sho, t);
      check_against_oracle(r, fd_moments(sho, t), 1e-7);
      const double a2 = 4.0 * std::pow(std::cos(t), 2) + std::pow(0.5 * std::sin(t), 2);
      CHECK(r.sigma_x * r.sigma_x == doctest::Approx(a2 / 2.0).epsilon(1e-13));
      CHECK(r.sigma_x * r.sigma_x * r.sigma_p * r.sigma_p - r.cov_xp * r.cov_xp == doctest::Approx(0.25).epsilon(1e-12));
    }
    CHECK(std::abs(sho_moments(sho, kPi / 2).cov_xp) < 1e-14);
    CHECK(std::abs(sho_moments(sho, kPi).cov_xp) < 1e-14);
    CHECK(sho_center(sho, kPi / 2) == doctest::Approx(4.0));
  }
  SUBCASE("continuous through sin(wt) = 0") {
    for (double tk : {kPi, 2 * kPi}) {
      for (double x : {-3.0, 0.0, 2.5}) {
        const cplx at = sho_psi_at(sho, x, tk);
        CHECK(std::abs(sho_psi_at(sho, x, tk - 1e-9) - at) < 1e-7);
        CHECK(std::abs(sho_psi_at(sho, x, tk + 1e-9) - at) < 1e-7);
      }
    }
    // One full period returns the initial state up to the ground-state phase.
    const auto back = vec(sho_psi(sho, g, 2 * kPi).values());
    CHECK(oracle::max_diff_up_to_phase(back, vec(sho_psi(sho, g, 0.0).values())) < 1e-12);
  }
  SUBCASE("coherent width is rigid") {
    const OscillatorSpec coherent(1.0, 4.0, 1.0);
    for (double t : oracle::linspace(0.0, 2 * kPi, 16)) {
      CHECK(std::abs(sho_width_factor(coherent, t)) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(sho_moments(coherent, t).cov_xp) < 1e-14);
    }
  }
}

TEST_CASE("oscillator release") {
  const OscillatorSpec sho(2.0, 4.0, 1.0);
  const MomentReport at0 = sho_release(sho, 0.0);
  CHECK(at0.cov_xp == 0.0);
  CHECK(std::abs(sho_release(OscillatorSpec(1.0, 4.0, 1.0), 0.7).cov_xp) < 1e-14);

  const double tr = kPi / 8;
  const MomentReport rel = sho_release(sho, tr);
  CHECK(std::abs(rel.cov_xp) > 0.1);

  // Independent route: read the complex width off the released field and
  // evolve it freely.
  const Grid1D g = make_grid(sho, sho.period());
  const auto psi = vec(sho_psi(sho, g, tr).values());
  std::size_t centre = 0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    if (std::abs(g.x(j) - rel.mean_x) < std::abs(g.x(centre) - rel.mean_x)) centre = j;
  }
  const cplx width = oracle::log_curvature_width(psi, centre, g.dx());
  for (double t : oracle::linspace(0.0, 20.0, 11)) {
    CHECK(general_spread(rel, 1.0, t) == doctest::Approx(oracle::released_variance(width, 1.0, 1.0, t)).epsilon(1e-5));
  }
}

TEST_CASE("uniform force") {
  SUBCASE("F = 0 and tiny F reduce to free evolution") {
    for (double f : {0.0, 1e-300, 1e-12}) {
      const AccelerationSpec acc(kReference, f);
      for (double t : {0.0, 2.0, 8.0}) {
        for (double p : {2.0, 4.0, 5.5}) {
          CHECK(std::abs(accel_phi_at(acc, p, t) - gaussian_phi_at(kReference, p, t)) < 1e-9);
        }
      }
    }
  }
  SUBCASE("moments from sampled fields") {
    for (const AccelerationSpec& acc : {AccelerationSpec(GaussianSpec::from_beta(1.0, 0.0, 0.0), 1.0),
                                        AccelerationSpec(kReference, -0.75), AccelerationSpec(kSqueezed, 0.5)}) {
      const Grid1D g = make_grid(acc, 8.0);
      const MomentReport r0 = accel_moments(acc, 0.0);
      for (double t : {0.0, 1.0, 2.0, 8.0}) {
        const MomentReport r = accel_moments(acc, t);
        const ComplexField phi = accel_phi(acc, g, t);
        CHECK(phi.norm() == doctest::Approx(1.0).epsilon(1e-9));
        check_against_oracle(r, fd_moments(acc, t), 1e-7);
        CHECK(r.sigma_p == doctest::Approx(r0.sigma_p).epsilon(1e-14));
        CHECK(r.mean_p == doctest::Approx(acc.force() * t + r0.mean_p));
        const double free_spread = general_spread(analytic_moments(acc.base().index() == 0
                                                                       ? PacketSpec(acc.gaussian())
                                                                       : PacketSpec(std::get<SqueezedSpec>(acc.base())),
                                                                   0.0),
                                                  1.0, t);
        CHECK(r.sigma_x * r.sigma_x == doctest::Approx(free_spread).epsilon(1e-12));
      }
    }
    CHECK(accel_moments(AccelerationSpec(GaussianSpec::from_beta(1.0, 0.0, 0.0), 1.0), 2.0).mean_x == doctest::Approx(2.0));
  }
}

TEST_CASE("dispatch agrees with sampled fields for every family") {
  const std::vector<PacketSpec> specs = {kReference, kSqueezed, kFar, OscillatorSpec(2.0, 4.0, 1.0),
                                         AccelerationSpec(kReference, 1.0)};
  for (const PacketSpec& spec : specs) {
    CAPTURE(family_name(spec));
    const double t_end = 2.0 * spreading_time(spec);
    const Grid1D g = make_grid(spec, t_end);
    CHECK(oracle::max_diff(vec(to_position(analytic_phi0(spec, g)).values()),
                           vec(analytic_psi(spec, g, 0.0).values())) < 1e-9);
    for (double t : {0.0, 0.5 * t_end, t_end}) {
      check_against_oracle(analytic_moments(spec, t), fd_moments(spec, t), 1e-7);
    }
  }
}

TEST_CASE("samplers reject grids that truncate the packet") {
  const Grid1D narrow(256, -6.0, 0.0);
  CHECK_THROWS_AS(gaussian_psi(kReference, narrow, 0.0), GridError);
  CHECK_THROWS_AS(gaussian_psi(kReference, Grid1D(256, -30.0, 30.0), 8.0), GridError);
}
