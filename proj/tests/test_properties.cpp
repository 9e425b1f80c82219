#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "wavepacket/analytic.hpp"
#include "wavepacket/observables.hpp"
#include "wavepacket/spectral.hpp"

using namespace wpl;
using oracle::vec;

namespace {

class SpecSampler {
 public:
  explicit SpecSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

  Constants constants() { return {uniform(0.5, 2.0), uniform(0.5, 2.0)}; }

  GaussianSpec gaussian() {
    const Constants c = constants();
    return GaussianSpec(uniform(0.5, 2.5) / c.hbar, uniform(-5, 5), uniform(-3, 3), c);
  }

  /// Components at least ~6 widths apart in phase space so the far-apart formulas apply.
  SuperpositionSpec far_superposition() {
    const double beta = uniform(0.5, 1.5);
    const double gap = uniform(8.0, 12.0) * beta;
    const double xa = uniform(-3, 3);
    return SuperpositionSpec({xa, uniform(-2, 2)}, {xa + gap, uniform(-2, 2)}, beta, uniform(0.0, kPi / 2));
  }

  PacketSpec any() {
    switch (std::uniform_int_distribution<int>(0, 4)(rng_)) {
      case 0: return gaussian();
      case 1: return SqueezedSpec(gaussian(), uniform(-3, 3));
      case 2: return far_superposition();
      case 3: {
        const Constants c = constants();
        return OscillatorSpec(uniform(0.5, 2.5), uniform(-3, 3), uniform(0.3, 2.0), c);
      }
      default: {
        const AccelerationBase base = uniform(0, 1) < 0.5 ? AccelerationBase(gaussian())
                                                          : AccelerationBase(SqueezedSpec(gaussian(), uniform(-2, 2)));
        return AccelerationSpec(base, uniform(-1, 1));
      }
    }
  }

 private:
  std::mt19937_64 rng_;
};

double sample_time(SpecSampler& s, const PacketSpec& spec) {
  if (const auto* sho = std::get_if<OscillatorSpec>(&spec)) return s.uniform(0.0, sho->period());
  return s.uniform(0.0, 4.0 * spreading_time(spec));
}

MomentReport moments_of(const PacketSpec& spec, double t) {
  if (const auto* sup = std::get_if<SuperpositionSpec>(&spec)) return superposition_moments_far(*sup, t).report;
  return analytic_moments(spec, t);
}

}  // namespace

TEST_CASE("uncertainty and correlation bounds hold for closed-form moments") {
  SpecSampler s(20240917);
  for (int i = 0; i < 500; ++i) {
    const PacketSpec spec = s.any();
    const double t = sample_time(s, spec);
    const double hbar = constants_of(spec).hbar;
    const MomentReport m = moments_of(spec, t);
    CAPTURE(family_name(spec));
    CAPTURE(t);
    CHECK(m.satisfies_uncertainty(hbar));
    CHECK(m.rho_bound_slack(hbar) >= -1e-9);
  }
}

TEST_CASE("bounds and exact pieces on sampled fields") {
  SpecSampler s(7);
  for (int i = 0; i < 25; ++i) {
    const PacketSpec spec = s.any();
    const double t = sample_time(s, spec);
    CAPTURE(family_name(spec));
    CAPTURE(t);
    const Grid1D g = make_grid(spec, t);
    const ComplexField psi = analytic_psi(spec, g, t);
    const double hbar = g.hbar();
    const MomentReport q = quadrature_moments(psi);
    CHECK(q.satisfies_uncertainty(hbar));
    CHECK(q.rho_bound_slack(hbar) >= -1e-9);
    CHECK(covariance_quadrature(psi).imag_residue < 1e-9);

    const KineticSplit k = kinetic_split(psi, q.mean_x);
    CHECK(std::abs(k.t_plus + k.t_minus - k.total) < 1e-9 * std::max(1.0, k.total));
    CHECK(k.t_plus >= -1e-12);
    CHECK(k.t_minus >= -1e-12);
  }
}

TEST_CASE("general spread reproduces the direct width for the free families") {
  SpecSampler s(99);
  for (int i = 0; i < 40; ++i) {
    const PacketSpec spec = [&]() -> PacketSpec {
      switch (i % 4) {
        case 0: return s.gaussian();
        case 1: return SqueezedSpec(s.gaussian(), s.uniform(-3, 3));
        case 2: return s.far_superposition();
        default: return AccelerationSpec(SqueezedSpec(s.gaussian(), s.uniform(-2, 2)), s.uniform(-1, 1));
      }
    }();
    CAPTURE(family_name(spec));
    const double mass = constants_of(spec).mass;
    const MomentReport initial = moments_of(spec, 0.0);
    for (double t : oracle::linspace(0.0, 4.0 * spreading_time(spec), 20)) {
      const double direct = moments_of(spec, t).sigma_x;
      CHECK(std::abs(general_spread(initial, mass, t) - direct * direct) < 1e-9 * std::max(1.0, direct * direct));
    }
  }
}

TEST_CASE("free evolution group properties and marginal stationarity") {
  SpecSampler s(31337);
  for (int i = 0; i < 15; ++i) {
    const GaussianSpec base = s.gaussian();
    const PacketSpec spec = i % 2 ? PacketSpec(base) : PacketSpec(SqueezedSpec(base, s.uniform(-3, 3)));
    const double t1 = s.uniform(0, 2) * spreading_time(spec), t2 = s.uniform(0, 2) * spreading_time(spec);
    const Grid1D g = make_grid(spec, t1 + t2);
    const ComplexField phi0 = analytic_phi0(spec, g);
    const ComplexField direct = evolve_free(phi0, t1 + t2);
    CHECK(oracle::max_diff(vec(evolve_free(evolve_free(phi0, t1), t2).values()), vec(direct.values())) < 1e-12);
    CHECK(oracle::max_diff(vec(evolve_free(direct, -(t1 + t2)).values()), vec(phi0.values())) < 1e-12);
    CHECK(direct.norm() == doctest::Approx(1.0).epsilon(1e-10));

    const MomentReport m0 = quadrature_moments(phi0);
    const MomentReport mt = quadrature_moments(direct);
    CHECK(std::abs(mt.sigma_p - m0.sigma_p) < 1e-9);
    CHECK(std::abs(mt.mean_x - (m0.mean_x + m0.mean_p * (t1 + t2) / g.constants().mass)) < 1e-8);
  }
}

TEST_CASE("uniform force keeps the momentum spread") {
  SpecSampler s(4242);
  for (int i = 0; i < 6; ++i) {
    const GaussianSpec base = s.gaussian();
    const double force = s.uniform(-1, 1);
    const AccelerationSpec acc(base, force);
    const double t_end = spreading_time(acc);
    const Grid1D g = make_grid(acc, t_end);
    const Propagator step = Propagator::in_potential(linear_potential(g, force), t_end / 2000.0);
    ComplexField psi = to_position(analytic_phi0(acc, g));
    const MomentReport m0 = quadrature_moments(psi);
    const double mass = g.constants().mass;
    for (double t : oracle::linspace(0.0, t_end, 4)) {
      psi = step.advance(psi, t - psi.time());
      const MomentReport m = quadrature_moments(psi);
      CHECK(std::abs(m.sigma_p - m0.sigma_p) < 1e-8);
      CHECK(std::abs(m.mean_x - (force * t * t / (2 * mass) + m0.mean_p * t / mass + m0.mean_x)) < 1e-8);
    }
  }
}

TEST_CASE("normalize is idempotent on random fields") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  const Grid1D g(256, -10.0, 10.0);
  for (int i = 0; i < 20; ++i) {
    std::vector<cplx> v(g.size());
    for (auto& z : v) z = {n01(rng), n01(rng)};
    const ComplexField once = normalize(ComplexField(g, v, Representation::position, 0.0));
    const ComplexField twice = normalize(once);
    CHECK(once.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracle::max_diff(vec(once.values()), vec(twice.values())) < 1e-12);
  }
}
