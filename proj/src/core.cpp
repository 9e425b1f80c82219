#include "wavepacket/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "fft.hpp"

namespace wpl {
namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw SpecError(std::string(name) + " must be finite");
  }
}

void require_positive(double value, const char* name) {
  require_finite(value, name);
  if (value <= 0.0) {
    throw SpecError(std::string(name) + " must be > 0");
  }
}

}  // namespace

void Constants::validate() const {
  require_positive(hbar, "hbar");
  require_positive(mass, "mass");
}

GaussianSpec::GaussianSpec(double alpha, double x0, double p0, Constants constants)
    : alpha_(alpha), x0_(x0), p0_(p0), constants_(constants) {
  constants_.validate();
  require_positive(alpha_, "alpha");
  require_finite(x0_, "x0");
  require_finite(p0_, "p0");
}

GaussianSpec GaussianSpec::from_beta(double beta, double x0, double p0, Constants constants) {
  constants.validate();
  require_positive(beta, "beta");
  return GaussianSpec(beta / constants.hbar, x0, p0, constants);
}

double GaussianSpec::sigma_x0() const { return beta() / std::sqrt(2.0); }
double GaussianSpec::sigma_p0() const { return 1.0 / (alpha_ * std::sqrt(2.0)); }

SqueezedSpec::SqueezedSpec(GaussianSpec base, double squeeze) : base_(base), squeeze_(squeeze) {
  require_finite(squeeze_, "squeeze");
}

SuperpositionSpec::SuperpositionSpec(PhasePoint a, PhasePoint b, double beta, double theta,
                                     Constants constants)
    : a_(a), b_(b), beta_(beta), theta_(theta), constants_(constants) {
  constants_.validate();
  require_finite(a_.x, "xA");
  require_finite(a_.p, "pA");
  require_finite(b_.x, "xB");
  require_finite(b_.p, "pB");
  require_positive(beta_, "beta");
  require_finite(theta_, "theta");
  if (theta_ < 0.0 || theta_ > kPi / 2.0) {
    throw SpecError("theta must lie in [0, pi/2]");
  }
}

GaussianSpec SuperpositionSpec::component_a() const {
  return GaussianSpec::from_beta(beta_, a_.x, a_.p, constants_);
}

GaussianSpec SuperpositionSpec::component_b() const {
  return GaussianSpec::from_beta(beta_, b_.x, b_.p, constants_);
}

double SuperpositionSpec::separation() const {
  const double dx = a_.x - b_.x;
  const double dp = a_.p - b_.p;
  const double hbar = constants_.hbar;
  return dx * dx / (4.0 * beta_ * beta_) + dp * dp * beta_ * beta_ / (4.0 * hbar * hbar);
}

OscillatorSpec::OscillatorSpec(double beta, double p0, double omega, Constants constants)
    : beta_(beta), p0_(p0), omega_(omega), constants_(constants) {
  constants_.validate();
  require_positive(beta_, "beta");
  require_finite(p0_, "p0");
  require_positive(omega_, "omega");
}

double OscillatorSpec::coherent_beta() const {
  return std::sqrt(constants_.hbar / (constants_.mass * omega_));
}

bool OscillatorSpec::is_coherent(double tolerance) const {
  return std::abs(beta_ - coherent_beta()) < tolerance;
}

AccelerationSpec::AccelerationSpec(AccelerationBase base, double force)
    : base_(std::move(base)), force_(force) {
  require_finite(force_, "force");
}

const GaussianSpec& AccelerationSpec::gaussian() const {
  if (const auto* g = std::get_if<GaussianSpec>(&base_)) return *g;
  return std::get<SqueezedSpec>(base_).base();
}

double AccelerationSpec::squeeze() const {
  if (const auto* s = std::get_if<SqueezedSpec>(&base_)) return s->squeeze();
  return 0.0;
}

const Constants& constants_of(const PacketSpec& spec) {
  return std::visit(
      [](const auto& s) -> const Constants& {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SqueezedSpec>) {
          return s.base().constants();
        } else {
          return s.constants();
        }
      },
      spec);
}

double spreading_time(const PacketSpec& spec) {
  const Constants& c = constants_of(spec);
  const double beta = std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SqueezedSpec>) {
          return s.base().beta();
        } else if constexpr (std::is_same_v<T, AccelerationSpec>) {
          return s.gaussian().beta();
        } else {
          return s.beta();
        }
      },
      spec);
  return c.mass * beta * beta / c.hbar;
}

std::string family_name(const PacketSpec& spec) {
  static constexpr const char* kNames[] = {"gaussian", "squeezed", "superposition", "sho",
                                           "accelerated"};
  return kNames[spec.index()];
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Grid1D::Grid1D(std::size_t n, double xmin, double xmax, Constants constants)
    : n_(n), xmin_(xmin), xmax_(xmax), constants_(constants) {
  constants_.validate();
  if (!is_power_of_two(n_) || n_ < kMinGridPoints) {
    throw SpecError("grid point count must be a power of two >= 256, got " + std::to_string(n_));
  }
  require_finite(xmin_, "xmin");
  require_finite(xmax_, "xmax");
  if (!(xmax_ > xmin_)) throw SpecError("grid requires xmax > xmin");
}

double Grid1D::dp() const {
  return 2.0 * kPi * constants_.hbar / (static_cast<double>(n_) * dx());
}

double Grid1D::p_max() const { return kPi * constants_.hbar / dx(); }

double Grid1D::p(std::size_t k) const {
  return (static_cast<double>(k) - static_cast<double>(n_ / 2)) * dp();
}

std::vector<double> Grid1D::positions() const {
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = x(j);
  return out;
}

std::vector<double> Grid1D::momenta() const {
  std::vector<double> out(n_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = p(k);
  return out;
}

ComplexField::ComplexField(Grid1D grid, std::vector<cplx> values, Representation representation,
                           double time)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      representation_(representation),
      time_(time) {
  if (values_.size() != grid_.size()) {
    throw SpecError("field sample count does not match grid");
  }
}

double ComplexField::spacing() const { return is_position() ? grid_.dx() : grid_.dp(); }

double ComplexField::norm() const {
  double sum = 0.0;
  for (const cplx& v : values_) sum += std::norm(v);
  return sum * spacing();
}

double ComplexField::coordinate(std::size_t i) const {
  return is_position() ? grid_.x(i) : grid_.p(i);
}

void require_normalized(const ComplexField& field, const char* what) {
  const double n = field.norm();
  if (!(std::abs(n - 1.0) <= kNormTolerance)) {
    std::ostringstream msg;
    msg << what << ": field is not normalized (norm = " << n << ")";
    throw SpecError(msg.str());
  }
}

ComplexField normalize(ComplexField field) {
  const double n = field.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw SpecError("cannot normalize a zero-norm field");
  }
  const double scale = 1.0 / std::sqrt(n);
  for (cplx& v : field.mutable_values()) v *= scale;
  return field;
}

ComplexField to_momentum(const ComplexField& field) {
  if (!field.is_position()) return field;
  const Grid1D& g = field.grid();
  const std::size_t n = g.size();
  const std::size_t half = n / 2;
  std::vector<cplx> work(field.values().begin(), field.values().end());
  detail::fft_forward(work);
  const double scale = g.dx() / std::sqrt(2.0 * kPi * g.hbar());
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    // p_k = (k - n/2) dp sits at FFT bin (k - n/2) mod n = (k + n/2) mod n.
    const std::size_t bin = (k + half) % n;
    const double phase = -g.p(k) * g.xmin() / g.hbar();
    out[k] = scale * std::polar(1.0, phase) * work[bin];
  }
  return ComplexField(g, std::move(out), Representation::momentum, field.time());
}

ComplexField to_position(const ComplexField& field) {
  if (field.is_position()) return field;
  const Grid1D& g = field.grid();
  const std::size_t n = g.size();
  const std::size_t half = n / 2;
  std::vector<cplx> work(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = g.p(k) * g.xmin() / g.hbar();
    work[(k + half) % n] = std::polar(1.0, phase) * field.values()[k];
  }
  detail::fft_backward(work);
  const double scale = g.dp() / std::sqrt(2.0 * kPi * g.hbar());
  for (cplx& v : work) v *= scale;
  return ComplexField(g, std::move(work), Representation::position, field.time());
}

std::vector<cplx> spectral_derivative(const ComplexField& field) {
  ComplexField phi = to_momentum(field);
  const Grid1D& g = phi.grid();
  auto& values = phi.mutable_values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] *= cplx(0.0, g.p(k) / g.hbar());
  }
  // The Nyquist bin has no symmetric partner; drop it.
  values[0] = 0.0;
  ComplexField out = to_position(phi);
  const auto v = out.values();
  return {v.begin(), v.end()};
}

MomentReport MomentReport::from_moments(double mean_x, double var_x, double mean_p, double var_p,
                                        double cov_xp, double time) {
  MomentReport r;
  r.mean_x = mean_x;
  r.mean_p = mean_p;
  r.sigma_x = std::sqrt(std::max(var_x, 0.0));
  r.sigma_p = std::sqrt(std::max(var_p, 0.0));
  r.mean_x2 = mean_x * mean_x + var_x;
  r.mean_p2 = mean_p * mean_p + var_p;
  r.cov_xp = cov_xp;
  const double denom = r.sigma_x * r.sigma_p;
  r.rho = denom > 0.0 ? cov_xp / denom : 0.0;
  r.time = time;
  return r;
}

bool MomentReport::satisfies_uncertainty(double hbar) const {
  return sigma_x * sigma_p >= hbar / 2.0 - 1e-9;
}

double MomentReport::rho_bound_slack(double hbar) const {
  const double ratio = hbar / (2.0 * sigma_x * sigma_p);
  return 1.0 - ratio * ratio - rho * rho;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace wpl
