#include "ratelab/volume_models.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <shared_mutex>

#include "ratelab/errors.hpp"
#include "ratelab/quadrature.hpp"

namespace ratelab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kTinyRadius = std::numeric_limits<double>::min();

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(fmt::format("parameter {} must be positive and finite, got {}", name, v));
  }
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelManifold

ModelManifold::ModelManifold(int dimension, Warp warp) : dimension_(dimension), warp_(std::move(warp)) {
  if (dimension_ < 1) throw DomainError(fmt::format("dimension n must be >= 1, got {}", dimension_));
}

ModelManifold ModelManifold::euclidean(int dimension) { return {dimension, EuclideanWarp{}}; }

ModelManifold ModelManifold::hyperbolic(int dimension, double kappa) {
  require_positive(kappa, "kappa");
  return {dimension, HyperbolicWarp{kappa}};
}

ModelManifold ModelManifold::cusp(int dimension, double a, double r0) {
  require_positive(a, "a");
  require_positive(r0, "r0");
  // ln f = ln r + b1 r + b2 r^2 on [0, r0]; match ln f(r0) = -a r0 and (ln f)'(r0) = -a.
  const double target_value = -a * r0 - std::log(r0);
  const double target_slope = -a - 1.0 / r0;
  const double b2 = (target_slope * r0 - target_value) / (r0 * r0);
  const double b1 = target_slope - 2.0 * b2 * r0;
  return {dimension, CuspWarp{a, r0, b1, b2}};
}

ModelManifold ModelManifold::flat(int dimension) { return {dimension, FlatWarp{}}; }

ModelManifold ModelManifold::tabulated(int dimension, std::vector<double> r, std::vector<double> f,
                                       bool pole_regular) {
  if (r.size() != f.size() || r.size() < 2) throw DomainError("tabulated warp needs at least two (r, f) pairs");
  std::vector<double> log_f(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(r[i] > 0.0)) throw DomainError("tabulated warp radii must be positive");
    require_positive(f[i], "f");
    log_f[i] = std::log(f[i]);
  }
  return {dimension, TabulatedWarp{MonotoneCubic(std::move(r), std::move(log_f)), pole_regular}};
}

bool ModelManifold::pole_regular() const {
  return std::visit(overloaded{[](const FlatWarp&) { return false; },
                               [](const TabulatedWarp& w) { return w.pole_regular; },
                               [](const auto&) { return true; }},
                    warp_);
}

double ModelManifold::log_warp(double r) const {
  return std::visit(
      overloaded{
          [&](const EuclideanWarp&) { return std::log(r); },
          [&](const HyperbolicWarp& w) {
            const double x = w.kappa * r;
            if (x > 20.0) return x - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * x)) - std::log(w.kappa);
            return std::log(std::sinh(x) / w.kappa);
          },
          [&](const CuspWarp& w) {
            if (r >= w.r0) return -w.a * r;
            return std::log(r) + w.b1 * r + w.b2 * r * r;
          },
          [&](const FlatWarp&) { return 0.0; },
          [&](const TabulatedWarp& w) {
            const auto& t = w.log_f;
            if (r < t.front()) {
              const double v0 = t.y().front();
              return w.pole_regular ? v0 + std::log(r / t.front()) : v0;
            }
            if (r > t.back()) return t.y().back() + t.derivative(t.back()) * (r - t.back());
            return t(r);
          }},
      warp_);
}

double ModelManifold::warp_log_derivative(double r) const {
  return std::visit(overloaded{
                        [&](const EuclideanWarp&) { return 1.0 / r; },
                        [&](const HyperbolicWarp& w) { return w.kappa / std::tanh(w.kappa * r); },
                        [&](const CuspWarp& w) {
                          if (r >= w.r0) return -w.a;
                          return 1.0 / r + w.b1 + 2.0 * w.b2 * r;
                        },
                        [&](const FlatWarp&) { return 0.0; },
                        [&](const TabulatedWarp& w) {
                          const auto& t = w.log_f;
                          if (r < t.front()) return w.pole_regular ? 1.0 / r : 0.0;
                          if (r > t.back()) return t.derivative(t.back());
                          return t.derivative(r);
                        }},
                    warp_);
}

double ModelManifold::log_unit_sphere_area() const {
  const double half_n = 0.5 * dimension_;
  return std::numbers::ln2 + half_n * std::log(std::numbers::pi) - std::lgamma(half_n);
}

std::string ModelManifold::describe() const {
  return std::visit(
      overloaded{[&](const EuclideanWarp&) { return fmt::format("manifold:euclidean,n={}", dimension_); },
                 [&](const HyperbolicWarp& w) {
                   return fmt::format("manifold:hyperbolic,n={},kappa={}", dimension_, w.kappa);
                 },
                 [&](const CuspWarp& w) {
                   return fmt::format("manifold:cusp,n={},a={},r0={}", dimension_, w.a, w.r0);
                 },
                 [&](const FlatWarp&) { return fmt::format("manifold:flat,n={}", dimension_); },
                 [&](const TabulatedWarp& w) {
                   return fmt::format("manifold:tabulated,n={},knots={},pole_regular={}", dimension_,
                                      w.log_f.x().size(), w.pole_regular ? 1 : 0);
                 }},
      warp_);
}

double radial_drift(const ModelManifold& manifold, double r) {
  if (!(r > 0.0)) throw DomainError(fmt::format("radial drift needs r > 0, got r = {}", r));
  if (manifold.dimension() == 1) return 0.0;
  return 0.5 * (manifold.dimension() - 1) * manifold.warp_log_derivative(r);
}

// ---------------------------------------------------------------------------
// CumulativeVolumeTable

namespace {

// Knot k >= 1 sits at 2^{-10} * 2^{(k-1)/4}; knot 0 is the pole.
constexpr int kKnotsPerOctave = 4;
constexpr int kFirstKnotExponent = -10;
constexpr std::array<double, kKnotsPerOctave> kOctaveFractions = {
    1.0, 1.189207115002721066717, 1.414213562373095048802, 1.681792830507429086062};

double knot_radius(std::size_t k) {
  if (k == 0) return 0.0;
  const std::size_t j = k - 1;
  return std::ldexp(kOctaveFractions[j % kKnotsPerOctave],
                    kFirstKnotExponent + static_cast<int>(j / kKnotsPerOctave));
}

}  // namespace

struct CumulativeVolumeTable::State {
  mutable std::shared_mutex mutex;
  std::vector<double> radii{0.0};
  std::vector<double> log_cumulative{-std::numeric_limits<double>::infinity()};
};

CumulativeVolumeTable::CumulativeVolumeTable(ModelManifold manifold)
    : manifold_(std::move(manifold)), state_(std::make_unique<State>()) {
  extend_to(64.0);
}

CumulativeVolumeTable::~CumulativeVolumeTable() = default;

namespace {

// ln ∫_a^b exp(g). Panels where g varies by more than 30 are halved, the half
// with the larger bound first, and a half bounded 40 below the other is dropped.
template <class G>
double log_integral_exp(const G& g, double a, double b, int depth) {
  const double m = 0.5 * (a + b);
  const double ga = g(a);
  const double gm = g(m);
  const double gb = g(b);
  const double hi = std::max({ga, gm, gb});
  double lo = std::numeric_limits<double>::infinity();
  for (double v : {ga, gm, gb}) {
    if (std::isfinite(v)) lo = std::min(lo, v);
  }
  if (hi - lo <= 30.0 || depth >= 64) {
    QuadratureOptions opts;
    // Rounding in g itself limits the attainable relative accuracy.
    const double magnitude = std::max({std::isfinite(ga) ? std::abs(ga) : 0.0, std::abs(gm), std::abs(gb)});
    opts.rel_tol = std::max(1e-13, 256.0 * std::numeric_limits<double>::epsilon() * magnitude);
    opts.abs_tol = 0.0;
    opts.max_subdivisions = 2000;
    const auto res = integrate([&](double s) { return std::exp(g(s) - hi); }, a, b, opts);
    return hi + std::log(res.value);
  }
  const double left_bound = std::max(ga, gm) + std::log(m - a);
  const double right_bound = std::max(gm, gb) + std::log(b - m);
  const bool right_first = right_bound >= left_bound;
  const double first = right_first ? log_integral_exp(g, m, b, depth + 1) : log_integral_exp(g, a, m, depth + 1);
  if ((right_first ? left_bound : right_bound) < first - 40.0) return first;
  const double second = right_first ? log_integral_exp(g, a, m, depth + 1) : log_integral_exp(g, m, b, depth + 1);
  return log_add_exp(first, second);
}

}  // namespace

double CumulativeVolumeTable::log_partial(double a, double b) const {
  const int n = manifold_.dimension();
  if (n == 1) return std::log(b - a);
  const double power = n - 1;
  auto log_density = [&](double s) {
    return s > 0.0 ? power * manifold_.log_warp(s) : -std::numeric_limits<double>::infinity();
  };
  return log_integral_exp(log_density, a, b, 0);
}

void CumulativeVolumeTable::extend_to(double r) const {
  std::unique_lock lock(state_->mutex);
  auto& radii = state_->radii;
  auto& cumulative = state_->log_cumulative;
  if (radii.back() >= r) return;
  const double target = std::max(r, 2.0 * radii.back());
  while (radii.back() < target) {
    const std::size_t k = radii.size();
    const double lo = radii.back();
    const double hi = knot_radius(k);
    cumulative.push_back(log_add_exp(cumulative.back(), log_partial(lo, hi)));
    radii.push_back(hi);
  }
}

double CumulativeVolumeTable::cached_radius() const {
  std::shared_lock lock(state_->mutex);
  return state_->radii.back();
}

double CumulativeVolumeTable::log_volume(double r) const {
  if (!(r > 0.0)) throw DomainError(fmt::format("ball volume needs r > 0, got r = {}", r));
  double knot = 0.0;
  double base = 0.0;
  for (;;) {
    {
      std::shared_lock lock(state_->mutex);
      const auto& radii = state_->radii;
      if (radii.back() >= r) {
        auto it = std::upper_bound(radii.begin(), radii.end(), r);
        const auto k = static_cast<std::size_t>(it - radii.begin()) - 1;
        knot = radii[k];
        base = state_->log_cumulative[k];
        break;
      }
    }
    extend_to(r);
  }
  const double total = r > knot ? log_add_exp(base, log_partial(knot, r)) : base;
  return manifold_.log_unit_sphere_area() + total;
}

// ---------------------------------------------------------------------------
// VolumeGrowthModel

std::string to_string(GrowthFamily family) {
  switch (family) {
    case GrowthFamily::Power: return "power";
    case GrowthFamily::ExpPower: return "exppower";
    case GrowthFamily::ExpQuad: return "expquad";
    case GrowthFamily::ExpQuadLog: return "expquadlog";
    case GrowthFamily::FiniteVolume: return "finite";
    case GrowthFamily::Tabulated: return "tabulated";
    case GrowthFamily::FromManifold: return "manifold";
  }
  return "unknown";
}

VolumeGrowthModel VolumeGrowthModel::power(double C, double D) {
  require_positive(C, "C");
  require_positive(D, "D");
  return {Power{C, D}, kTinyRadius};
}

VolumeGrowthModel VolumeGrowthModel::exp_power(double C, double alpha) {
  require_positive(C, "C");
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw DomainError(fmt::format("exppower needs 0 < alpha < 2, got alpha = {}", alpha));
  }
  return {ExpPower{C, alpha}, kTinyRadius};
}

VolumeGrowthModel VolumeGrowthModel::exp_quad(double C) {
  require_positive(C, "C");
  return {ExpQuad{C}, kTinyRadius};
}

VolumeGrowthModel VolumeGrowthModel::exp_quad_log(double C) {
  require_positive(C, "C");
  // r^2 ln r decreases below e^{-1/2}; start at 1 so the law is nondecreasing.
  return {ExpQuadLog{C}, 1.0};
}

VolumeGrowthModel VolumeGrowthModel::finite_volume(double V_total) {
  require_positive(V_total, "V");
  return {Finite{V_total}, kTinyRadius};
}

VolumeGrowthModel VolumeGrowthModel::tabulated(std::vector<double> r, std::vector<double> log_volume) {
  if (r.size() != log_volume.size() || r.size() < 2) {
    throw DomainError("tabulated volume law needs at least two (r, ln_volume) pairs");
  }
  std::vector<double> log_r(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0) || !std::isfinite(r[i])) throw DomainError("tabulated radii must be positive and finite");
    if (!std::isfinite(log_volume[i])) throw DomainError("tabulated ln_volume values must be finite");
    if (i > 0 && !(r[i] > r[i - 1])) {
      throw MonotonicityError(fmt::format("tabulated radii must be strictly increasing (row {})", i + 1));
    }
    if (i > 0 && log_volume[i] < log_volume[i - 1]) {
      throw MonotonicityError(fmt::format("tabulated ln_volume decreases at row {}", i + 1));
    }
    log_r[i] = std::log(r[i]);
  }
  const std::size_t n = r.size();
  const double tail = (log_volume[n - 1] - log_volume[n - 2]) / (log_r[n - 1] - log_r[n - 2]);
  const double lo = r.front();
  return {Table{MonotoneCubic(std::move(log_r), std::move(log_volume)), tail}, lo};
}

VolumeGrowthModel VolumeGrowthModel::from_manifold(ModelManifold manifold) {
  return {Manifold{std::make_shared<CumulativeVolumeTable>(std::move(manifold))}, kTinyRadius};
}

GrowthFamily VolumeGrowthModel::family() const {
  return std::visit(overloaded{[](const Power&) { return GrowthFamily::Power; },
                               [](const ExpPower&) { return GrowthFamily::ExpPower; },
                               [](const ExpQuad&) { return GrowthFamily::ExpQuad; },
                               [](const ExpQuadLog&) { return GrowthFamily::ExpQuadLog; },
                               [](const Finite&) { return GrowthFamily::FiniteVolume; },
                               [](const Table&) { return GrowthFamily::Tabulated; },
                               [](const Manifold&) { return GrowthFamily::FromManifold; }},
                    law_);
}

double VolumeGrowthModel::log_ball_volume(double r) const {
  if (!(r >= domain_min_)) {
    throw DomainError(fmt::format("{} volume law is undefined at r = {} (domain starts at {})",
                                  to_string(family()), r, domain_min_));
  }
  return std::visit(
      overloaded{[&](const Power& p) { return std::log(p.C) + p.D * std::log(r); },
                 [&](const ExpPower& p) { return p.C * std::pow(r, p.alpha); },
                 [&](const ExpQuad& p) { return p.C * r * r; },
                 [&](const ExpQuadLog& p) { return p.C * r * r * std::log(r); },
                 [&](const Finite& p) { return std::log(p.V); },
                 [&](const Table& t) {
                   const auto& cubic = t.log_volume_vs_log_r;
                   const double u = std::log(r);
                   if (u > cubic.back()) return cubic.y().back() + t.tail_slope * (u - cubic.back());
                   const std::size_t k = cubic.segment(u);
                   const double v = cubic(u);
                   const double lo = cubic.y()[k];
                   const double hi = cubic.y()[k + 1];
                   const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
                   if (v < lo - slack || v > hi + slack) {
                     throw MonotonicityError(
                         fmt::format("tabulated interpolation leaves [{}, {}] at r = {}", lo, hi, r));
                   }
                   return std::clamp(v, lo, hi);
                 },
                 [&](const Manifold& m) { return m.table->log_volume(r); }},
      law_);
}

bool VolumeGrowthModel::extrapolated(double r) const {
  if (const auto* t = std::get_if<Table>(&law_)) return std::log(r) > t->log_volume_vs_log_r.back();
  return false;
}

double VolumeGrowthModel::parameter(const std::string& name) const {
  std::optional<double> v = std::visit(
      overloaded{[&](const Power& p) -> std::optional<double> {
                   if (name == "C") return p.C;
                   if (name == "D") return p.D;
                   return std::nullopt;
                 },
                 [&](const ExpPower& p) -> std::optional<double> {
                   if (name == "C") return p.C;
                   if (name == "alpha") return p.alpha;
                   return std::nullopt;
                 },
                 [&](const ExpQuad& p) -> std::optional<double> {
                   if (name == "C") return p.C;
                   return std::nullopt;
                 },
                 [&](const ExpQuadLog& p) -> std::optional<double> {
                   if (name == "C") return p.C;
                   return std::nullopt;
                 },
                 [&](const Finite& p) -> std::optional<double> {
                   if (name == "V") return p.V;
                   return std::nullopt;
                 },
                 [&](const auto&) -> std::optional<double> { return std::nullopt; }},
      law_);
  if (!v) throw DomainError(fmt::format("{} volume law has no parameter '{}'", to_string(family()), name));
  return *v;
}

const ModelManifold* VolumeGrowthModel::manifold() const {
  if (const auto* m = std::get_if<Manifold>(&law_)) return &m->table->manifold();
  return nullptr;
}

void VolumeGrowthModel::prepare(double r_max) const {
  if (const auto* m = std::get_if<Manifold>(&law_)) m->table->extend_to(r_max);
}

std::string VolumeGrowthModel::describe() const {
  return std::visit(
      overloaded{[&](const Power& p) { return fmt::format("power:C={},D={}", p.C, p.D); },
                 [&](const ExpPower& p) { return fmt::format("exppower:C={},alpha={}", p.C, p.alpha); },
                 [&](const ExpQuad& p) { return fmt::format("expquad:C={}", p.C); },
                 [&](const ExpQuadLog& p) { return fmt::format("expquadlog:C={}", p.C); },
                 [&](const Finite& p) { return fmt::format("finite:V={}", p.V); },
                 [&](const Table& t) {
                   if (!source_.empty()) return fmt::format("tabulated:path={}", source_);
                   return fmt::format("tabulated:knots={}", t.log_volume_vs_log_r.x().size());
                 },
                 [&](const Manifold& m) { return m.table->manifold().describe(); }},
      law_);
}

}  // namespace ratelab
