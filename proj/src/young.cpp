#include "fracop/young.hpp"

#include "fracop/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fracop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBisection = 200;
constexpr double kCertificateBound = 1e8;

double log_e_plus(double t) { return std::log(std::numbers::e + t); }

void require_nonneg(double t, const char* what) {
  if (!(t >= 0.0)) throw DomainError(std::string(what) + ": negative argument");
}

}  // namespace

YoungFunction YoungFunction::linear() { return {YoungKind::Linear, 1.0, 0.0}; }

YoungFunction YoungFunction::power(double r) {
  if (!(r > 1.0)) throw DomainError("Power(r) requires r > 1");
  return {YoungKind::Power, r, 0.0};
}

YoungFunction YoungFunction::power_log(double r, double beta) {
  if (!(r >= 1.0)) throw DomainError("PowerLog(r, beta) requires r >= 1");
  if (beta == 0.0) return r == 1.0 ? linear() : power(r);
  if (beta < 0.0 && !(r > 1.0)) throw DomainError("PowerLog with beta < 0 requires r > 1");
  YoungFunction f{YoungKind::PowerLog, r, beta};
  if (beta < 0.0 && !is_young_on_grid(f)) {
    throw DomainError("PowerLog(r, beta) with beta < 0 is not convex on the sample grid");
  }
  return f;
}

YoungFunction YoungFunction::exp_minus_one() { return {YoungKind::ExpMinusOne, 1.0, 0.0}; }

YoungFunction YoungFunction::linf() { return {YoungKind::LinfMarker, 1.0, 0.0}; }

YoungFunction YoungFunction::phi_k(int k) {
  if (k < 0) throw DomainError("phi_k requires k >= 0");
  return k == 0 ? linear() : power_log(1.0, static_cast<double>(k));
}

YoungFunction YoungFunction::with_t0(double t0) const {
  require_nonneg(t0, "t0");
  YoungFunction f = *this;
  f.t0_ = t0;
  return f;
}

double YoungFunction::operator()(double t) const {
  require_nonneg(t, "Young eval");
  switch (kind_) {
    case YoungKind::Linear:
      return t;
    case YoungKind::Power:
      return std::pow(t, r_);
    case YoungKind::PowerLog:
      return std::pow(t, r_) * std::pow(log_e_plus(t), beta_);
    case YoungKind::ExpMinusOne:
      return std::expm1(t);
    case YoungKind::LinfMarker:
      break;
  }
  throw DomainError("LinfMarker is not pointwise-evaluable");
}

double YoungFunction::log_eval(double t) const {
  if (!(t > 0.0)) throw DomainError("log_eval requires t > 0");
  switch (kind_) {
    case YoungKind::Linear:
      return std::log(t);
    case YoungKind::Power:
      return r_ * std::log(t);
    case YoungKind::PowerLog:
      return r_ * std::log(t) + beta_ * std::log(log_e_plus(t));
    case YoungKind::ExpMinusOne:
      return t > 1.0 ? t + std::log1p(-std::exp(-t)) : std::log(std::expm1(t));
    case YoungKind::LinfMarker:
      break;
  }
  throw DomainError("LinfMarker is not pointwise-evaluable");
}

double YoungFunction::inverse(double s, double tol) const {
  require_nonneg(s, "Young inverse");
  switch (kind_) {
    case YoungKind::LinfMarker:
      return 1.0;
    case YoungKind::Linear:
      return s;
    case YoungKind::Power:
      return std::pow(s, 1.0 / r_);
    case YoungKind::ExpMinusOne:
      return std::log1p(s);
    case YoungKind::PowerLog:
      break;
  }
  if (s == 0.0) return 0.0;
  // Monotone bracketing then bisection.
  double lo = 0.0;
  double hi = std::max(1.0, std::pow(s, 1.0 / r_));
  while ((*this)(hi) < s) {
    lo = hi;
    hi *= 2.0;
  }
  const double target_tol = tol * std::max(1.0, s);
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = (*this)(mid);
    if (std::abs(v - s) <= target_tol && hi - lo <= tol * std::max(1.0, mid)) return mid;
    if (v < s) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  return 0.5 * (lo + hi);
}

double YoungFunction::asymptotic_slope() const {
  return kind_ == YoungKind::Linear ? 1.0 : kInf;
}

double YoungFunction::slope_at_zero() const {
  switch (kind_) {
    case YoungKind::Linear:
    case YoungKind::ExpMinusOne:
      return 1.0;
    case YoungKind::PowerLog:
      return r_ == 1.0 ? 1.0 : 0.0;
    default:
      return 0.0;
  }
}

std::string YoungFunction::name() const {
  switch (kind_) {
    case YoungKind::Linear:
      return "t";
    case YoungKind::Power:
      return "t^" + std::to_string(r_);
    case YoungKind::PowerLog:
      return "t^" + std::to_string(r_) + " log(e+t)^" + std::to_string(beta_);
    case YoungKind::ExpMinusOne:
      return "exp(t)-1";
    case YoungKind::LinfMarker:
      return "Linf";
  }
  return "?";
}

nlohmann::json YoungFunction::to_json() const {
  switch (kind_) {
    case YoungKind::Linear:
      return {{"kind", "linear"}, {"params", nlohmann::json::array()}};
    case YoungKind::Power:
      return {{"kind", "power"}, {"params", {r_}}};
    case YoungKind::PowerLog:
      return {{"kind", "power_log"}, {"params", {r_, beta_}}};
    case YoungKind::ExpMinusOne:
      return {{"kind", "exp_minus_one"}, {"params", nlohmann::json::array()}};
    case YoungKind::LinfMarker:
      return {{"kind", "linf"}, {"params", nlohmann::json::array()}};
  }
  return {};
}

YoungFunction YoungFunction::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw ConfigError("young function: expected object with \"kind\"");
  }
  const auto kind = j.at("kind").get<std::string>();
  const auto params = j.value("params", nlohmann::json::array());
  auto param = [&](std::size_t i) {
    if (params.size() <= i) throw ConfigError("young function '" + kind + "': missing params");
    return params.at(i).get<double>();
  };
  YoungFunction f;
  if (kind == "linear") {
    f = linear();
  } else if (kind == "power") {
    f = power(param(0));
  } else if (kind == "power_log") {
    f = power_log(param(0), param(1));
  } else if (kind == "phi_k") {
    f = phi_k(static_cast<int>(param(0)));
  } else if (kind == "exp_minus_one") {
    f = exp_minus_one();
  } else if (kind == "linf") {
    f = linf();
  } else {
    throw ConfigError("unknown young function kind '" + kind + "'");
  }
  if (j.contains("t0")) f = f.with_t0(j.at("t0").get<double>());
  return f;
}

double eval(const YoungFunction& psi, double t) { return psi(t); }

double inverse(const YoungFunction& psi, double s, double tol) { return psi.inverse(s, tol); }

bool is_young_on_grid(const YoungFunction& psi, double t_max, int points, double tol) {
  if (psi.is_linf()) return true;
  if (psi(0.0) != 0.0) return false;
  // Uniform grid for second differences; log grid for growth.
  std::vector<double> v(points + 1);
  for (int i = 0; i <= points; ++i) v[i] = psi(t_max * i / points);
  for (int i = 1; i <= points; ++i) {
    if (v[i] < v[i - 1] - tol * std::max(1.0, std::abs(v[i]))) return false;
  }
  for (int i = 1; i < points; ++i) {
    const double d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
    if (d2 < -tol * std::max(1.0, std::abs(v[i]))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// ComplementaryFunction

ComplementaryFunction::ComplementaryFunction(YoungFunction base, double s_max, int nodes)
    : base_(std::move(base)), s_max_(s_max), degenerate_from_(base_.asymptotic_slope()) {
  if (base_.is_linf()) throw DomainError("complementary of LinfMarker is undefined");
  if (!(s_max > 0.0)) throw DomainError("complementary requires s_max > 0");
  if (nodes < 2) throw DomainError("complementary requires at least two nodes");
  const double top = std::min(s_max_, degenerate_from_);
  s_nodes_.resize(nodes);
  values_.resize(nodes);
  argmax_.resize(nodes);
  double t_prev = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double s = top * i / (nodes - 1);
    s_nodes_[i] = s;
    double t_star = 0.0;
    if (s <= base_.slope_at_zero() || s >= degenerate_from_) {
      values_[i] = 0.0;
      t_star = 0.0;
    } else {
      values_[i] = solve(s, t_prev, bracket_hi(s), &t_star);
    }
    argmax_[i] = t_star;
    t_prev = t_star;
  }
}

bool ComplementaryFunction::degenerate() const { return std::isfinite(degenerate_from_); }

double ComplementaryFunction::bracket_hi(double s) const {
  // st − Ψ(t) is concave; the secant slope of Ψ exceeding s puts t past the maximizer.
  double t = 1.0;
  for (int i = 0; i < 2000; ++i) {
    if (base_(2.0 * t) - base_(t) > s * t) return 2.0 * t;
    t *= 2.0;
  }
  throw NumericalError("degenerate complementary: no maximizer bracket");
}

double ComplementaryFunction::solve(double s, double t_lo, double t_hi, double* t_star) const {
  auto neg = [&](double t) { return -(s * t - base_(t)); };
  const auto r = boost::math::tools::brent_find_minima(neg, t_lo, t_hi, 52);
  double best_t = r.first;
  double best = -r.second;
  // The endpoints are candidates as well (maximizer may sit on the bracket edge).
  for (double t : {t_lo, t_hi}) {
    const double v = s * t - base_(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  if (t_star) *t_star = best_t;
  return std::max(best, 0.0);
}

double ComplementaryFunction::operator()(double s) const {
  require_nonneg(s, "complementary eval");
  if (s > degenerate_from_) return kInf;
  if (s <= base_.slope_at_zero() || s == degenerate_from_) return 0.0;
  const double top = s_nodes_.back();
  if (s <= top) {
    const auto it = std::upper_bound(s_nodes_.begin(), s_nodes_.end(), s);
    const std::size_t k = static_cast<std::size_t>(std::distance(s_nodes_.begin(), it));
    if (k == 0) return 0.0;
    if (k >= s_nodes_.size()) return values_.back();
    return solve(s, argmax_[k - 1], argmax_[k], nullptr);
  }
  return solve(s, argmax_.back(), bracket_hi(s), nullptr);
}

double ComplementaryFunction::argmax(double s) const {
  require_nonneg(s, "complementary argmax");
  if (s > degenerate_from_) return kInf;
  if (s <= base_.slope_at_zero() || s == degenerate_from_) return 0.0;
  double t = 0.0;
  solve(s, 0.0, bracket_hi(s), &t);
  return t;
}

double ComplementaryFunction::inverse(double u) const {
  require_nonneg(u, "complementary inverse");
  if (degenerate()) {
    // Ψ̄ is finite on [0, degenerate_from] and +inf past it.
    if ((*this)(degenerate_from_) <= u) return degenerate_from_;
  }
  double lo = base_.slope_at_zero();
  if (u == 0.0) return lo;
  double hi = std::max(2.0 * lo, 1.0);
  while ((*this)(hi) <= u) {
    lo = hi;
    hi *= 2.0;
    if (hi > degenerate_from_) {
      hi = degenerate_from_;
      break;
    }
  }
  for (int it = 0; it < kMaxBisection && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((*this)(mid) <= u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

ComplementaryFunction complementary(const YoungFunction& psi, double s_max) {
  return ComplementaryFunction(psi, s_max);
}

double inverse_of(const InverseSource& src, double t) {
  return std::visit([t](const auto& f) { return f.inverse(t); }, src);
}

// ---------------------------------------------------------------------------
// Certificates

namespace {

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g(points);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < points; ++i) g[i] = std::exp(a + (b - a) * i / (points - 1));
  return g;
}

// ∫_1^T exp(L(t)) dt with the log-integrand L, plus its tail slope.
template <typename LogIntegrand>
GrowthCertificate growth_integral(LogIntegrand&& log_integrand, double T) {
  GrowthCertificate c;
  if (!(T > 1.0)) {
    c.value = 0.0;
    c.tail_slope = 0.0;
    c.certified = false;
    return c;
  }
  c.tail_slope = (log_integrand(T) - log_integrand(T / 10.0)) / std::log(10.0);
  const double upper = std::log(T);
  double peak = -kInf;
  for (int i = 0; i <= 64; ++i) peak = std::max(peak, log_integrand(std::exp(upper * i / 64)));
  if (peak > 700.0) {
    c.value = kInf;
  } else {
    auto f = [&](double u) { return std::exp(log_integrand(std::exp(u)) + u); };
    try {
      c.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 15,
                                                                             1e-10);
    } catch (const std::exception&) {
      c.value = kInf;
    }
  }
  c.certified = std::isfinite(c.value) && c.tail_slope < -1.0 - kSlopeMargin;
  return c;
}

}  // namespace

CompatibilityReport compatibility_report(const std::vector<InverseSource>& psis,
                                         const std::vector<InverseSource>& extra,
                                         const YoungFunction& phi, TRange range) {
  if (psis.empty()) throw DomainError("compatibility_constant: empty product");
  if (!(range.lo > 0.0) || !(range.hi > range.lo) || range.points < 2) {
    throw DomainError("compatibility_constant: invalid t range");
  }
  auto ratio = [&](double t) {
    double prod = phi.inverse(t);
    for (const auto& s : psis) prod *= inverse_of(s, t);
    for (const auto& s : extra) prod *= inverse_of(s, t);
    return prod / t;
  };
  CompatibilityReport rep;
  for (double t : log_grid(range.lo, range.hi, range.points)) {
    rep.constant = std::max(rep.constant, ratio(t));
  }
  const double a = ratio(range.hi / 10.0);
  const double b = ratio(range.hi);
  rep.tail_slope = (a > 0.0 && b > 0.0) ? std::log(b / a) / std::log(10.0) : 0.0;
  rep.certified = std::isfinite(rep.constant) && rep.constant < kCertificateBound &&
                  rep.tail_slope <= kSlopeMargin;
  return rep;
}

CompatibilityReport inverse_domination_report(const std::vector<InverseSource>& nums,
                                              const YoungFunction& den, TRange range) {
  if (nums.empty()) throw DomainError("inverse domination: empty product");
  if (!(range.lo > 0.0) || !(range.hi > range.lo) || range.points < 2) {
    throw DomainError("inverse domination: invalid t range");
  }
  auto ratio = [&](double t) {
    double prod = 1.0;
    for (const auto& s : nums) prod *= inverse_of(s, t);
    return prod / den.inverse(t);
  };
  CompatibilityReport rep;
  for (double t : log_grid(range.lo, range.hi, range.points)) {
    rep.constant = std::max(rep.constant, ratio(t));
  }
  const double a = ratio(range.hi / 10.0);
  const double b = ratio(range.hi);
  rep.tail_slope = (a > 0.0 && b > 0.0) ? std::log(b / a) / std::log(10.0) : 0.0;
  rep.certified = std::isfinite(rep.constant) && rep.constant < kCertificateBound &&
                  rep.tail_slope <= kSlopeMargin;
  return rep;
}

double compatibility_constant(const std::vector<InverseSource>& psis,
                              const std::vector<InverseSource>& extra,
                              const YoungFunction& phi, TRange range) {
  return compatibility_report(psis, extra, phi, range).constant;
}

GrowthCertificate bp_alpha_integral(const YoungFunction& phi, double p, double alpha, int n,
                                    double T) {
  if (n < 1 || alpha < 0.0 || alpha >= n) throw DomainError("bp_alpha_integral: need 0 <= alpha < n");
  const double upper_p = alpha > 0.0 ? n / alpha : kInf;
  if (!(p > 1.0) || !(p < upper_p)) throw DomainError("bp_alpha_integral: need 1 < p < n/alpha");
  if (phi.is_linf()) throw DomainError("bp_alpha_integral: LinfMarker has no growth integral");
  const double q = 1.0 / (1.0 / p - alpha / n);
  return growth_integral([&](double t) { return (q / p) * phi.log_eval(t) - q * std::log(t); },
                         T);
}

GrowthCertificate bp_integral(const YoungFunction& phi, double p, double gamma, double T) {
  if (!(p > 0.0)) throw DomainError("bp_integral: need p > 0");
  if (phi.is_linf()) throw DomainError("bp_integral: LinfMarker has no growth integral");
  return growth_integral(
      [&](double t) { return gamma * phi.log_eval(t) - (p + 1.0) * std::log(t); }, T);
}

BumpHypothesisReport bump_maximal_hypothesis(const YoungFunction& eta, const YoungFunction& phi,
                                     double beta, double p, double alpha, int n) {
  if (n < 1 || alpha < 0.0 || alpha >= n) throw DomainError("bump hypothesis: need 0 <= alpha < n");
  const double upper_p = alpha > 0.0 ? n / alpha : kInf;
  if (!(1.0 <= beta && beta < p && p < upper_p)) {
    throw DomainError("bump hypothesis: need 1 <= beta < p < n/alpha");
  }
  BumpHypothesisReport rep;
  const double na = n - alpha;
  const double rho0 = beta * na / (n - alpha * beta);
  rep.b_condition = true;
  for (double f : {1.01, 1.1, 1.5, 2.0, 4.0}) {
    const double rho = rho0 * f;
    const double gamma = 1.0 + rho * alpha / na;
    const double P = rho * n / na;
    rep.rho_samples.push_back(rho);
    rep.b_certificates.push_back(bp_integral(eta, P, gamma));
    rep.b_condition = rep.b_condition && rep.b_certificates.back().certified;
  }

  auto ratio = [&](double t) { return phi.inverse(t) * std::pow(t, alpha / n) / eta.inverse(t); };
  const auto grid = log_grid(1e-6, 1e6, 241);
  for (double t : grid) rep.inverse_constant = std::max(rep.inverse_constant, ratio(t));
  const double l10 = std::log(10.0);
  const double hi_slope = std::log(ratio(1e6) / ratio(1e5)) / l10;
  const double lo_slope = std::log(ratio(1e-5) / ratio(1e-6)) / l10;
  rep.inverse_condition = std::isfinite(rep.inverse_constant) &&
                          rep.inverse_constant < kCertificateBound &&
                          hi_slope <= kSlopeMargin && lo_slope >= -kSlopeMargin;
  return rep;
}

}  // namespace fracop
