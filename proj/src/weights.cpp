#include "fracop/weights.hpp"

#include "fracop/error.hpp"
#include "fracop/orlicz.hpp"
#include "fracop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracop {

namespace {

double param(const std::vector<double>& p, std::size_t i, double fallback) {
  return i < p.size() ? p[i] : fallback;
}

std::vector<double> ball_max(std::span<const double> f, const DiscreteBalls& balls) {
  return balls.evaluate(
      [](std::span<const double> v, std::size_t) { return *std::max_element(v.begin(), v.end()); },
      f);
}

// Per-ball normalized L^e average of g (e = ∞ gives the max).
std::vector<double> lebesgue_averages(const GridFunction& g, double e, const DiscreteBalls& balls) {
  if (std::isinf(e)) return ball_max(g.values(), balls);
  auto avg = balls.averages(g.pow(e).values());
  for (double& v : avg) v = std::pow(v, 1.0 / e);
  return avg;
}

double conjugate(double p) { return p == 1.0 ? kInfExponent : p / (p - 1.0); }

void require_positive(const Weight& w) {
  for (double v : w.w.values()) {
    if (!(v > 0.0)) throw DomainError("weight must be strictly positive");
  }
}

}  // namespace

double WeightPreset::operator()(const Point& x, int dim) const {
  const double r = norm(x, dim);
  if (tag == "constant") return param(params, 0, 1.0);
  if (tag == "power") {
    const double gamma = param(params, 0, 0.0);
    if (gamma == 0.0) return 1.0;
    if (r == 0.0) throw DomainError("power weight evaluated at the origin");
    return std::pow(r, gamma);
  }
  if (tag == "log-example") {
    if (r == 0.0) throw DomainError("log-example weight evaluated at the origin");
    return r <= std::exp(-1.0) ? std::log(1.0 / r) : 1.0;
  }
  if (tag == "spiky") {
    const double height = param(params, 0, 1e3);
    const double center = param(params, 1, 0.5);
    const double width = param(params, 2, 0.1);
    const double floor = param(params, 3, 1e-3);
    const double d = (x[0] - center) / width;
    const double d2 = dim == 1 ? d * d : d * d + (x[1] / width) * (x[1] / width);
    return floor + height * std::exp(-d2);
  }
  if (tag == "random") {
    // Lognormal-ish noise, constant on blocks of side 1/8 so refinement keeps it.
    const auto seed = static_cast<std::uint64_t>(param(params, 0, 1.0));
    const double sigma = param(params, 1, 1.0);
    const auto block = [](double t) { return static_cast<std::int64_t>(std::floor(t * 8.0)); };
    std::uint64_t key = seed * 0x9E3779B97F4A7C15ULL;
    key ^= static_cast<std::uint64_t>(block(x[0]) + (1 << 20)) * 0xBF58476D1CE4E5B9ULL;
    if (dim == 2) key ^= static_cast<std::uint64_t>(block(x[1]) + (1 << 20)) * 0x94D049BB133111EBULL;
    Xorshift64 rng(key);
    return std::exp(sigma * rng.uniform(-1.0, 1.0));
  }
  throw ConfigError("unknown weight preset '" + tag + "'");
}

nlohmann::json WeightPreset::to_json() const { return {{"preset", tag}, {"params", params}}; }

WeightPreset WeightPreset::from_json(const nlohmann::json& j) {
  try {
    WeightPreset p;
    p.tag = j.at("preset").get<std::string>();
    p.params = j.value("params", std::vector<double>{});
    static const std::vector<std::string> known = {"constant", "power", "log-example", "spiky",
                                                   "random"};
    if (std::find(known.begin(), known.end(), p.tag) == known.end()) {
      throw ConfigError("unknown weight preset '" + p.tag + "'");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("weight: ") + e.what());
  }
}

Weight::Weight(GridFunction values, std::string tag_) : w(std::move(values)), tag(std::move(tag_)) {
  require_positive(*this);
}

Weight make_example_weight(const WeightPreset& preset, const Grid& grid) {
  Weight w(GridFunction::sample(grid, [&](const Point& x) { return preset(x, grid.dim()); }),
           preset.tag);
  if (preset.tag == "power" && param(preset.params, 0, 0.0) <= -grid.dim()) {
    w.warning = "power weight |x|^gamma with gamma <= -n is not locally integrable";
  }
  return w;
}

Weight make_example_weight(const std::string& tag, const std::vector<double>& params,
                           const Grid& grid) {
  return make_example_weight(WeightPreset{tag, params}, grid);
}

std::vector<double> apq_per_ball(const Weight& w, double p, double q, const DiscreteBalls& balls) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw DomainError("apq: need p, q >= 1");
  const auto a = lebesgue_averages(w.w, q, balls);
  const auto b = lebesgue_averages(w.w.map([](double v) { return 1.0 / v; }), conjugate(p), balls);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

double apq_constant(const Weight& w, double p, double q, const DiscreteBalls& balls) {
  const auto v = apq_per_ball(w, p, q, balls);
  return *std::max_element(v.begin(), v.end());
}

double apq_constant(const Weight& w, double p, double q, const BallFamily& family) {
  return apq_constant(w, p, q, DiscreteBalls(w.w.grid(), family));
}

std::vector<double> ap_per_ball(const Weight& w, double p, const DiscreteBalls& balls) {
  if (!(p >= 1.0) || std::isinf(p)) throw DomainError("ap: need 1 <= p < inf");
  const auto a = balls.averages(w.w.values());
  std::vector<double> out(a.size());
  if (p == 1.0) {
    const auto m = ball_max(w.w.map([](double v) { return 1.0 / v; }).values(), balls);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * m[i];
    return out;
  }
  const double e = 1.0 - conjugate(p);
  const auto b = balls.averages(w.w.map([e](double v) { return std::pow(v, e); }).values());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * std::pow(b[i], p - 1.0);
  return out;
}

double ap_constant(const Weight& w, double p, const DiscreteBalls& balls) {
  const auto v = ap_per_ball(w, p, balls);
  return *std::max_element(v.begin(), v.end());
}

double ap_constant(const Weight& w, double p, const BallFamily& family) {
  return ap_constant(w, p, DiscreteBalls(w.w.grid(), family));
}

AInfinitySweep a_infinity_sweep(const Weight& w, const DiscreteBalls& balls) {
  AInfinitySweep s;
  s.best = std::numeric_limits<double>::infinity();
  for (double p : s.p_values) {
    s.constants.push_back(ap_constant(w, p, balls));
    s.best = std::min(s.best, s.constants.back());
  }
  return s;
}

double bump_constant(const Weight& w, double q, const YoungFunction& psi,
                     const DiscreteBalls& balls) {
  if (!(q > 1.0)) throw DomainError("bump constant: need q > 1");
  const auto a = lebesgue_averages(w.w, q, balls);
  const auto inv = w.w.map([](double v) { return 1.0 / v; });
  const auto b = balls.evaluate(
      [&](std::span<const double> v, std::size_t) { return luxemburg_norm(v, psi); },
      inv.values());
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, a[i] * b[i]);
  return best;
}

double bump_constant(const Weight& w, double q, const YoungFunction& psi,
                     const BallFamily& family) {
  return bump_constant(w, q, psi, DiscreteBalls(w.w.grid(), family));
}

CompatReport matrix_compat_constant(const Weight& w, const Eigen::MatrixXd& a) {
  const Grid& g = w.w.grid();
  const int n = g.dim();
  if (a.rows() != n || a.cols() != n) throw DomainError("matrix compat: dimension mismatch");
  if (std::abs(a.determinant()) <= 1e-12) throw DomainError("matrix compat: singular matrix");
  CompatReport rep;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.midpoint(i);
    Point ax{0.0, 0.0};
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) ax[r] += a(r, c) * x[c];
    }
    const auto v = w.w.at(ax);
    if (!v) continue;
    ++covered;
    rep.constant = std::max(rep.constant, *v / w.w[i]);
  }
  rep.coverage = static_cast<double>(covered) / static_cast<double>(g.size());
  return rep;
}

double bmo_norm(const GridFunction& b, const DiscreteBalls& balls) {
  return sharp_maximal(b, balls).max_abs();
}

double bmo_norm(const GridFunction& b, const BallFamily& family) {
  return bmo_norm(b, DiscreteBalls(b.grid(), family));
}

double weighted_bmo_norm(const GridFunction& f, const Weight& w, const DiscreteBalls& balls) {
  return sharp_maximal(f, balls).times(w.w).max_abs();
}

double weighted_bmo_norm(const GridFunction& f, const Weight& w, const BallFamily& family) {
  return weighted_bmo_norm(f, w, DiscreteBalls(f.grid(), family));
}

BmoFunction::BmoFunction(GridFunction values, const DiscreteBalls& balls)
    : b(std::move(values)), norm(bmo_norm(b, balls)) {}

BmoFunction::BmoFunction(GridFunction values, const BallFamily& family)
    : b(std::move(values)), norm(bmo_norm(b, family)) {}

double nested_average_check(const BmoFunction& b, const CellSet& a_set, const CellSet& b_set) {
  if (a_set.empty() || b_set.empty()) throw DomainError("nested average check: empty cell set");
  if (!std::includes(b_set.begin(), b_set.end(), a_set.begin(), a_set.end())) {
    throw DomainError("nested average check: A must be a subset of B");
  }
  const double diff = std::abs(average(b.b, a_set) - average(b.b, b_set));
  const double scale = static_cast<double>(b_set.size()) / static_cast<double>(a_set.size());
  if (diff <= 1e-15 * std::max(1.0, b.b.max_abs())) return 0.0;
  if (b.norm == 0.0) throw NumericalError("nested average check: zero BMO norm with distinct averages");
  return diff / (scale * b.norm);
}

}  // namespace fracop
