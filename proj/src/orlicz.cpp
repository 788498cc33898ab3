#include "fracop/orlicz.hpp"

#include "fracop/error.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracop {

namespace {

constexpr double kPsiCap = 1e300;

// Normalized values a_i/max in (0, 1] (zeros dropped) plus the full count.
struct Scaled {
  std::vector<double> nonzero;
  std::size_t count = 0;
  double scale = 0.0;
  double mean = 0.0;
};

Scaled scale_values(std::span<const double> values) {
  Scaled s;
  s.count = values.size();
  for (double v : values) s.scale = std::max(s.scale, std::abs(v));
  if (s.scale == 0.0) return s;
  s.nonzero.reserve(values.size());
  double sum = 0.0;
  for (double v : values) {
    if (v != 0.0) {
      s.nonzero.push_back(std::abs(v) / s.scale);
      sum += s.nonzero.back();
    }
  }
  s.mean = sum / static_cast<double>(s.count);
  return s;
}

double functional_scaled(const Scaled& s, const YoungFunction& psi, double mu) {
  double acc = 0.0;
  for (double a : s.nonzero) acc += std::min(psi(a / mu), kPsiCap);
  return acc / static_cast<double>(s.count);
}

}  // namespace

double luxemburg_functional(std::span<const double> values, const YoungFunction& psi,
                            double lambda) {
  if (!(lambda > 0.0)) throw DomainError("luxemburg functional: lambda must be positive");
  double acc = 0.0;
  for (double v : values) acc += std::min(psi(std::abs(v) / lambda), kPsiCap);
  return acc / static_cast<double>(values.size());
}

double luxemburg_norm(std::span<const double> values, const YoungFunction& psi) {
  if (values.empty()) throw DomainError("luxemburg norm over an empty cell set");
  const Scaled s = scale_values(values);
  if (s.scale == 0.0) return 0.0;
  if (psi.is_linf()) return s.scale;
  if (psi.kind() == YoungKind::Linear) return s.mean * s.scale;

  // Jensen gives the bracket: Ψ(mean/μ) <= avg Ψ(a/μ) and avg Ψ(a/μ) <= Ψ(1/μ).
  const double unit = psi.inverse(1.0, 1e-15);
  double lo = s.mean / unit;
  double hi = 1.0 / unit;
  auto g = [&](double mu) { return functional_scaled(s, psi, mu) - 1.0; };
  double g_lo = g(lo);
  double g_hi = g(hi);
  if (g_lo <= 0.0) return lo * s.scale;
  if (g_hi >= 0.0) return hi * s.scale;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      g, lo, hi, g_lo, g_hi, boost::math::tools::eps_tolerance<double>(50), iters);
  const double mu = 0.5 * (r.first + r.second);
  if (!std::isfinite(mu) || mu <= 0.0) throw NumericalError("norm overflow");
  return mu * s.scale;
}

double luxemburg_norm(const GridFunction& f, const CellSet& cells, const YoungFunction& psi) {
  std::vector<double> v;
  v.reserve(cells.size());
  for (std::size_t i : cells) v.push_back(f[i]);
  return luxemburg_norm(v, psi);
}

double luxemburg_norm(const GridFunction& f, const Ball& ball, const YoungFunction& psi) {
  const CellSet cells = ball.cells(f.grid());
  if (cells.empty()) throw DomainError("ball contains no grid cell");
  return luxemburg_norm(f, cells, psi);
}

double annulus_norm(const GridFunction& f, const Annulus& annulus, const YoungFunction& psi) {
  const Ball outer = annulus.outer_ball();
  const CellSet cells = outer.cells(f.grid());
  if (cells.empty()) throw DomainError("annulus ball contains no grid cell");
  const double s = annulus.inner * (1.0 + 1e-12);
  std::vector<double> v;
  v.reserve(cells.size());
  for (std::size_t i : cells) {
    const bool inside = distance(f.grid().midpoint(i), annulus.center, f.grid().dim()) > s;
    v.push_back(inside ? f[i] : 0.0);
  }
  return luxemburg_norm(v, psi);
}

double generalized_holder_check(const std::vector<GridFunction>& fs, const GridFunction& g,
                                const std::vector<YoungFunction>& psis, const YoungFunction& phi,
                                const Ball& ball) {
  if (fs.size() != psis.size()) throw DomainError("holder check: one Young function per factor");
  const CellSet cells = ball.cells(g.grid());
  if (cells.empty()) throw DomainError("ball contains no grid cell");
  double lhs = 0.0;
  for (std::size_t c : cells) {
    double prod = std::abs(g[c]);
    for (const auto& f : fs) prod *= std::abs(f[c]);
    lhs += prod;
  }
  lhs /= static_cast<double>(cells.size());
  double rhs = luxemburg_norm(g, cells, phi);
  for (std::size_t i = 0; i < fs.size(); ++i) rhs *= luxemburg_norm(fs[i], cells, psis[i]);
  if (lhs == 0.0) return 0.0;
  if (rhs == 0.0) throw NumericalError("holder check: zero right-hand side with positive left");
  return lhs / rhs;
}

}  // namespace fracop
