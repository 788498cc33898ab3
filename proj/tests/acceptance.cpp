// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "fracop/cli.hpp"
#include "fracop/error.hpp"
#include "fracop/kernels.hpp"
#include "fracop/maximal.hpp"
#include "fracop/operators.hpp"
#include "fracop/orlicz.hpp"
#include "fracop/rng.hpp"
#include "fracop/verify.hpp"
#include "fracop/weights.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace fracop;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

GridFunction seeded_function(const Grid& g, std::uint64_t seed) {
  Xorshift64 rng(seed);
  const double scale = std::exp(rng.uniform(-2.0, 2.0));
  return GridFunction::sample(g, [&](const Point& p) {
    const double v = rng.uniform(-1.0, 1.0);
    return std::abs(p[0]) < 3.0 ? scale * v * std::exp(2.0 * std::abs(v)) : 0.0;
  });
}

GridFunction indicator(const Grid& g, double a, double b) {
  return GridFunction::sample(g, [=](const Point& p) { return p[0] >= a && p[0] <= b ? 1.0 : 0.0; });
}

GridFunction bump(const Grid& g, double c, double r) {
  return GridFunction::sample(g, [=](const Point& p) {
    const double t = (p[0] - c) / r;
    return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
  });
}

Outcome luxemburg_reductions() {
  const Grid g = Grid::line(-4, 4, 256);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto f = seeded_function(g, seed);
    Xorshift64 rng(seed + 1000);
    const Ball b{{rng.uniform(-3, 3), 0}, rng.uniform(0.1, 3)};
    const double r = rng.uniform(1.1, 5.0);
    const auto cells = b.cells(g);
    double mean = 0.0, lr = 0.0;
    for (auto i : cells) {
      mean += std::abs(f[i]);
      lr += std::pow(std::abs(f[i]), r);
    }
    mean /= cells.size();
    lr = std::pow(lr / cells.size(), 1.0 / r);
    worst = std::max(worst, rel(luxemburg_norm(f, b, YoungFunction::linear()), mean));
    worst = std::max(worst, rel(luxemburg_norm(f, b, YoungFunction::power(r)), lr));
  }
  return {worst <= 1e-8, "max relative error " + fmt("%.3g", worst)};
}

Outcome power_maximal_identity() {
  const Grid g = Grid::line(-4, 4, 256);
  const DiscreteBalls balls(g, BallFamily{});
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const double r = 1.5 + 0.1 * static_cast<double>(seed % 10);
    const double alpha = 0.25;
    const auto f = seeded_function(g, seed);
    const auto lhs = orlicz_maximal(f, alpha, YoungFunction::power(r), balls);
    const auto rhs = orlicz_maximal(f.abs().pow(r), alpha * r, YoungFunction::linear(), balls);
    for (std::size_t x = 0; x < g.size(); ++x) {
      worst = std::max(worst, rel(lhs[x], std::pow(rhs[x], 1.0 / r)));
    }
  }
  return {worst <= 1e-10, "max relative error " + fmt("%.3g", worst)};
}

Outcome generalized_holder() {
  struct Row {
    std::string name;
    std::vector<YoungFunction> psis;
    YoungFunction phi;
  };
  const std::vector<Row> rows = {
      {"L^inf x L^inf, t", {YoungFunction::linf(), YoungFunction::linf()}, YoungFunction::phi_k(0)},
      {"L^4 x L^4, t^2 log^2",
       {YoungFunction::power(4), YoungFunction::power(4)},
       YoungFunction::power_log(2, 2)},
      {"L^3 x exp L, t^1.5 log^3",
       {YoungFunction::power(3), YoungFunction::exp_minus_one()},
       YoungFunction::power_log(1.5, 3)},
  };
  const Grid g = Grid::line(-4, 4, 256);
  std::string detail;
  bool ok = true;
  for (const auto& row : rows) {
    std::vector<InverseSource> psis(row.psis.begin(), row.psis.end());
    const auto cert = compatibility_report(psis, {}, row.phi);
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Xorshift64 rng(seed * 31);
      const Ball b{{rng.uniform(-2.5, 2.5), 0}, rng.uniform(0.2, 2)};
      const double r = generalized_holder_check(
          {seeded_function(g, 3 * seed), seeded_function(g, 3 * seed + 1)},
          seeded_function(g, 3 * seed + 2), row.psis, row.phi, b);
      worst = std::max(worst, r);
    }
    ok = ok && cert.certified && worst <= 2.0 * cert.constant;
    detail += "[" + row.name + ": ratio " + fmt("%.4g", worst) + " vs c " +
              fmt("%.4g", cert.constant) + "] ";
  }
  return {ok, detail};
}

// Per-ball values |B|^{α/n} ‖f‖_{D,B}; D = Power uses the closed-form average.
std::vector<double> ball_values(const GridFunction& f, double alpha, const YoungFunction& d,
                                const DiscreteBalls& balls) {
  const int n = f.grid().dim();
  std::vector<double> v;
  if (d.kind() == YoungKind::Power) {
    v = balls.averages(f.abs().pow(d.r()).values());
    for (double& x : v) x = std::pow(x, 1.0 / d.r());
  } else {
    v = balls.evaluate([&](std::span<const double> s, std::size_t) { return luxemburg_norm(s, d); },
                       f.values());
  }
  for (std::size_t b = 0; b < v.size(); ++b) v[b] *= std::pow(balls.measure(b), alpha / n);
  return v;
}

struct TransportResult {
  double worst = 0.0;  // max over grid points of LHS / (c · RHS)
  std::size_t points = 0;
};

// M_{α,D}(w∘A)(A^{-1}x) against c · M_{α,D}w(x) at every grid point x whose preimage
// lies in the lattice carrying w∘A. The left side takes the sup over balls of that
// lattice whose closed Euclidean ball contains A^{-1}x.
TransportResult matrix_transport(const WeightPreset& w, const Eigen::MatrixXd& a, const Grid& g,
                                 const Grid& ga, double alpha, const YoungFunction& d) {
  const int n = g.dim();
  const Eigen::MatrixXd inv = a.inverse();
  const double c = std::pow(inv.operatorNorm() * a.operatorNorm(), n);
  auto apply = [n](const Eigen::MatrixXd& m, const Point& p) {
    Point q{0, 0};
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) q[r] += m(r, s) * p[s];
    return q;
  };
  auto eval = [&](const Point& p) {
    const Point q = norm(p, n) == 0.0 ? Point{1e-300, 0} : p;
    return w(q, n);
  };
  const DiscreteBalls balls(g, BallFamily{});
  const DiscreteBalls balls_a(ga, BallFamily{});
  const auto rhs = balls.sup_containing(
      ball_values(GridFunction::sample(g, eval), alpha, d, balls));
  const auto va = ball_values(GridFunction::sample(ga, [&](const Point& y) { return eval(apply(a, y)); }),
                              alpha, d, balls_a);
  std::vector<double> lhs(g.size(), 0.0);
  const double anorm = a.operatorNorm();
  for (std::size_t b = 0; b < balls_a.size(); ++b) {
    const Ball& ball = balls_a.ball(b);
    const Point ac = apply(a, ball.center);
    const double reach = ball.radius * anorm;
    auto range = [&](double center) {
      return std::pair{std::max(0, static_cast<int>(std::floor((center - reach - g.lo()) / g.h()))),
                       std::min(g.n() - 1, static_cast<int>(std::ceil((center + reach - g.lo()) / g.h())))};
    };
    const auto [i0, i1] = range(ac[0]);
    const auto [j0, j1] = n == 2 ? range(ac[1]) : std::pair{0, 0};
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        const auto idx = g.index(i, j);
        if (ball.contains(apply(inv, g.midpoint(idx)), n)) lhs[idx] = std::max(lhs[idx], va[b]);
      }
    }
  }
  TransportResult out;
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (!ga.locate(apply(inv, g.midpoint(x)))) continue;
    ++out.points;
    out.worst = std::max(out.worst, lhs[x] / (c * rhs[x]));
  }
  return out;
}

Eigen::MatrixXd scalar_matrix(int n, double s) {
  return s * Eigen::MatrixXd::Identity(n, n);
}

Outcome maximal_transport() {
  const std::vector<WeightPreset> weights = {{"constant", {2.0}},
                                             {"power", {0.3}},
                                             {"power", {-0.5}},
                                             {"power", {0.8}},
                                             {"log-example", {}}};
  struct Case {
    std::string name;
    Eigen::MatrixXd a;
    Grid g;
    Grid ga;
    double alpha;
    YoungFunction d;
  };
  const double q = std::numbers::pi / 4;
  Eigen::MatrixXd rot(2, 2);
  rot << std::cos(q), -std::sin(q), std::sin(q), std::cos(q);
  const Grid line = Grid::line(-4, 4, 256);
  const Grid square = Grid::square(-4, 4, 64);
  // Scalar matrices carry w∘A on the pulled-back box A^{-1}[-4,4]^n, where the lattice
  // transports exactly; the rotated box is not a grid box, so rotation shares the lattice.
  const std::vector<Case> cases = {
      {"-I (1D)", scalar_matrix(1, -1), line, line, 0.3, YoungFunction::phi_k(1)},
      {"2I (1D)", scalar_matrix(1, 2), line, Grid::line(-2, 2, 256), 0.3, YoungFunction::phi_k(1)},
      {"-I (2D)", scalar_matrix(2, -1), square, square, 0.5, YoungFunction::power(1.5)},
      {"2I (2D)", scalar_matrix(2, 2), square, Grid::square(-2, 2, 64), 0.5, YoungFunction::power(1.5)},
      {"rotation pi/4 (2D)", rot, square, square, 0.5, YoungFunction::power(1.5)},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    double worst = 0.0;
    for (const auto& w : weights) worst = std::max(worst, matrix_transport(w, c.a, c.g, c.ga, c.alpha, c.d).worst);
    ok = ok && worst <= 1.0 + 1e-12;
    detail += "[" + c.name + ": " + fmt("%.6f", worst) + "] ";
  }
  return {ok, "max LHS/(c RHS) " + detail};
}

void rough_rotation_diagnostic() {
  const double q = std::numbers::pi / 4;
  Eigen::MatrixXd rot(2, 2);
  rot << std::cos(q), -std::sin(q), std::sin(q), std::cos(q);
  for (int n : {32, 64}) {
    const Grid g = Grid::square(-4, 4, n);
    for (const WeightPreset& w : {WeightPreset{"spiky", {1e3, 0.5, 0.5, 1e-3}},
                                  WeightPreset{"random", {1, 0.3}}}) {
      const auto r = matrix_transport(w, rot, g, g, 0.5, YoungFunction::power(1.5));
      std::printf("  info: rotation on the shared lattice, %s weight, N = %d: max ratio %.6f\n",
                  w.tag.c_str(), n, r.worst);
    }
  }
}

Outcome nested_averages() {
  const Grid g = Grid::line(-4, 4, 512);
  const DiscreteBalls balls(g, BallFamily{});
  std::vector<BmoFunction> symbols;
  symbols.emplace_back(
      GridFunction::sample(g, [](const Point& p) { return std::log(std::abs(p[0])); }), balls);
  for (std::uint64_t seed : {1, 2, 3}) {
    symbols.emplace_back(FunctionPreset{"random", {}, seed}.sample(g), balls);
  }
  symbols.emplace_back(SymbolPreset{"arctan", {}}.sample(g), balls);
  double worst = 0.0;
  Xorshift64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto& b = symbols[static_cast<std::size_t>(trial) % symbols.size()];
    const auto ball = static_cast<std::size_t>(rng.uniform(0.0, 1.0) * (balls.size() - 1));
    const auto big = balls.cells(ball);
    CellSet small;
    const double keep = rng.uniform(0.05, 0.9);
    for (auto c : big) {
      if (rng.uniform(0.0, 1.0) < keep) small.push_back(c);
    }
    if (small.empty()) small.push_back(big.front());
    worst = std::max(worst, nested_average_check(b, small, big));
  }
  return {worst <= 1.0 + 1e-6, "max ratio " + fmt("%.6f", worst)};
}

Outcome log_example_weight() {
  auto ap1 = [](int n) {
    const Grid g = Grid::line(-4, 4, n);
    return ap_constant(make_example_weight("log-example", {}, g), 1.0);
  };
  const double a256 = ap1(256), a512 = ap1(512);
  const Grid g = Grid::line(-4, 4, 512);
  const auto w = make_example_weight("log-example", {}, g);
  auto compat = [&](double s) { return matrix_compat_constant(w, scalar_matrix(1, s)).constant; };
  const double cm = compat(-1), c2 = compat(2), ch = compat(0.5);
  const double expected = std::log(2.0 * std::numbers::e);
  const bool ok = std::isfinite(a256) && std::abs(a512 / a256 - 1.0) <= 0.1 && cm == 1.0 &&
                  c2 == 1.0 && std::abs(ch / expected - 1.0) <= 0.05;
  return {ok, "A_1: " + fmt("%.4f", a256) + " -> " + fmt("%.4f", a512) + ", compat(-1) " +
                  fmt("%.4f", cm) + ", compat(2) " + fmt("%.4f", c2) + ", compat(1/2) " +
                  fmt("%.4f", ch) + " (log 2e = " + fmt("%.4f", expected) + ")"};
}

Outcome kernel_certificates() {
  bool ok = true;
  std::string detail;
  double worst = 0.0;
  for (double a : {0.25, 0.5, 0.8}) {
    const auto k = KernelFactor::power(a, 1);
    const double exact = (std::pow(2.0, a) - 1) / (2 * a);
    worst = std::max(worst, rel(size_constant(k, {0.01, 0.1, 1.0, 10.0}).constant, exact));
    for (int order = 0; order <= 2; ++order) {
      const auto h = hormander_constant(k, order, {8.0 / 512, 0}, 2.0, 16);
      ok = ok && std::isfinite(h.partial_sum) && h.tail_slope < -0.5;
      detail += fmt(" %.3f", h.tail_slope);
    }
  }
  ok = ok && worst <= 1e-4;
  return {ok, "size rel error " + fmt("%.3g", worst) + ", hormander tail slopes" + detail};
}

Outcome operator_oracles() {
  double riesz = 0.0;
  for (double alpha : {0.25, 0.5, 0.75}) {
    const Grid g = Grid::line(-4, 4, 512);
    const auto out = apply(OperatorSpec{riesz_kernel(alpha)}, indicator(g, -1, 1), {{2.0, 0.0}});
    riesz = std::max(riesz, rel(out[0], (std::pow(3.0, alpha) - 1.0) / alpha));
  }
  double rs = 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  {
    const double a = 0.5;
    for (double x : {0.25, 0.5, 0.75, 1.5}) {
      auto k = [&](double y) { return std::pow(std::abs(x - y), -a) * std::pow(std::abs(x + y), a - 1.0); };
      double ref = 0.0;
      if (x < 1.0) {
        ref = ts.integrate(k, -1.0, -x) + ts.integrate(k, -x, x) + ts.integrate(k, x, 1.0);
      } else {
        ref = ts.integrate(k, -1.0, 1.0);
      }
      const Grid g = Grid::line(-4, 4, 512);
      const auto out = apply(OperatorSpec{ricci_sjogren_kernel(a)}, indicator(g, -1, 1), {{x, 0.0}});
      rs = std::max(rs, rel(out[0], ref));
    }
  }
  const Grid g = Grid::line(-4, 4, 512);
  const OperatorSpec spec{fractional_ricci_sjogren_kernel(0.5, 0.25)};
  const auto f = indicator(g, -1, 0.5);
  const auto h = bump(g, 0.4, 1.2);
  std::vector<Point> all;
  for (std::size_t i = 0; i < g.size(); ++i) all.push_back(g.midpoint(i));
  const auto tf = apply(spec, f, all);
  const auto tsh = apply_adjoint(spec, h, all);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    lhs += tf[i] * h[i] * g.h();
    rhs += f[i] * tsh[i] * g.h();
  }
  const double dual = std::abs(lhs - rhs) / std::abs(lhs);
  return {riesz <= 5e-3 && rs <= 1e-2 && dual <= 1e-3,
          "riesz " + fmt("%.3g", riesz) + ", ricci-sjogren " + fmt("%.3g", rs) + ", duality " +
              fmt("%.3g", dual)};
}

Outcome commutator_identities() {
  const Grid g = Grid::line(-4, 4, 256);
  const OperatorSpec spec{fractional_ricci_sjogren_kernel(0.5, 0.25)};
  const auto f = bump(g, 0.0, 1.0);
  const auto b = GridFunction::sample(g, [](const Point& p) {
    return std::log(std::abs(p[0]) + 0.1) + std::cos(3 * p[0]);
  });
  double identity = 0.0;
  {
    const OperatorMatrix op(spec, g, guarded_targets(spec, g));
    const auto bx = op.symbol_at_targets(b);
    const auto c1 = op.commutator(b, 1, f);
    const auto tf = op.apply(f);
    const auto tbf = op.apply(b.times(f));
    double scale = 1.0;
    for (double v : c1) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < c1.size(); ++i) {
      identity = std::max(identity, std::abs(c1[i] - (bx[i] * tf[i] - tbf[i])) / scale);
    }
  }
  const OperatorMatrix op(spec, g, {{0.35, 0.0}, {1.2, 0.0}, {-0.8, 0.0}, {2.6, 0.0}});
  const auto t0 = op.apply(f);
  bool rates = true;
  std::string detail;
  for (int k : {1, 2}) {
    const auto exact = op.commutator(b, k, f);
    std::vector<double> errs;
    for (double z : {0.2, 0.1, 0.05}) {
      const auto tp = op.conjugated(b, z, f);
      const auto tm = op.conjugated(b, -z, f);
      double e = 0.0;
      for (std::size_t i = 0; i < tp.size(); ++i) {
        const double fd = k == 1 ? (tp[i] - tm[i]) / (2 * z) : (tp[i] - 2 * t0[i] + tm[i]) / (z * z);
        e = std::max(e, std::abs(fd - exact[i]));
      }
      errs.push_back(e);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
      const double ratio = errs[i - 1] / errs[i];
      rates = rates && std::abs(ratio - 4.0) <= 0.5;
      detail += fmt(" %.3f", ratio);
    }
  }
  return {identity <= 1e-10 && rates,
          "identity error " + fmt("%.3g", identity) + ", error ratios" + detail};
}

std::vector<InequalityReport> run_suite(const RunConfig& cfg) {
  std::vector<InequalityReport> out;
  for (const auto& s : cfg.build_scenarios()) out.push_back(run_scenario(s));
  return out;
}

Outcome inequality_suite(const RunConfig& cfg, const std::vector<InequalityReport>& reports) {
  bool ok = !reports.empty();
  std::string detail;
  const auto scenarios = cfg.build_scenarios();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const bool finite = r.coarse && r.fine && std::isfinite(r.coarse->sup_ratio) &&
                        std::isfinite(r.fine->sup_ratio);
    const double drift = finite && r.coarse->sup_ratio > 0
                             ? std::abs(r.fine->sup_ratio / r.coarse->sup_ratio - 1.0)
                             : 0.0;
    ok = ok && finite && r.pass.value_or(false) && drift <= 0.2 && !r.certificates.empty();
    if (r.kind == ScenarioKind::TwoWeight) {
      bool spiky = false;
      for (const auto& w : scenarios[i].family.weights) spiky = spiky || w.tag == "spiky";
      ok = ok && spiky;
    }
    if (r.kind == ScenarioKind::Endpoint) {
      const auto& l = scenarios[i].lambdas;
      const double span = std::log10(*std::max_element(l.begin(), l.end()) /
                                     *std::min_element(l.begin(), l.end()));
      ok = ok && span >= 2.0 - 1e-12 &&
           scenarios[i].setup.op.kernel.alpha_total() == 0.0;
    }
    detail += "[" + r.scenario + " " + r.status + " " +
              (finite ? fmt("%.4g", r.coarse->sup_ratio) + "->" + fmt("%.4g", r.fine->sup_ratio)
                      : std::string("n/a")) +
              ", " + std::to_string(r.certificates.size()) + " certificates] ";
  }
  return {ok, detail};
}

Outcome determinism(const RunConfig& cfg, const std::vector<InequalityReport>& baseline) {
  const std::string base = reports_json(baseline, cfg.text) + reports_csv(baseline);
  bool ok = true;
  std::string detail;
  for (int threads : {1, 3}) {
    omp_set_num_threads(threads);
    const auto again = run_suite(cfg);
    const bool same = reports_json(again, cfg.text) + reports_csv(again) == base;
    ok = ok && same;
    detail += std::to_string(threads) + " thread(s): " + (same ? "identical" : "differs") + "; ";
  }
  return {ok, detail + "baseline used " + std::to_string(omp_get_max_threads()) + " max threads"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %2d %-34s %s  (%.1fs) %s\n", id, name.c_str(), o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "luxemburg reductions", luxemburg_reductions);
  report(2, "power maximal identity", power_maximal_identity);
  report(3, "generalized holder", generalized_holder);
  report(4, "maximal transport under matrices", maximal_transport);
  rough_rotation_diagnostic();
  report(5, "nested averages vs BMO", nested_averages);
  report(6, "log example weight", log_example_weight);
  report(7, "kernel certificates", kernel_certificates);
  report(8, "operator oracles", operator_oracles);
  report(9, "commutator identities", commutator_identities);

  const auto cfg = RunConfig::load(FRACOP_SOURCE_DIR "/configs/inequality-suite.json");
  std::vector<InequalityReport> suite;
  report(10, "inequality suite", [&] {
    suite = run_suite(cfg);
    return inequality_suite(cfg, suite);
  });
  report(11, "determinism across thread counts", [&] { return determinism(cfg, suite); });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
