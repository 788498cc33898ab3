#include "fracop/error.hpp"
#include "fracop/rng.hpp"
#include "fracop/weights.hpp"

#include <doctest.h>

#include <cmath>

using namespace fracop;
using doctest::Approx;

namespace {

Eigen::MatrixXd scalar(double a) { return Eigen::MatrixXd::Constant(1, 1, a); }

}  // namespace

TEST_CASE("presets") {
  const WeightPreset log_ex{"log-example", {}};
  CHECK(log_ex({std::exp(-2.0), 0}, 1) == Approx(2.0));
  CHECK(log_ex({-std::exp(-2.0), 0}, 1) == Approx(2.0));
  CHECK(log_ex({1.0, 0}, 1) == 1.0);
  const Grid g = Grid::line(-4, 4, 64);
  const auto one = make_example_weight("power", {0.0}, g);
  for (double v : one.w.values()) CHECK(v == 1.0);
  CHECK(make_example_weight("power", {-1.5}, g).warning.size() > 0);
  CHECK(make_example_weight("power", {0.3}, g).warning.empty());
  CHECK_THROWS_AS(make_example_weight("triangle", {}, g), ConfigError);
  CHECK_THROWS_AS(Weight(GridFunction(g, 0.0)), DomainError);
  const auto j = WeightPreset{"spiky", {100, 0.5, 0.1, 1e-3}}.to_json();
  CHECK(WeightPreset::from_json(j).params.size() == 4);
  // Random preset is constant on blocks of side 1/8 and reproducible.
  const WeightPreset rnd{"random", {7, 1.0}};
  CHECK(rnd({0.01, 0}, 1) == rnd({0.12, 0}, 1));
  CHECK(rnd({0.01, 0}, 1) != rnd({0.13, 0}, 1));
}

TEST_CASE("apq constants") {
  const Grid g = Grid::line(-4, 4, 128);
  const auto one = make_example_weight("constant", {1.0}, g);
  for (double p : {1.0, 1.5, 2.0, 4.0})
    for (double q : {1.0, 2.0, 3.0, kInfExponent}) CHECK(apq_constant(one, p, q) == Approx(1.0));

  double c[2];
  double d[2];
  int k = 0;
  for (int n : {256, 512}) {
    const Grid gn = Grid::line(-4, 4, n);
    c[k] = apq_constant(make_example_weight("power", {0.3}, gn), 2, 2);
    d[k] = apq_constant(make_example_weight("power", {-1.0}, gn), 2, 2);
    ++k;
  }
  MESSAGE("A_{2,2} of |x|^0.3: " << c[0] << " -> " << c[1]);
  MESSAGE("A_{2,2} of |x|^-1: " << d[0] << " -> " << d[1]);
  CHECK(c[1] / c[0] == Approx(1.0).epsilon(0.1));
  CHECK(d[1] / d[0] > 1.3);
}

TEST_CASE("ap constants") {
  const Grid g = Grid::line(-4, 4, 128);
  CHECK(ap_constant(make_example_weight("constant", {3.7}, g), 2.0) == Approx(1.0));
  CHECK(ap_constant(make_example_weight("constant", {3.7}, g), 1.0) == Approx(1.0));
  double c[2];
  int k = 0;
  for (int n : {256, 512}) {
    c[k++] = ap_constant(make_example_weight("log-example", {}, Grid::line(-4, 4, n)), 1.0);
  }
  MESSAGE("A_1 of the log example: " << c[0] << " -> " << c[1]);
  CHECK(std::isfinite(c[1]));
  CHECK(c[1] / c[0] == Approx(1.0).epsilon(0.1));
  // A floor that tends to zero blows the constant up.
  const double mild = ap_constant(make_example_weight("spiky", {1, 0, 0.3, 1e-1}, g), 2.0);
  const double harsh = ap_constant(make_example_weight("spiky", {1, 0, 0.3, 1e-4}, g), 2.0);
  CHECK(harsh > 10 * mild);
}

TEST_CASE("bump constants") {
  const Grid g = Grid::line(-4, 4, 64);
  const auto one = make_example_weight("constant", {1.0}, g);
  for (const auto& psi : {YoungFunction::exp_minus_one(), YoungFunction::power_log(1, 2),
                          YoungFunction::power(3)}) {
    CHECK(bump_constant(one, 2.0, psi) == Approx(1.0 / psi.inverse(1.0)).epsilon(1e-9));
  }
  const auto w = make_example_weight("power", {0.3}, g);
  const double p = 2.0;
  CHECK(bump_constant(w, 2.0, YoungFunction::power(p / (p - 1))) ==
        Approx(apq_constant(w, p, 2.0)).epsilon(1e-8));
  double c[2];
  int k = 0;
  for (int n : {128, 256}) {
    c[k++] = bump_constant(make_example_weight("power", {0.3}, Grid::line(-4, 4, n)), 2.0,
                           YoungFunction::power_log(2, 1));
  }
  CHECK(c[1] / c[0] == Approx(1.0).epsilon(0.1));
}

TEST_CASE("matrix compatibility") {
  const Grid g = Grid::line(-4, 4, 512);
  const auto w = make_example_weight("log-example", {}, g);
  CHECK(matrix_compat_constant(w, scalar(1)).constant == 1.0);
  CHECK(matrix_compat_constant(w, scalar(-1)).constant == 1.0);
  const auto two = matrix_compat_constant(w, scalar(2));
  CHECK(two.constant == 1.0);
  CHECK(two.coverage == Approx(0.5).epsilon(0.01));
  const auto half = matrix_compat_constant(w, scalar(0.5));
  CHECK(half.constant == Approx(std::log(2 * std::exp(1.0))).epsilon(0.05));
  CHECK(half.coverage == 1.0);
  CHECK_THROWS_AS(matrix_compat_constant(w, scalar(0)), DomainError);
}

TEST_CASE("bmo norms") {
  const Grid g = Grid::line(-4, 4, 128);
  CHECK(bmo_norm(GridFunction(g, 2.0)) < 1e-14);
  double c[2];
  int k = 0;
  for (int n : {256, 512}) {
    const Grid gn = Grid::line(-1, 1, n);
    c[k++] = bmo_norm(GridFunction::sample(gn, [](const Point& p) { return std::log(std::abs(p[0])); }));
  }
  MESSAGE("BMO norm of log|x|: " << c[0] << " -> " << c[1]);
  CHECK(c[1] / c[0] == Approx(1.0).epsilon(0.1));
  const Grid unit = Grid::line(-1, 1, 256);
  const double lin = bmo_norm(GridFunction::sample(unit, [](const Point& p) { return p[0]; }));
  CHECK(lin == Approx(0.5).epsilon(0.02));
}

TEST_CASE("weighted bmo") {
  const Grid g = Grid::line(-4, 4, 128);
  const auto w = make_example_weight("power", {0.3}, g);
  CHECK(weighted_bmo_norm(GridFunction(g, 1.0), w) < 1e-14);
  const auto chi = GridFunction::sample(g, [](const Point& p) { return p[0] >= 0 && p[0] <= 1 ? 1.0 : 0.0; });
  const auto one = make_example_weight("constant", {1.0}, g);
  CHECK(weighted_bmo_norm(chi, one) == Approx(bmo_norm(chi)));
  const double v = weighted_bmo_norm(chi, w);
  CHECK(v > 0);
  CHECK(std::isfinite(v));
}

TEST_CASE("nested averages differ by at most the BMO scale") {
  const Grid g = Grid::line(-1, 1, 256);
  const DiscreteBalls balls(g, BallFamily{});
  const BmoFunction logb(GridFunction::sample(g, [](const Point& p) { return std::log(std::abs(p[0])); }),
                         balls);
  const BmoFunction cst(GridFunction(g, 4.0), balls);
  Xorshift64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t b = rng.below(balls.size());
    const auto cells = balls.cells(b);
    CHECK(nested_average_check(logb, cells, cells) == 0.0);
    CHECK(nested_average_check(cst, cells, cells) == 0.0);
    // Right half of the ball.
    const CellSet right(cells.begin() + cells.size() / 2, cells.end());
    CHECK(nested_average_check(logb, right, cells) <= 1.0 + 1e-12);
    CHECK(nested_average_check(cst, right, cells) == 0.0);
  }
  CHECK_THROWS_AS(nested_average_check(logb, {1, 2, 999}, {1, 2}), DomainError);
}

TEST_CASE("A_{p,p} and A_p per ball") {
  const Grid g = Grid::line(-4, 4, 128);
  const DiscreteBalls balls(g, BallFamily{});
  for (const auto& w : {make_example_weight("power", {0.3}, g), make_example_weight("log-example", {}, g),
                        make_example_weight("random", {5, 1.0}, g)}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const auto apq = apq_per_ball(w, p, p, balls);
      const auto ap = ap_per_ball(Weight(w.w.pow(p)), p, balls);
      for (std::size_t b = 0; b < balls.size(); ++b)
        CHECK(std::pow(apq[b], p) == Approx(ap[b]).epsilon(1e-9));
    }
    // Per-ball products are nonincreasing in p.
    const auto a1 = ap_per_ball(w, 1.0, balls);
    const auto a2 = ap_per_ball(w, 1.5, balls);
    const auto a3 = ap_per_ball(w, 3.0, balls);
    for (std::size_t b = 0; b < balls.size(); ++b) {
      CHECK(a2[b] <= a1[b] * (1 + 1e-9));
      CHECK(a3[b] <= a2[b] * (1 + 1e-9));
    }
  }
}

TEST_CASE("truncations") {
  const Grid g = Grid::line(-1, 1, 256);
  const DiscreteBalls balls(g, BallFamily{});
  const auto b = GridFunction::sample(g, [](const Point& p) { return std::log(std::abs(p[0])); });
  const double nb = bmo_norm(b, balls);
  for (double level : {0.5, 1.0, 2.0, 4.0}) CHECK(bmo_norm(b.clamped(level), balls) <= 2 * nb + 1e-12);
  const auto w = make_example_weight("power", {-0.5}, g);
  const double p = 2.0;
  const double base = ap_constant(w, p, balls);
  double worst = 0.0;
  for (double level : {1.0, 2.0, 5.0}) {
    const Weight wn(w.w.map([level](double v) { return std::min(v, level); }));
    worst = std::max(worst, ap_constant(wn, p, balls) / base);
  }
  MESSAGE("A_2(min(w, N)) / A_2(w) <= " << worst);
  CHECK(worst <= std::pow(2.0, p));
}
