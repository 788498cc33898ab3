#include "fracop/error.hpp"
#include "fracop/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace fracop;

TEST_CASE("grid geometry") {
  const Grid g = Grid::line(-4, 4, 16);
  CHECK(g.h() == 0.5);
  CHECK(g.size() == 16);
  CHECK(g.midpoint(0)[0] == -3.75);
  CHECK(*g.locate({0.1, 0}) == 8);
  CHECK(*g.locate({4.0, 0}) == 15);
  CHECK_FALSE(g.locate({4.5, 0}).has_value());
  const Grid s = Grid::square(0, 1, 8);
  CHECK(s.size() == 64);
  CHECK(s.coords(s.index(3, 5)) == std::array<int, 2>{3, 5});
  CHECK_THROWS_AS(Grid::line(0, 1, 4), DomainError);
  CHECK_THROWS_AS(Grid::line(1, 0, 16), DomainError);
}

TEST_CASE("grid function invariants") {
  const Grid g = Grid::line(0, 1, 8);
  CHECK_THROWS_AS(GridFunction(g, std::vector<double>(7)), DomainError);
  CHECK_THROWS_AS(GridFunction(g, std::vector<double>(8, NAN)), DomainError);
  const auto f = GridFunction::sample(g, [](const Point& p) { return p[0]; });
  CHECK(f.integral() == doctest::Approx(0.5));
  CHECK(f.times(f).size() == 8);
  CHECK_THROWS_AS(f.plus(GridFunction(Grid::line(0, 2, 8))), DomainError);
}

TEST_CASE("ball cells and measures") {
  const Grid g = Grid::line(-4, 4, 64);
  const Ball b{{0, 0}, 1.0};
  CHECK(b.measure(1) == 2.0);
  CHECK(b.cells(g).size() == 16);
  CHECK(cell_measure(g, b.cells(g)) == 2.0);
  const Ball d{{0, 0}, 1.0};
  CHECK(d.measure(2) == doctest::Approx(std::numbers::pi));
  const Grid s = Grid::square(-2, 2, 64);
  CHECK(cell_measure(s, d.cells(s)) == doctest::Approx(std::numbers::pi).epsilon(0.02));
  const Annulus a{{0, 0}, 1.0};
  CHECK(a.cells(g).size() == 16);
}

TEST_CASE("serialization round trip") {
  const Grid g = Grid::square(-1, 1, 8);
  const auto f = GridFunction::sample(g, [](const Point& p) { return std::sin(p[0]) + p[1] / 3; });
  std::stringstream header, csv;
  write_grid_function(f, header, csv);
  const auto back = read_grid_function(header, csv);
  CHECK(back.grid() == g);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
}
