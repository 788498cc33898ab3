#include "fracop/grid.hpp"

#include "fracop/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace fracop {

namespace {
// Relative slack for closed-ball membership tests on floating midpoints.
constexpr double kMembershipSlack = 1e-12;
}  // namespace

double distance(const Point& a, const Point& b, int dim) {
  const double dx = a[0] - b[0];
  if (dim == 1) return std::abs(dx);
  return std::hypot(dx, a[1] - b[1]);
}

double norm(const Point& a, int dim) { return distance(a, Point{0.0, 0.0}, dim); }

Grid::Grid(int dim, double lo, double hi, int n) : dim_(dim), lo_(lo), hi_(hi), n_(n) {
  if (dim != 1 && dim != 2) throw DomainError("grid dimension must be 1 or 2");
  if (!(hi > lo)) throw DomainError("grid box must have hi > lo");
  if (n < 8) throw DomainError("grid needs at least 8 cells per axis");
  h_ = (hi - lo) / n;
}

double Grid::diameter() const { return (hi_ - lo_) * (dim_ == 1 ? 1.0 : std::sqrt(2.0)); }

Point Grid::midpoint(std::size_t idx) const {
  const auto c = coords(idx);
  return {axis_mid(c[0]), dim_ == 1 ? 0.0 : axis_mid(c[1])};
}

std::optional<std::size_t> Grid::locate(const Point& p) const {
  auto axis = [&](double x) -> std::optional<int> {
    if (!(x >= lo_) || !(x <= hi_)) return std::nullopt;
    int i = static_cast<int>(std::floor((x - lo_) / h_));
    return std::clamp(i, 0, n_ - 1);
  };
  const auto i = axis(p[0]);
  if (!i) return std::nullopt;
  if (dim_ == 1) return index(*i);
  const auto j = axis(p[1]);
  if (!j) return std::nullopt;
  return index(*i, *j);
}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("grid function: value count mismatch");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("grid function: non-finite value");
  }
}

GridFunction::GridFunction(Grid grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

GridFunction GridFunction::sample(const Grid& grid,
                                  const std::function<double(const Point&)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.midpoint(i));
  return {grid, std::move(v)};
}

std::optional<double> GridFunction::at(const Point& p) const {
  const auto idx = grid_.locate(p);
  if (!idx) return std::nullopt;
  return values_[*idx];
}

double GridFunction::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * grid_.cell_volume();
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool GridFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

GridFunction GridFunction::map(const std::function<double(double)>& f) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), f);
  return {grid_, std::move(v)};
}

GridFunction GridFunction::abs() const {
  return map([](double v) { return std::abs(v); });
}

GridFunction GridFunction::pow(double e) const {
  return map([e](double v) { return std::pow(std::abs(v), e); });
}

GridFunction GridFunction::scaled(double c) const {
  return map([c](double v) { return c * v; });
}

void GridFunction::check_same(const GridFunction& other) const {
  if (!(grid_ == other.grid_)) throw DomainError("grid functions live on different grids");
}

GridFunction GridFunction::times(const GridFunction& other) const {
  check_same(other);
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] * other.values_[i];
  return {grid_, std::move(v)};
}

GridFunction GridFunction::plus(const GridFunction& other) const {
  check_same(other);
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] + other.values_[i];
  return {grid_, std::move(v)};
}

GridFunction GridFunction::clamped(double level) const {
  return map([level](double v) { return std::clamp(v, -level, level); });
}

double Ball::measure(int dim) const {
  return dim == 1 ? 2.0 * radius : std::numbers::pi * radius * radius;
}

bool Ball::contains(const Point& p, int dim) const {
  return distance(p, center, dim) <= radius * (1.0 + kMembershipSlack);
}

CellSet Ball::cells(const Grid& grid) const {
  if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
  CellSet out;
  const double h = grid.h();
  const double r = radius * (1.0 + kMembershipSlack);
  auto axis_range = [&](double c, double half) {
    int a = static_cast<int>(std::ceil((c - half - grid.lo()) / h - 0.5));
    int b = static_cast<int>(std::floor((c + half - grid.lo()) / h - 0.5));
    return std::pair{std::max(a - 1, 0), std::min(b + 1, grid.n() - 1)};
  };
  const auto [i0, i1] = axis_range(center[0], r);
  if (grid.dim() == 1) {
    for (int i = i0; i <= i1; ++i) {
      if (std::abs(grid.axis_mid(i) - center[0]) <= r) out.push_back(grid.index(i));
    }
    return out;
  }
  const auto [j0, j1] = axis_range(center[1], r);
  for (int j = j0; j <= j1; ++j) {
    const double dy = grid.axis_mid(j) - center[1];
    for (int i = i0; i <= i1; ++i) {
      const double dx = grid.axis_mid(i) - center[0];
      if (dx * dx + dy * dy <= r * r) out.push_back(grid.index(i, j));
    }
  }
  return out;
}

CellSet Annulus::cells(const Grid& grid) const {
  CellSet out;
  const double s = inner * (1.0 + kMembershipSlack);
  for (std::size_t idx : outer_ball().cells(grid)) {
    if (distance(grid.midpoint(idx), center, grid.dim()) > s) out.push_back(idx);
  }
  return out;
}

double cell_measure(const Grid& grid, const CellSet& cells) {
  return static_cast<double>(cells.size()) * grid.cell_volume();
}

double average(const GridFunction& f, const CellSet& cells) {
  if (cells.empty()) throw DomainError("average over an empty cell set");
  double s = 0.0;
  for (std::size_t i : cells) s += f[i];
  return s / static_cast<double>(cells.size());
}

nlohmann::json grid_to_json(const Grid& grid) {
  return {{"dim", grid.dim()}, {"box", {grid.lo(), grid.hi()}}, {"N", grid.n()}};
}

Grid grid_from_json(const nlohmann::json& j) {
  try {
    const auto box = j.at("box");
    return Grid(j.value("dim", 1), box.at(0).get<double>(), box.at(1).get<double>(),
                j.at("N").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

void write_grid_function(const GridFunction& f, std::ostream& header, std::ostream& csv) {
  nlohmann::json j = {{"grid", grid_to_json(f.grid())}, {"count", f.size()},
                      {"layout", "row-major, x fastest"}};
  header << j.dump(2) << '\n';
  char buf[32];
  for (double v : f.values()) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    csv << buf << '\n';
  }
}

GridFunction read_grid_function(std::istream& header, std::istream& csv) {
  const auto j = nlohmann::json::parse(header);
  const Grid grid = grid_from_json(j.at("grid"));
  std::vector<double> v;
  v.reserve(grid.size());
  std::string line;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    v.push_back(std::stod(line));
  }
  return {grid, std::move(v)};
}

}  // namespace fracop
