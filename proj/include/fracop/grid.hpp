#pragma once

// Uniform cell grids on boxes in R^1 / R^2 and the sampled functions, balls,
// annuli and cell sets living on them.

#include <json.hpp>

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace fracop {

/// A point of R^n, n <= 2. In 1D the second coordinate is ignored.
using Point = std::array<double, 2>;

double distance(const Point& a, const Point& b, int dim);
double norm(const Point& a, int dim);

/// Uniform cell-centred grid over [lo, hi]^dim with N cells per axis. Cells are
/// square, so a 2D grid always lives on a square box.
class Grid {
 public:
  Grid(int dim, double lo, double hi, int n);

  static Grid line(double lo, double hi, int n) { return {1, lo, hi, n}; }
  static Grid square(double lo, double hi, int n) { return {2, lo, hi, n}; }

  int dim() const { return dim_; }
  int n() const { return n_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double h() const { return h_; }
  double cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }
  std::size_t size() const { return dim_ == 1 ? std::size_t(n_) : std::size_t(n_) * n_; }
  double diameter() const;

  std::size_t index(int i, int j = 0) const { return std::size_t(j) * n_ + i; }
  std::array<int, 2> coords(std::size_t idx) const {
    return {int(idx % n_), dim_ == 1 ? 0 : int(idx / n_)};
  }
  double axis_mid(int i) const { return lo_ + (i + 0.5) * h_; }
  Point midpoint(std::size_t idx) const;
  /// Cell containing p (half-open cells), or nothing when p is outside the box.
  std::optional<std::size_t> locate(const Point& p) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_;
  double lo_;
  double hi_;
  int n_;
  double h_;
};

/// Sorted list of cell indices.
using CellSet = std::vector<std::size_t>;

/// Real function sampled at cell midpoints; integrals are cell sums.
class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values);
  explicit GridFunction(Grid grid, double fill = 0.0);

  static GridFunction sample(const Grid& grid, const std::function<double(const Point&)>& f);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// Value of the cell containing p (nearest-cell evaluation); nothing outside the box.
  std::optional<double> at(const Point& p) const;

  double integral() const;
  double max_abs() const;
  bool is_zero() const;

  GridFunction map(const std::function<double(double)>& f) const;
  GridFunction abs() const;
  GridFunction pow(double e) const;
  GridFunction scaled(double c) const;
  GridFunction times(const GridFunction& other) const;
  GridFunction plus(const GridFunction& other) const;
  /// clamp(values, -level, level).
  GridFunction clamped(double level) const;

 private:
  void check_same(const GridFunction& other) const;

  Grid grid_;
  std::vector<double> values_;
};

/// Euclidean ball. Its cell set on a grid is the set of cells whose midpoint lies
/// in the closed ball, clipped to the box.
struct Ball {
  Point center{};
  double radius = 1.0;

  /// Lebesgue measure of the (unclipped) ball: 2r in 1D, πr² in 2D.
  double measure(int dim) const;
  bool contains(const Point& p, int dim) const;
  CellSet cells(const Grid& grid) const;
};

/// |x - center| ∼ s, i.e. s < |x - center| <= 2s.
struct Annulus {
  Point center{};
  double inner = 1.0;

  Ball outer_ball() const { return {center, 2.0 * inner}; }
  CellSet cells(const Grid& grid) const;
};

/// Measure of a cell set (cell count times cell volume).
double cell_measure(const Grid& grid, const CellSet& cells);
double average(const GridFunction& f, const CellSet& cells);

nlohmann::json grid_to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);

/// JSON header (grid + value count) and CSV of values, one per line.
void write_grid_function(const GridFunction& f, std::ostream& header, std::ostream& csv);
GridFunction read_grid_function(std::istream& header, std::istream& csv);

}  // namespace fracop
