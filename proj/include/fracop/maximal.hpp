#pragma once

// Maximal operators over discrete ball families: M, M_α, M_{α,Ψ}, iterated M,
// sharp and δ-sharp maximal functions.

#include "fracop/grid.hpp"
#include "fracop/young.hpp"

#include <functional>
#include <span>
#include <vector>

namespace fracop {

enum class FamilyMode {
  AllCentered,  // centered at every cell midpoint, radii h·2^j (plus the box diameter)
  Oracle,       // 1D only: every center on the half-cell lattice, every half-cell radius
};

struct BallFamily {
  FamilyMode mode = FamilyMode::AllCentered;
  /// AllCentered radii override (length units), used when custom_radii is set.
  std::vector<double> radii;
  bool custom_radii = false;

  static BallFamily all_centered() { return {}; }
  static BallFamily oracle() { return {FamilyMode::Oracle, {}, false}; }
  static BallFamily with_radii(std::vector<double> r) {
    return {FamilyMode::AllCentered, std::move(r), true};
  }
};

/// Cells i in [first, last] of one grid row.
struct CellSpan {
  int row;
  int first;
  int last;
};

/// A ball family realised on a grid: each ball is a list of row spans (clipped to
/// the box) and the Lebesgue measure of the unclipped ball.
class DiscreteBalls {
 public:
  DiscreteBalls(const Grid& grid, const BallFamily& family);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return measure_.size(); }
  std::span<const CellSpan> spans(std::size_t b) const {
    return {spans_.data() + offset_[b], offset_[b + 1] - offset_[b]};
  }
  double measure(std::size_t b) const { return measure_[b]; }
  std::size_t count(std::size_t b) const { return count_[b]; }
  const Ball& ball(std::size_t b) const { return balls_[b]; }
  CellSet cells(std::size_t b) const;

  /// Values of f on ball b, appended to out after clearing it.
  void gather(std::size_t b, std::span<const double> f, std::vector<double>& out) const;

  /// Per-ball averages via row prefix sums.
  std::vector<double> averages(std::span<const double> f) const;

  /// Per-ball value of an arbitrary functional of the gathered cell values.
  std::vector<double> evaluate(
      const std::function<double(std::span<const double>, std::size_t ball)>& fn,
      std::span<const double> f) const;

  /// out[x] = max over balls containing cell x of value[b].
  std::vector<double> sup_containing(std::span<const double> value) const;

 private:
  void add(std::vector<CellSpan> spans, const Ball& ball, double measure);

  Grid grid_;
  std::vector<CellSpan> spans_;
  std::vector<std::size_t> offset_{0};
  std::vector<double> measure_;
  std::vector<std::size_t> count_;
  std::vector<Ball> balls_;
};

/// Dyadic AllCentered radii h·2^j below the diameter, then the diameter.
std::vector<double> default_radii(const Grid& grid);

/// M_{α,Ψ} f(x) = sup_{B∋x} |B|^{α/n} ‖f‖_{Ψ,B}.
GridFunction orlicz_maximal(const GridFunction& f, double alpha, const YoungFunction& psi,
                            const BallFamily& family = {});
GridFunction orlicz_maximal(const GridFunction& f, double alpha, const YoungFunction& psi,
                            const DiscreteBalls& balls);

/// Hardy–Littlewood maximal function (α = 0, Ψ = t).
GridFunction hardy_littlewood(const GridFunction& f, const DiscreteBalls& balls);

GridFunction sharp_maximal(const GridFunction& f, const BallFamily& family = {});
GridFunction sharp_maximal(const GridFunction& f, const DiscreteBalls& balls);

/// Mean oscillation (1/|B|)Σ_B |f − f_B| for every ball of the family.
std::vector<double> ball_oscillations(const GridFunction& f, const DiscreteBalls& balls);

/// M^#(|f|^δ)^{1/δ}.
GridFunction delta_sharp(const GridFunction& f, double delta, const BallFamily& family = {});
GridFunction delta_sharp(const GridFunction& f, double delta, const DiscreteBalls& balls);

/// M applied k times.
GridFunction iterated_maximal(const GridFunction& f, int k, const BallFamily& family = {});

}  // namespace fracop
