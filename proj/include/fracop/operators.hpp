#pragma once

// Discretized T f(x) = ∫ K(x, y) f(y) dy on a grid, its commutators with a
// symbol b, the adjoint, and the conjugation e^{zb} T(e^{−zb} f).

#include "fracop/grid.hpp"
#include "fracop/kernels.hpp"

#include <json.hpp>

#include <span>
#include <vector>

namespace fracop {

enum class SingularPolicy { Exclude, CellAverage };

/// Cells whose closure contains a singular point A_i^{-1}x are either dropped or
/// integrated by graded subdivision (S^n sub-cells per level, recursing into the
/// sub-cells that still touch the singularity; the innermost level is dropped).
struct Quadrature {
  SingularPolicy policy = SingularPolicy::CellAverage;
  int subdivision = 8;
  int depth = 6;

  nlohmann::json to_json() const;
  static Quadrature from_json(const nlohmann::json& j);
};

struct OperatorSpec {
  CompositeKernel kernel;
  Quadrature quadrature{};
};

struct CommutatorSpec {
  OperatorSpec base;
  GridFunction b;
  int order = 1;
};

/// Quadrature weights W_c(x) for a fixed target list; every operator variant is a
/// weighted sum against these rows, so identities between them hold to rounding.
class OperatorMatrix {
 public:
  OperatorMatrix(const OperatorSpec& spec, const Grid& grid, std::vector<Point> targets);

  const Grid& grid() const { return grid_; }
  const std::vector<Point>& targets() const { return targets_; }
  std::span<const double> row(std::size_t t) const {
    return {weights_.data() + t * grid_.size(), grid_.size()};
  }

  std::vector<double> apply(const GridFunction& f) const;
  /// Σ_c (b(x) − b_c)^k W_c(x) f_c with b(x) the value of the cell containing x.
  std::vector<double> commutator(const GridFunction& b, int k, const GridFunction& f) const;
  /// e^{z b(x)} Σ_c W_c(x) e^{−z b_c} f_c.
  std::vector<double> conjugated(const GridFunction& b, double z, const GridFunction& f) const;
  /// b evaluated at the targets (nearest cell).
  std::vector<double> symbol_at_targets(const GridFunction& b) const;

 private:
  Grid grid_;
  std::vector<Point> targets_;
  std::vector<double> weights_;
};

/// Quadrature weights of one target: W_c(x) ≈ ∫_cell K(x, y) dy.
std::vector<double> quadrature_row(const OperatorSpec& spec, const Grid& grid, const Point& x);

/// Throws DomainError when x is outside the box or, for α_total = 0, closer than
/// the guard distance 2h between two singular images A_i^{-1}x, A_j^{-1}x.
void check_target(const OperatorSpec& spec, const Grid& grid, const Point& x);
bool target_admissible(const OperatorSpec& spec, const Grid& grid, const Point& x);

/// All cell midpoints that pass check_target.
std::vector<Point> guarded_targets(const OperatorSpec& spec, const Grid& grid);

std::vector<double> apply(const OperatorSpec& spec, const GridFunction& f,
                          const std::vector<Point>& targets);
std::vector<double> apply_commutator(const CommutatorSpec& spec, const GridFunction& f,
                                     const std::vector<Point>& targets);
std::vector<double> apply_adjoint(const OperatorSpec& spec, const GridFunction& g,
                                  const std::vector<Point>& targets);
OperatorSpec adjoint(const OperatorSpec& spec);

/// One commutator evaluation T^k_b f inside a batch; b may be null when order = 0.
struct CommutatorInput {
  const GridFunction* f = nullptr;
  const GridFunction* b = nullptr;
  int order = 0;
};

/// Evaluates many commutators row by row without storing the weight matrix;
/// out[j][t] is input j at target t.
std::vector<std::vector<double>> apply_batch(const OperatorSpec& spec, const Grid& grid,
                                             const std::vector<Point>& targets,
                                             const std::vector<CommutatorInput>& inputs);

/// Overflow guard: |z|·max|b| <= 20.
inline constexpr double kConjugationGuard = 20.0;
std::vector<double> conjugated_apply(const OperatorSpec& spec, const GridFunction& b, double z,
                                     const GridFunction& f, const std::vector<Point>& targets);

}  // namespace fracop
