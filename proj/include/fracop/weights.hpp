#pragma once

// Weights and BMO: Muckenhoupt-type constants over ball families, the matrix
// compatibility constant w(Ax) <= c w(x), BMO / weighted BMO norms, the
// nested average comparison, and example weights.

#include "fracop/grid.hpp"
#include "fracop/maximal.hpp"
#include "fracop/young.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <limits>
#include <string>
#include <vector>

namespace fracop {

inline constexpr double kInfExponent = std::numeric_limits<double>::infinity();

/// Analytic weight preset: constant(c), power(γ) = |x|^γ, log-example,
/// spiky(height, center, width, floor), random(seed, sigma) = lognormal block noise.
struct WeightPreset {
  std::string tag = "constant";
  std::vector<double> params;

  double operator()(const Point& x, int dim) const;
  nlohmann::json to_json() const;
  static WeightPreset from_json(const nlohmann::json& j);
};

struct Weight {
  GridFunction w;
  std::string tag = "custom";
  std::string warning;

  explicit Weight(GridFunction values, std::string tag = "custom");
};

Weight make_example_weight(const WeightPreset& preset, const Grid& grid);
Weight make_example_weight(const std::string& tag, const std::vector<double>& params,
                           const Grid& grid);

/// Per-ball ‖w‖_{q,B} ‖w^{-1}‖_{p′,B}; q or p′ = ∞ use maxima.
std::vector<double> apq_per_ball(const Weight& w, double p, double q, const DiscreteBalls& balls);
double apq_constant(const Weight& w, double p, double q, const DiscreteBalls& balls);
double apq_constant(const Weight& w, double p, double q, const BallFamily& family = {});

/// Per-ball (avg w)(avg w^{1−p′})^{p−1}; p = 1 uses (avg w)·max w^{-1}.
std::vector<double> ap_per_ball(const Weight& w, double p, const DiscreteBalls& balls);
double ap_constant(const Weight& w, double p, const DiscreteBalls& balls);
double ap_constant(const Weight& w, double p, const BallFamily& family = {});

struct AInfinitySweep {
  std::vector<double> p_values{1.5, 2.0, 4.0, 8.0};
  std::vector<double> constants;
  double best = 0.0;
};
/// A_∞ as the minimum of A_p constants over a p sweep.
AInfinitySweep a_infinity_sweep(const Weight& w, const DiscreteBalls& balls);

/// sup_B ‖w‖_{q,B} ‖w^{-1}‖_{Ψ,B}.
double bump_constant(const Weight& w, double q, const YoungFunction& psi,
                     const DiscreteBalls& balls);
double bump_constant(const Weight& w, double q, const YoungFunction& psi,
                     const BallFamily& family = {});

struct CompatReport {
  double constant = 0.0;
  double coverage = 0.0;  // fraction of grid points with Ax inside the box
};

/// sup over grid x (with Ax in the box) of w(Ax)/w(x), nearest-cell sampling.
CompatReport matrix_compat_constant(const Weight& w, const Eigen::MatrixXd& a);

double bmo_norm(const GridFunction& b, const DiscreteBalls& balls);
double bmo_norm(const GridFunction& b, const BallFamily& family = {});

/// ‖w M^# f‖_∞.
double weighted_bmo_norm(const GridFunction& f, const Weight& w, const DiscreteBalls& balls);
double weighted_bmo_norm(const GridFunction& f, const Weight& w, const BallFamily& family = {});

struct BmoFunction {
  GridFunction b;
  double norm = 0.0;

  BmoFunction(GridFunction values, const DiscreteBalls& balls);
  BmoFunction(GridFunction values, const BallFamily& family = {});
};

/// |b_A − b_B| / ((|B|/|A|)‖b‖_BMO) for A ⊆ B.
double nested_average_check(const BmoFunction& b, const CellSet& a_set, const CellSet& b_set);

}  // namespace fracop
