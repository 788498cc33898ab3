#pragma once

// Kernel factors, matrix families with the separation hypothesis, composite
// kernels K(x, y) = ∏ k_i(x − A_i y), and size / Hörmander certificates.

#include "fracop/grid.hpp"
#include "fracop/young.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fracop {

/// Matrices A_1..A_m acting on R^n. Singular members are kept so the separation
/// check can report them; inverses exist only for invertible members.
class MatrixFamily {
 public:
  MatrixFamily(int n, std::vector<Eigen::MatrixXd> matrices);
  static MatrixFamily scalars(const std::vector<double>& a);

  int dim() const { return n_; }
  std::size_t size() const { return mats_.size(); }
  const Eigen::MatrixXd& matrix(std::size_t i) const { return mats_[i]; }
  const Eigen::MatrixXd& inverse(std::size_t i) const;
  double det(std::size_t i) const { return dets_[i]; }
  /// |det(A_i − A_j)|.
  double difference_det(std::size_t i, std::size_t j) const;
  double norm(std::size_t i) const;
  double inverse_norm(std::size_t i) const;

  Point apply(std::size_t i, const Point& x) const;
  Point apply_inverse(std::size_t i, const Point& x) const;

  /// Family of inverses (A_1^{-1}, …, A_m^{-1}).
  MatrixFamily inverted() const;

  nlohmann::json to_json() const;
  static MatrixFamily from_json(const nlohmann::json& j);

 private:
  int n_;
  std::vector<Eigen::MatrixXd> mats_;
  std::vector<Eigen::MatrixXd> invs_;
  std::vector<double> dets_;
};

struct HypothesisReport {
  bool pass = false;
  double min_det = 0.0;         // min |det(A_i − A_j)|, or |det A_1| when m = 1
  double min_member_det = 0.0;  // min |det A_i|
  std::string message;
};

inline constexpr double kSeparationEps = 1e-12;

/// Each |det A_i| and each |det(A_i − A_j)| must exceed kSeparationEps.
HypothesisReport check_hypothesis_h(const MatrixFamily& family);

/// Angular profile of a rough factor: 1D uses the two values Ω(±1); 2D uses
/// Σ_{j>=0} cos_coef[j] cos(jθ) + Σ_{j>=1} sin_coef[j−1] sin(jθ).
struct Omega {
  double plus = 1.0;
  double minus = 1.0;
  std::vector<double> cos_coef;
  std::vector<double> sin_coef;

  double operator()(const Point& unit, int dim) const;
  double sup_bound() const;
};

enum class FactorPreset { Power, Rough, Custom };

/// k_i with its order a_i ∈ (0, n] (power preset |t|^{a_i − n}) and Young function Ψ_i.
class KernelFactor {
 public:
  using Evaluator = std::function<double(const Point&)>;

  static KernelFactor power(double order, int n, YoungFunction psi = YoungFunction::linear());
  static KernelFactor rough(double order, int n, Omega omega,
                            YoungFunction psi = YoungFunction::linear());
  static KernelFactor custom(Evaluator f, double order, int n,
                             YoungFunction psi = YoungFunction::linear());

  /// k(t); t = 0 is singular and throws DomainError.
  double operator()(const Point& t) const;
  double order() const { return order_; }
  int dim() const { return n_; }
  const YoungFunction& psi() const { return psi_; }
  FactorPreset preset() const { return preset_; }
  const std::optional<Omega>& omega() const { return omega_; }

  /// t ↦ k(−A t).
  KernelFactor reflected(const Eigen::MatrixXd& a) const;

  nlohmann::json to_json() const;

 private:
  KernelFactor(Evaluator f, double order, int n, YoungFunction psi, FactorPreset preset);

  Evaluator eval_;
  double order_;
  int n_;
  YoungFunction psi_;
  FactorPreset preset_;
  std::optional<Omega> omega_;
};

class CompositeKernel {
 public:
  CompositeKernel(std::vector<KernelFactor> factors, MatrixFamily matrices);

  const std::vector<KernelFactor>& factors() const { return factors_; }
  const MatrixFamily& matrices() const { return matrices_; }
  int dim() const { return matrices_.dim(); }
  std::size_t size() const { return factors_.size(); }
  /// Σ a_i − (m − 1) n; the kernel is homogeneous of degree alpha_total − n.
  double alpha_total() const { return alpha_total_; }

  /// K(x, y); throws DomainError when some x − A_i y = 0.
  double operator()(const Point& x, const Point& y) const;
  /// The point A_i^{-1} x where factor i is singular.
  Point singular_point(std::size_t i, const Point& x) const;

  /// Kernel of the adjoint: factors t ↦ k_i(−A_i t) with matrices A_i^{-1}.
  CompositeKernel adjoint() const;

  std::string name;

 private:
  std::vector<KernelFactor> factors_;
  MatrixFamily matrices_;
  double alpha_total_;
};

/// T = I_α in R^n.
CompositeKernel riesz_kernel(double alpha, int n = 1);
/// |x − y|^{−a}|x + y|^{a−1} in 1D (α_total = 0).
CompositeKernel ricci_sjogren_kernel(double a);
/// |x − y|^{−a(1−α)}|x + y|^{−(1−a)(1−α)} in 1D (α_total = α).
CompositeKernel fractional_ricci_sjogren_kernel(double a, double alpha);

CompositeKernel kernel_from_json(const nlohmann::json& j);

struct SizeReport {
  double constant = 0.0;
  std::vector<double> per_scale;  // s^{n−a}‖k‖_{Ψ,|x|∼s}
};

/// Fractional size certificate sup_s s^{n−a} ‖k‖_{Ψ,|x|∼s} over s_grid.
SizeReport size_constant(const KernelFactor& k, const std::vector<double>& s_grid);

struct HormanderReport {
  double partial_sum = 0.0;
  double tail_slope = 0.0;             // log2(term_M / term_{M−1})
  std::vector<double> terms;           // one per annulus j = 1..M
  double coverage = 1.0;               // fraction of annuli inside max_radius
};

/// Σ_{j=1}^{M} (2^j R)^{n−a} j^order ‖k(· − x) − k(·)‖_{Ψ,|y|∼2^j R}, R = R_factor·|x|.
/// Annuli beyond max_radius (when positive) are skipped.
HormanderReport hormander_constant(const KernelFactor& k, int order, const Point& x,
                                   double r_factor, int m_terms, double max_radius = 0.0);

/// 2 · max_i ‖A_i‖‖A_i^{-1}‖.
double separation_constant(const MatrixFamily& family);

}  // namespace fracop
