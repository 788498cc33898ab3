#pragma once

// Young functions: closed-form kinds, numeric inverses, tabulated
// complementary functions, and the growth/compatibility certificates built
// on top of them.

#include <json.hpp>

#include <string>
#include <variant>
#include <vector>

namespace fracop {

enum class YoungKind { Linear, Power, PowerLog, ExpMinusOne, LinfMarker };

/// A Young function Ψ from a closed family:
///   Linear        t
///   Power(r)      t^r,                r > 1
///   PowerLog(r,β) t^r log(e+t)^β,     r >= 1, β > 0 (β < 0 allowed when r > 1)
///   ExpMinusOne   e^t - 1
///   LinfMarker    sentinel for L^∞; norms against it are essential suprema.
class YoungFunction {
 public:
  YoungFunction() = default;

  static YoungFunction linear();
  static YoungFunction power(double r);
  static YoungFunction power_log(double r, double beta);
  static YoungFunction exp_minus_one();
  static YoungFunction linf();
  /// φ_k(t) = t log(e+t)^k; Linear when k = 0.
  static YoungFunction phi_k(int k);

  YoungKind kind() const { return kind_; }
  double r() const { return r_; }
  double beta() const { return beta_; }
  /// Threshold for asymptotic comparisons.
  double t0() const { return t0_; }
  YoungFunction with_t0(double t0) const;
  bool is_linf() const { return kind_ == YoungKind::LinfMarker; }

  /// Ψ(t). Throws DomainError for t < 0 or LinfMarker.
  double operator()(double t) const;
  /// log Ψ(t) for t > 0, computed without overflow.
  double log_eval(double t) const;
  /// Generalized inverse sup{t : Ψ(t) <= s}; LinfMarker is treated as ≡ 1.
  double inverse(double s, double tol = 1e-9) const;
  /// lim_{t→∞} Ψ(t)/t (finite only for Linear).
  double asymptotic_slope() const;
  /// Right derivative at 0.
  double slope_at_zero() const;

  std::string name() const;
  nlohmann::json to_json() const;
  static YoungFunction from_json(const nlohmann::json& j);

  friend bool operator==(const YoungFunction&, const YoungFunction&) = default;

 private:
  YoungFunction(YoungKind kind, double r, double beta) : kind_(kind), r_(r), beta_(beta) {}

  YoungKind kind_ = YoungKind::Linear;
  double r_ = 1.0;
  double beta_ = 0.0;
  double t0_ = 0.0;
};

double eval(const YoungFunction& psi, double t);
double inverse(const YoungFunction& psi, double s, double tol = 1e-9);

/// Discrete convexity/monotonicity check on a logarithmic sample grid.
bool is_young_on_grid(const YoungFunction& psi, double t_max = 1e3, int points = 400,
                      double tol = 1e-9);

/// Ψ̄(s) = sup_{t>=0} (st − Ψ(t)), tabulated on [0, s_max]. Evaluation between
/// nodes re-solves the supremum inside the bracket spanned by the neighbouring
/// maximizers, so the table doubles as a monotone search index.
class ComplementaryFunction {
 public:
  ComplementaryFunction(YoungFunction base, double s_max, int nodes = 513);

  const YoungFunction& base() const { return base_; }
  double s_max() const { return s_max_; }
  /// First s where the supremum is infinite (+inf when none).
  double degenerate_from() const { return degenerate_from_; }
  bool degenerate() const;

  /// Ψ̄(s); +inf past degenerate_from().
  double operator()(double s) const;
  /// sup{s : Ψ̄(s) <= u}.
  double inverse(double u) const;
  /// Maximizer t*(s) of st − Ψ(t).
  double argmax(double s) const;

  const std::vector<double>& nodes() const { return s_nodes_; }
  const std::vector<double>& values() const { return values_; }

 private:
  double solve(double s, double t_lo, double t_hi, double* t_star) const;
  double bracket_hi(double s) const;

  YoungFunction base_;
  double s_max_;
  double degenerate_from_;
  std::vector<double> s_nodes_;
  std::vector<double> values_;
  std::vector<double> argmax_;
};

ComplementaryFunction complementary(const YoungFunction& psi, double s_max);

/// Either a Young function or a tabulated complementary; both expose inverse().
using InverseSource = std::variant<YoungFunction, ComplementaryFunction>;

double inverse_of(const InverseSource& src, double t);

struct TRange {
  double lo = 1.0;
  double hi = 1e6;
  int points = 241;
};

struct CompatibilityReport {
  double constant = 0.0;    // sup over the grid of (∏ inverses)/t
  double tail_slope = 0.0;  // log-log slope of the ratio over the last decade
  bool certified = false;   // finite constant and non-growing tail
};

/// sup_t Ψ_1^{-1}(t)⋯Ψ_m^{-1}(t)·extra^{-1}(t)·φ^{-1}(t) / t on a log grid.
CompatibilityReport compatibility_report(const std::vector<InverseSource>& psis,
                                         const std::vector<InverseSource>& extra,
                                         const YoungFunction& phi, TRange range = {});

double compatibility_constant(const std::vector<InverseSource>& psis,
                              const std::vector<InverseSource>& extra,
                              const YoungFunction& phi, TRange range = {});

/// sup_t ∏ nums_i^{-1}(t) / den^{-1}(t) on a log grid, e.g. E^{-1}F^{-1} <= c φ^{-1}.
CompatibilityReport inverse_domination_report(const std::vector<InverseSource>& nums,
                                              const YoungFunction& den, TRange range = {});

struct GrowthCertificate {
  double value = 0.0;       // truncated integral ∫_1^T
  double tail_slope = 0.0;  // log-log slope of the integrand over [T/10, T]
  bool certified = false;   // tail_slope < -1 - margin
};

inline constexpr double kSlopeMargin = 0.05;

/// ∫_1^T φ(t)^{q/p} t^{-q} dt with 1/q = 1/p − α/n.
GrowthCertificate bp_alpha_integral(const YoungFunction& phi, double p, double alpha, int n,
                                    double T = 1e6);

/// Classical B_p test ∫_1^T Φ(t)^γ t^{-p} dt/t for Φ^γ (γ = 1 gives Φ itself).
GrowthCertificate bp_integral(const YoungFunction& phi, double p, double gamma = 1.0,
                              double T = 1e6);

struct BumpHypothesisReport {
  bool b_condition = false;
  bool inverse_condition = false;
  double inverse_constant = 0.0;
  std::vector<double> rho_samples;
  std::vector<GrowthCertificate> b_certificates;
  bool holds() const { return b_condition && inverse_condition; }
};

/// Hypotheses of the bump-type bound for M_{α,η}: η^{1+ρα/(n−α)} ∈ B_{ρn/(n−α)}
/// on sampled ρ above β(n−α)/(n−αβ), and φ^{-1}(t) t^{α/n} ≲ η^{-1}(t).
BumpHypothesisReport bump_maximal_hypothesis(const YoungFunction& eta, const YoungFunction& phi,
                                     double beta, double p, double alpha, int n);

}  // namespace fracop
