#pragma once

// The inequality harness: empirical best constants for the Coifman, pointwise
// sharp, strong-type, weighted BMO, two-weight and endpoint inequalities over a
// test family, certified by stability under grid refinement.

#include "fracop/family.hpp"
#include "fracop/operators.hpp"
#include "fracop/young.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace fracop {

enum class ScenarioKind { Coifman, PointwiseSharp, StrongType, WeightedBmo, TwoWeight, Endpoint };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& s);

enum class EndpointMode { MaximalPhi, DerivedD };

struct Thresholds {
  double tau = 0.2;          // allowed relative change of the sup ratio under refinement
  double tol = 1e-9;
  double lhs_guard = 1e150;  // tests whose left-hand side exceeds this are skipped
  double certificate_cap = 1e6;
};

struct TestResult {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool skipped = false;
  std::string note;
};

struct ResolutionResult {
  int n = 0;
  double sup_ratio = 0.0;
  bool inconsistent = false;  // some RHS vanished with a positive LHS
  std::size_t skipped = 0;
  std::vector<TestResult> tests;
  nlohmann::json diagnostics = nlohmann::json::object();
};

struct Certificate {
  std::string name;
  double value = 0.0;
  bool ok = false;
  std::string detail;
};

struct InequalityReport {
  std::string scenario;
  ScenarioKind kind = ScenarioKind::Coifman;
  std::string status;  // "pass", "fail" or "hypotheses not met"
  std::optional<bool> pass;
  double sup_ratio = 0.0;
  std::optional<ResolutionResult> coarse;
  std::optional<ResolutionResult> fine;
  double refinement_ratio = 0.0;
  std::vector<Certificate> certificates;
  std::vector<std::string> notes;
  nlohmann::json config_echo;

  nlohmann::json to_json() const;
};

/// Parameters shared by the per-resolution checks.
struct CheckSetup {
  OperatorSpec op;
  int order = 1;
  YoungFunction phi;  // M_{α,φ}; φ_k for power factors
  double p = 2.0;
};

/// Σ_i g(A_i x) (or g(A_i^{-1} x) when inverse) by nearest cell; points mapped
/// outside the box contribute nothing.
std::vector<double> matrix_pullback_sum(const GridFunction& g, const MatrixFamily& family,
                                        bool inverse);

/// ∫|T^k_b f|^p w over (‖b‖^{kp} Σ_i ∫ (M_{α,φ}f)^p w(A_i x)).
ResolutionResult coifman_check(const CheckSetup& setup, const FamilyInstance& fam,
                               const Thresholds& th = {});
/// The k = 0 form: ∫|Tf|^p w over Σ_i ∫ (M_{α,φ}f)^p w(A_i x).
ResolutionResult maximal_domination_check(const OperatorSpec& op, const YoungFunction& phi,
                                          double p, const FamilyInstance& fam,
                                          const Thresholds& th = {});
/// sup_x M_δ^#|T^k_b f| over Σ_{l<k}‖b‖^{k−l} M_ε(T^l_b f) + ‖b‖^k Σ_i M_{α,φ}f(A_i^{-1}x).
ResolutionResult pointwise_sharp_check(const CheckSetup& setup, double delta, double epsilon,
                                       const FamilyInstance& fam, const Thresholds& th = {});
/// ‖T^k_b f‖_{L^q(w^q)} over ‖b‖^k ‖f‖_{L^p(w^p)}.
ResolutionResult strong_type_check(const CheckSetup& setup, double q, const FamilyInstance& fam,
                                   const Thresholds& th = {});
/// ‖w M^#(T^k_b f)‖_∞ over ‖b‖^k ‖f w‖_{L^{n/α}}.
ResolutionResult weighted_bmo_check(const CheckSetup& setup, const FamilyInstance& fam,
                                    const Thresholds& th = {});
/// ∫|T^k_b f|^p u over ‖b‖^{kp} ∫|f|^p Σ_i M_{αp,D}u(A_i x).
ResolutionResult two_weight_check(const CheckSetup& setup, const YoungFunction& d,
                                  const FamilyInstance& fam, const Thresholds& th = {});
/// u{|T^k_b f| > λ} over ∫ φ_k(‖b‖^k|f|/λ) Σ_i (S u)(A_i x) with S = M_s; λ relative to ‖f‖_∞.
ResolutionResult endpoint_check(const CheckSetup& setup, const YoungFunction& s,
                                const std::vector<double>& lambdas, const FamilyInstance& fam,
                                const Thresholds& th = {});

/// One configured scenario, run at N and 2N.
struct Scenario {
  Scenario(std::string name_, ScenarioKind kind_, CheckSetup setup_)
      : name(std::move(name_)), kind(kind_), setup(std::move(setup_)) {}

  std::string name;
  ScenarioKind kind = ScenarioKind::Coifman;
  CheckSetup setup;
  double q = 0.0;
  double delta = 1.0 / 3.0;
  double epsilon = 2.0 / 3.0;
  double r = 2.0;
  double bump_eps = 0.5;
  EndpointMode mode = EndpointMode::MaximalPhi;
  double endpoint_r = 1.5;
  std::optional<YoungFunction> d_override;
  std::vector<double> lambdas{0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  TestFamily family;
  Grid grid = Grid::line(-4.0, 4.0, 256);
  BallFamily balls;
  Thresholds thresholds;
  nlohmann::json echo;

  static Scenario from_json(const nlohmann::json& j, const Thresholds& defaults = {},
                            const std::vector<std::uint64_t>& seeds = {});
};

/// Two-weight / endpoint-(b) Young functions from Table-2 wiring:
/// E = t^{p′} log(e+t)^{−1−δ}, F = t^p log(e+t)^{(k+1)p−1+ε}, D = t log(e+t)^{(k+1)p−1+ε}, δ = ε/(p−1).
struct BumpTriple {
  YoungFunction e;
  YoungFunction f;
  YoungFunction d;
};
BumpTriple bump_triple(double p, int k, double eps);

/// Precondition certificates at the coarse resolution.
std::vector<Certificate> certify(const Scenario& s, const FamilyInstance& coarse);

ResolutionResult run_resolution(const Scenario& s, const FamilyInstance& fam);

InequalityReport run_scenario(const Scenario& s);

/// Writes report.json (with the verbatim config text) and ratios.csv into dir.
void emit_report(const std::vector<InequalityReport>& reports, const std::string& config_text,
                 const std::string& dir);
std::string reports_json(const std::vector<InequalityReport>& reports,
                         const std::string& config_text);
std::string reports_csv(const std::vector<InequalityReport>& reports);

}  // namespace fracop
