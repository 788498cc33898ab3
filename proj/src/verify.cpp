#include "fracop/verify.hpp"

#include "fracop/error.hpp"
#include "fracop/maximal.hpp"
#include "fracop/orlicz.hpp"
#include "fracop/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace fracop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Hörmander partial sums certify when the last term ratio is at most 2^{-1/2}.
constexpr double kHormanderSlope = -0.5;
constexpr int kHormanderTerms = 16;
// Stored complementary tables of φ_k; values beyond re-solve the supremum.
constexpr double kComplementaryRange = 40.0;

struct Targets {
  std::vector<Point> points;
  std::vector<std::size_t> cells;
};

Targets make_targets(const OperatorSpec& op, const Grid& grid) {
  Targets t;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.midpoint(i);
    if (target_admissible(op, grid, x)) {
      t.points.push_back(x);
      t.cells.push_back(i);
    }
  }
  return t;
}

GridFunction to_grid(const Grid& grid, const Targets& t, const std::vector<double>& v) {
  GridFunction g(grid, 0.0);
  for (std::size_t i = 0; i < t.cells.size(); ++i) g[t.cells[i]] = v[i];
  return g;
}

struct Symbol {
  std::string id;
  const GridFunction* b;
  double norm;
};

// k = 0 ignores the symbol, so the family collapses to one pseudo-symbol.
std::vector<Symbol> symbols_for(const FamilyInstance& fam, int order) {
  std::vector<Symbol> out;
  if (order == 0) {
    out.push_back({"-", nullptr, 1.0});
    return out;
  }
  for (const auto& s : fam.symbols) out.push_back({s.id, &s.value.b, s.value.norm});
  return out;
}

// Commutator values T^l_b f for every (function, symbol) pair and each listed order.
struct CommutatorTable {
  std::vector<Symbol> symbols;
  std::vector<int> orders;
  std::vector<std::vector<double>> values;

  const std::vector<double>& at(std::size_t f, std::size_t s, std::size_t l) const {
    return values[(f * symbols.size() + s) * orders.size() + l];
  }
};

CommutatorTable commutators(const OperatorSpec& op, const FamilyInstance& fam,
                            const Targets& t, int order, std::vector<int> orders) {
  CommutatorTable table{symbols_for(fam, order), std::move(orders), {}};
  std::vector<CommutatorInput> inputs;
  for (const auto& f : fam.functions) {
    for (const auto& s : table.symbols) {
      for (int l : table.orders) inputs.push_back({&f.value, s.b, l});
    }
  }
  table.values = apply_batch(op, fam.grid, t.points, inputs);
  return table;
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

TestResult make_test(std::string id, double lhs, double rhs, const Thresholds& th) {
  TestResult r{std::move(id), lhs, rhs, 0.0, false, ""};
  if (!std::isfinite(lhs) || lhs > th.lhs_guard) {
    r.skipped = true;
    r.note = "left-hand side not finite at grid scale";
  } else if (lhs == 0.0) {
    r.ratio = 0.0;
  } else if (!(rhs > 0.0)) {
    r.ratio = kInf;
    r.note = "right-hand side vanishes";
  } else {
    r.ratio = lhs / rhs;
  }
  return r;
}

void finalize(ResolutionResult& res) {
  res.sup_ratio = 0.0;
  res.skipped = 0;
  for (const auto& t : res.tests) {
    if (t.skipped) {
      ++res.skipped;
      continue;
    }
    if (!std::isfinite(t.ratio)) res.inconsistent = true;
    res.sup_ratio = std::max(res.sup_ratio, t.ratio);
  }
}

std::string join_id(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '|';
    out += p;
  }
  return out;
}

// Σ_i w(A_i x) from the analytic weight, so points mapped outside the box still count.
std::vector<double> weight_pullback_sum(const WeightPreset& w, const MatrixFamily& family,
                                        const Grid& grid, double power) {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t x = 0; x < grid.size(); ++x) {
    for (std::size_t i = 0; i < family.size(); ++i) {
      out[x] += std::pow(w(family.apply(i, grid.midpoint(x)), grid.dim()), power);
    }
  }
  return out;
}

std::vector<GridFunction> maximal_of_functions(const FamilyInstance& fam, double alpha,
                                               const YoungFunction& phi) {
  std::vector<GridFunction> out;
  for (const auto& f : fam.functions) out.push_back(orlicz_maximal(f.value, alpha, phi, fam.balls));
  return out;
}

void require_order(int order) {
  if (order < 0) throw DomainError("commutator order must be >= 0");
}

YoungFunction factor_psi(const KernelFactor& f) {
  return f.preset() == FactorPreset::Power ? YoungFunction::linf() : f.psi();
}

KernelFactor effective_factor(const KernelFactor& f) {
  if (f.preset() == FactorPreset::Power) {
    return KernelFactor::power(f.order(), f.dim(), YoungFunction::linf());
  }
  return f;
}

Certificate cap_certificate(std::string name, double value, const Thresholds& th,
                            std::string detail = {}) {
  return {std::move(name), value, std::isfinite(value) && value < th.certificate_cap,
          std::move(detail)};
}

double conjugate(double p) { return p / (p - 1.0); }

bool unbounded_at_origin(const WeightPreset& w) {
  if (w.tag == "log-example") return true;
  return w.tag == "power" && !w.params.empty() && w.params[0] < 0.0;
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Coifman: return "coifman";
    case ScenarioKind::PointwiseSharp: return "pointwise-sharp";
    case ScenarioKind::StrongType: return "strong-type";
    case ScenarioKind::WeightedBmo: return "weighted-bmo";
    case ScenarioKind::TwoWeight: return "two-weight";
    case ScenarioKind::Endpoint: return "endpoint";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::Coifman, ScenarioKind::PointwiseSharp, ScenarioKind::StrongType,
                 ScenarioKind::WeightedBmo, ScenarioKind::TwoWeight, ScenarioKind::Endpoint}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown scenario kind '" + s + "'");
}

std::vector<double> matrix_pullback_sum(const GridFunction& g, const MatrixFamily& family,
                                        bool inverse) {
  const Grid& grid = g.grid();
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const Point p = grid.midpoint(x);
    for (std::size_t i = 0; i < family.size(); ++i) {
      const Point y = inverse ? family.apply_inverse(i, p) : family.apply(i, p);
      if (const auto v = g.at(y)) out[x] += *v;
    }
  }
  return out;
}

ResolutionResult coifman_check(const CheckSetup& setup, const FamilyInstance& fam,
                               const Thresholds& th) {
  require_order(setup.order);
  const auto& kernel = setup.op.kernel;
  const Grid& grid = fam.grid;
  const double vol = grid.cell_volume();
  const double p = setup.p;
  const Targets t = make_targets(setup.op, grid);
  const auto table = commutators(setup.op, fam, t, setup.order, {setup.order});
  const auto mf = maximal_of_functions(fam, kernel.alpha_total(), setup.phi);

  ResolutionResult res;
  res.n = grid.n();
  double simplified = 0.0;
  for (std::size_t wi = 0; wi < fam.weights.size(); ++wi) {
    const auto& w = fam.weights[wi].value.w;
    const auto wsum = weight_pullback_sum(fam.weight_presets[wi], kernel.matrices(), grid, 1.0);
    for (std::size_t fi = 0; fi < fam.functions.size(); ++fi) {
      double rhs_sum = 0.0, rhs_plain = 0.0;
      for (std::size_t x = 0; x < grid.size(); ++x) {
        const double m = std::pow(mf[fi][x], p);
        rhs_sum += m * wsum[x] * vol;
        rhs_plain += m * w[x] * vol;
      }
      for (std::size_t si = 0; si < table.symbols.size(); ++si) {
        const auto& v = table.at(fi, si, 0);
        double lhs = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) lhs += std::pow(std::abs(v[i]), p) * w[t.cells[i]] * vol;
        const double bk = std::pow(table.symbols[si].norm, setup.order * p);
        auto test = make_test(join_id({fam.functions[fi].id, fam.weights[wi].id, table.symbols[si].id}),
                              lhs, bk * rhs_sum, th);
        if (!test.skipped && lhs > 0.0 && bk * rhs_plain > 0.0) {
          simplified = std::max(simplified, lhs / (bk * rhs_plain));
        }
        res.tests.push_back(std::move(test));
      }
    }
  }
  res.diagnostics["simplified_sup_ratio"] = simplified;
  res.diagnostics["targets"] = t.cells.size();
  finalize(res);
  return res;
}

ResolutionResult maximal_domination_check(const OperatorSpec& op, const YoungFunction& phi,
                                          double p, const FamilyInstance& fam,
                                          const Thresholds& th) {
  return coifman_check(CheckSetup{op, 0, phi, p}, fam, th);
}

ResolutionResult pointwise_sharp_check(const CheckSetup& setup, double delta, double epsilon,
                                       const FamilyInstance& fam, const Thresholds& th) {
  require_order(setup.order);
  if (!(delta > 0.0 && delta < epsilon && epsilon <= 1.0)) {
    throw DomainError("pointwise sharp check needs 0 < delta < epsilon <= 1");
  }
  const auto& kernel = setup.op.kernel;
  const Grid& grid = fam.grid;
  const int k = setup.order;
  const Targets t = make_targets(setup.op, grid);
  std::vector<int> orders;
  for (int l = 0; l <= k; ++l) orders.push_back(l);
  const auto table = commutators(setup.op, fam, t, k, orders);
  const auto mf = maximal_of_functions(fam, kernel.alpha_total(), setup.phi);

  ResolutionResult res;
  res.n = grid.n();
  for (std::size_t fi = 0; fi < fam.functions.size(); ++fi) {
    const auto mf_pull = matrix_pullback_sum(mf[fi], kernel.matrices(), true);
    for (std::size_t si = 0; si < table.symbols.size(); ++si) {
      const double bn = table.symbols[si].norm;
      const auto g = to_grid(grid, t, table.at(fi, si, k)).abs();
      const auto lhs = delta_sharp(g, delta, fam.balls);
      std::vector<double> rhs(grid.size());
      for (std::size_t x = 0; x < grid.size(); ++x) rhs[x] = ipow(bn, k) * mf_pull[x];
      for (int l = 0; l < k; ++l) {
        const auto tl = to_grid(grid, t, table.at(fi, si, l)).pow(epsilon);
        const auto m = hardy_littlewood(tl, fam.balls);
        for (std::size_t x = 0; x < grid.size(); ++x) {
          rhs[x] += ipow(bn, k - l) * std::pow(m[x], 1.0 / epsilon);
        }
      }
      double best = 0.0, best_l = 0.0, best_r = 0.0;
      bool bad = false;
      for (std::size_t x = 0; x < grid.size(); ++x) {
        if (lhs[x] == 0.0) continue;
        if (!(rhs[x] > 0.0)) {
          bad = true;
          best_l = lhs[x];
          best_r = rhs[x];
          continue;
        }
        if (!bad && lhs[x] / rhs[x] > best) {
          best = lhs[x] / rhs[x];
          best_l = lhs[x];
          best_r = rhs[x];
        }
      }
      TestResult test{join_id({fam.functions[fi].id, table.symbols[si].id}), best_l, best_r, best,
                      false, ""};
      if (bad) {
        test.ratio = kInf;
        test.note = "right-hand side vanishes where M_delta^# is positive";
      }
      if (!std::isfinite(best_l) || best_l > th.lhs_guard) {
        test.skipped = true;
        test.note = "left-hand side not finite at grid scale";
      }
      res.tests.push_back(std::move(test));
    }
  }
  finalize(res);
  return res;
}

ResolutionResult strong_type_check(const CheckSetup& setup, double q, const FamilyInstance& fam,
                                   const Thresholds& th) {
  require_order(setup.order);
  const auto& kernel = setup.op.kernel;
  const Grid& grid = fam.grid;
  const double vol = grid.cell_volume();
  const double p = setup.p;
  const int k = setup.order;
  const Targets t = make_targets(setup.op, grid);
  const auto table = commutators(setup.op, fam, t, k, {k});
  const auto mf = maximal_of_functions(fam, kernel.alpha_total(), setup.phi);

  ResolutionResult res;
  res.n = grid.n();
  double probe = 0.0;
  double coifman_constant = 0.0;
  std::vector<std::pair<double, double>> route_terms;  // (∫(Mf)^q Σ w^q∘A_i, ‖f‖_{L^p(w^p)})
  for (std::size_t wi = 0; wi < fam.weights.size(); ++wi) {
    const auto& w = fam.weights[wi].value.w;
    const auto wq_sum = weight_pullback_sum(fam.weight_presets[wi], kernel.matrices(), grid, q);
    for (std::size_t fi = 0; fi < fam.functions.size(); ++fi) {
      const auto& f = fam.functions[fi].value;
      double fnorm = 0.0, mnorm = 0.0, mroute = 0.0;
      for (std::size_t x = 0; x < grid.size(); ++x) {
        fnorm += std::pow(std::abs(f[x]) * w[x], p) * vol;
        mnorm += std::pow(mf[fi][x] * w[x], q) * vol;
        mroute += std::pow(mf[fi][x], q) * wq_sum[x] * vol;
      }
      fnorm = std::pow(fnorm, 1.0 / p);
      if (fnorm > 0.0) {
        probe = std::max(probe, std::pow(mnorm, 1.0 / q) / fnorm);
        route_terms.emplace_back(mroute, fnorm);
      }
      for (std::size_t si = 0; si < table.symbols.size(); ++si) {
        const auto& v = table.at(fi, si, 0);
        double lq = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) lq += std::pow(std::abs(v[i]) * w[t.cells[i]], q) * vol;
        const double bk = ipow(table.symbols[si].norm, k);
        if (lq > 0.0 && bk > 0.0 && mroute > 0.0) {
          coifman_constant = std::max(coifman_constant, lq / (std::pow(bk, q) * mroute));
        }
        res.tests.push_back(make_test(
            join_id({fam.functions[fi].id, fam.weights[wi].id, table.symbols[si].id}),
            std::pow(lq, 1.0 / q), bk * fnorm, th));
      }
    }
  }
  double route = 0.0;
  for (const auto& [m, fnorm] : route_terms) {
    route = std::max(route, std::pow(coifman_constant * m, 1.0 / q) / fnorm);
  }
  res.diagnostics["q"] = q;
  res.diagnostics["maximal_probe"] = probe;
  res.diagnostics["coifman_constant_q"] = coifman_constant;
  res.diagnostics["coifman_route_estimate"] = route;
  finalize(res);
  return res;
}

ResolutionResult weighted_bmo_check(const CheckSetup& setup, const FamilyInstance& fam,
                                    const Thresholds& th) {
  require_order(setup.order);
  const auto& kernel = setup.op.kernel;
  const double alpha = kernel.alpha_total();
  if (!(alpha > 0.0)) throw DomainError("weighted BMO check needs alpha > 0 (n/alpha undefined)");
  const Grid& grid = fam.grid;
  const double vol = grid.cell_volume();
  const double s = grid.dim() / alpha;
  const int k = setup.order;
  const Targets t = make_targets(setup.op, grid);
  const auto table = commutators(setup.op, fam, t, k, {k});

  ResolutionResult res;
  res.n = grid.n();
  for (std::size_t wi = 0; wi < fam.weights.size(); ++wi) {
    const auto& w = fam.weights[wi].value;
    for (std::size_t fi = 0; fi < fam.functions.size(); ++fi) {
      const auto& f = fam.functions[fi].value;
      double fw = 0.0;
      for (std::size_t x = 0; x < grid.size(); ++x) fw += std::pow(std::abs(f[x]) * w.w[x], s) * vol;
      fw = std::pow(fw, 1.0 / s);
      for (std::size_t si = 0; si < table.symbols.size(); ++si) {
        const auto g = to_grid(grid, t, table.at(fi, si, 0));
        const double lhs = weighted_bmo_norm(g, w, fam.balls);
        res.tests.push_back(make_test(
            join_id({fam.functions[fi].id, fam.weights[wi].id, table.symbols[si].id}), lhs,
            ipow(table.symbols[si].norm, k) * fw, th));
      }
    }
  }
  finalize(res);
  return res;
}

ResolutionResult two_weight_check(const CheckSetup& setup, const YoungFunction& d,
                                  const FamilyInstance& fam, const Thresholds& th) {
  require_order(setup.order);
  const auto& kernel = setup.op.kernel;
  const Grid& grid = fam.grid;
  const double vol = grid.cell_volume();
  const double p = setup.p;
  const double alpha_p = kernel.alpha_total() * p;
  if (!(alpha_p < grid.dim())) throw DomainError("two-weight check needs alpha·p < n");
  const Targets t = make_targets(setup.op, grid);
  const auto table = commutators(setup.op, fam, t, setup.order, {setup.order});

  ResolutionResult res;
  res.n = grid.n();
  for (std::size_t wi = 0; wi < fam.weights.size(); ++wi) {
    const auto& u = fam.weights[wi].value.w;
    const auto mu = orlicz_maximal(u, alpha_p, d, fam.balls);
    const auto su = matrix_pullback_sum(mu, kernel.matrices(), false);
    for (std::size_t fi = 0; fi < fam.functions.size(); ++fi) {
      const auto& f = fam.functions[fi].value;
      double rhs = 0.0;
      for (std::size_t x = 0; x < grid.size(); ++x) rhs += std::pow(std::abs(f[x]), p) * su[x] * vol;
      for (std::size_t si = 0; si < table.symbols.size(); ++si) {
        const auto& v = table.at(fi, si, 0);
        double lhs = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) lhs += std::pow(std::abs(v[i]), p) * u[t.cells[i]] * vol;
        const double bk = std::pow(table.symbols[si].norm, setup.order * p);
        res.tests.push_back(make_test(
            join_id({fam.functions[fi].id, fam.weights[wi].id, table.symbols[si].id}), lhs,
            bk * rhs, th));
      }
    }
  }
  finalize(res);
  return res;
}

ResolutionResult endpoint_check(const CheckSetup& setup, const YoungFunction& s,
                                const std::vector<double>& lambdas, const FamilyInstance& fam,
                                const Thresholds& th) {
  require_order(setup.order);
  const auto& kernel = setup.op.kernel;
  if (kernel.alpha_total() != 0.0) throw DomainError("endpoint check needs alpha_total = 0");
  if (lambdas.empty()) throw DomainError("endpoint check needs a lambda grid");
  const Grid& grid = fam.grid;
  const double vol = grid.cell_volume();
  const int k = setup.order;
  const auto phik = YoungFunction::phi_k(k);
  const Targets t = make_targets(setup.op, grid);
  const auto table = commutators(setup.op, fam, t, k, {k});

  ResolutionResult res;
  res.n = grid.n();
  std::size_t degenerate = 0;
  for (std::size_t wi = 0; wi < fam.weights.size(); ++wi) {
    const auto& u = fam.weights[wi].value.w;
    const auto mu = orlicz_maximal(u, 0.0, s, fam.balls);
    const auto su = matrix_pullback_sum(mu, kernel.matrices(), false);
    for (std::size_t fi = 0; fi < fam.functions.size(); ++fi) {
      const auto& f = fam.functions[fi].value;
      const double finf = f.max_abs();
      for (std::size_t si = 0; si < table.symbols.size(); ++si) {
        const auto& v = table.at(fi, si, 0);
        const double bk = ipow(table.symbols[si].norm, k);
        bool any = false;
        for (double rel : lambdas) {
          const std::string id = join_id({fam.functions[fi].id, fam.weights[wi].id,
                                          table.symbols[si].id, "lambda=" + std::to_string(rel)});
          if (finf == 0.0) {
            res.tests.push_back(make_test(id, 0.0, 0.0, th));
            continue;
          }
          const double lambda = rel * finf;
          double lhs = 0.0;
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (std::abs(v[i]) > lambda) lhs += u[t.cells[i]] * vol;
          }
          double rhs = 0.0;
          for (std::size_t x = 0; x < grid.size(); ++x) {
            if (f[x] != 0.0) rhs += phik(bk * std::abs(f[x]) / lambda) * su[x] * vol;
          }
          any = any || lhs > 0.0;
          res.tests.push_back(make_test(id, lhs, rhs, th));
        }
        if (!any) ++degenerate;
      }
    }
  }
  res.diagnostics["degenerate_level_sets"] = degenerate;
  finalize(res);
  return res;
}

BumpTriple bump_triple(double p, int k, double eps) {
  if (!(p > 1.0)) throw DomainError("bump triple needs p > 1");
  if (!(eps > 0.0)) throw DomainError("bump triple needs eps > 0");
  const double delta = eps / (p - 1.0);
  const double beta = (k + 1) * p - 1.0 + eps;
  return {YoungFunction::power_log(conjugate(p), -1.0 - delta), YoungFunction::power_log(p, beta),
          YoungFunction::power_log(1.0, beta)};
}

namespace {

std::vector<Certificate> kernel_certificates(const Scenario& s, const FamilyInstance& fam) {
  std::vector<Certificate> out;
  const auto& kernel = s.setup.op.kernel;
  const auto& th = s.thresholds;
  const auto h = check_hypothesis_h(kernel.matrices());
  out.push_back({"hypothesis (H)", h.min_det, h.pass, h.message});

  std::vector<InverseSource> psis;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    const auto eff = effective_factor(kernel.factors()[i]);
    psis.emplace_back(factor_psi(kernel.factors()[i]));
    const auto size = size_constant(eff, {0.125, 0.5, 2.0});
    out.push_back(cap_certificate("size[" + std::to_string(i) + "]", size.constant, th,
                                  "psi=" + eff.psi().name()));
    const auto hor = hormander_constant(eff, s.setup.order, Point{1.0, 0.0}, 2.0, kHormanderTerms);
    Certificate c{"hormander[" + std::to_string(i) + "]", hor.tail_slope,
                  std::isfinite(hor.partial_sum) && hor.tail_slope < kHormanderSlope, ""};
    char buf[96];
    std::snprintf(buf, sizeof buf, "partial_sum=%.6g order=%d", hor.partial_sum, s.setup.order);
    c.detail = buf;
    out.push_back(c);
  }

  std::vector<InverseSource> extra;
  if (s.setup.order > 0) {
    extra.emplace_back(complementary(YoungFunction::phi_k(s.setup.order), kComplementaryRange));
  }
  const auto compat = compatibility_report(psis, extra, s.setup.phi);
  out.push_back({"compatibility", compat.constant, compat.certified,
                 "phi=" + s.setup.phi.name() + " tail_slope=" + std::to_string(compat.tail_slope)});

  if (kernel.alpha_total() == 0.0) {
    // Strong (2,2) probe of the base operator on the family.
    const Targets t = make_targets(s.setup.op, fam.grid);
    std::vector<CommutatorInput> inputs;
    for (const auto& f : fam.functions) inputs.push_back({&f.value, nullptr, 0});
    const auto vals = apply_batch(s.setup.op, fam.grid, t.points, inputs);
    double probe = 0.0;
    for (std::size_t fi = 0; fi < fam.functions.size(); ++fi) {
      double num = 0.0, den = 0.0;
      for (double v : vals[fi]) num += v * v;
      for (double v : fam.functions[fi].value.values()) den += v * v;
      if (den > 0.0) probe = std::max(probe, std::sqrt(num / den));
    }
    out.push_back(cap_certificate("strong (2,2) probe", probe, th, "sup ||Tf||_2/||f||_2"));
  }
  return out;
}

double compat_14(const Weight& w, const MatrixFamily& family) {
  double c = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    c = std::max(c, matrix_compat_constant(w, family.matrix(i)).constant);
  }
  return c;
}

std::vector<Certificate> bump_certificates(const BumpTriple& b, double p,
                                           const YoungFunction& phi) {
  std::vector<Certificate> out;
  const auto e = bp_integral(b.e, conjugate(p));
  out.push_back({"E in B_p'", e.value, e.certified,
                 "E=" + b.e.name() + " tail_slope=" + std::to_string(e.tail_slope)});
  // The log corrections cancel only asymptotically, so look past 1e6.
  const auto dom = inverse_domination_report({b.e, b.f}, phi, TRange{1.0, 1e12, 481});
  out.push_back({"E^-1 F^-1 <= c phi^-1", dom.constant, dom.certified,
                 "F=" + b.f.name() + " D=" + b.d.name()});
  return out;
}

}  // namespace

std::vector<Certificate> certify(const Scenario& s, const FamilyInstance& fam) {
  auto out = kernel_certificates(s, fam);
  const auto& th = s.thresholds;
  const auto& family = s.setup.op.kernel.matrices();
  switch (s.kind) {
    case ScenarioKind::Coifman:
      for (const auto& w : fam.weights) {
        out.push_back(cap_certificate("A_inf[" + w.id + "]",
                                      a_infinity_sweep(w.value, fam.balls).best, th));
      }
      break;
    case ScenarioKind::PointwiseSharp:
      break;
    case ScenarioKind::StrongType:
      for (const auto& w : fam.weights) {
        out.push_back(cap_certificate("A_pq[" + w.id + "]",
                                      apq_constant(w.value, s.setup.p, s.q, fam.balls), th));
        out.push_back(cap_certificate("w(Ax)<=cw(x)[" + w.id + "]", compat_14(w.value, family), th));
      }
      break;
    case ScenarioKind::WeightedBmo: {
      const double alpha = s.setup.op.kernel.alpha_total();
      const double p_class = fam.grid.dim() / (alpha * s.r);
      for (std::size_t wi = 0; wi < fam.weights.size(); ++wi) {
        const auto& w = fam.weights[wi];
        const Weight wr(w.value.w.pow(s.r), w.id + "^r");
        auto c = cap_certificate("A(n/(alpha r),inf)[" + w.id + "^r]",
                                 apq_constant(wr, p_class, kInfExponent, fam.balls), th);
        // The grid only sees midpoints, so a weight blowing up at 0 looks bounded.
        if (unbounded_at_origin(fam.weight_presets[wi])) {
          c.ok = false;
          c.detail = "ess sup of w^r is infinite near the origin";
        }
        out.push_back(std::move(c));
        out.push_back(cap_certificate("w(Ax)<=cw(x)[" + w.id + "]", compat_14(w.value, family), th));
      }
      double kappa = 0.0;
      for (const auto& f : fam.functions) {
        const auto a = orlicz_maximal(f.value, alpha, s.setup.phi, fam.balls);
        const auto b = orlicz_maximal(f.value, alpha, YoungFunction::power(s.r), fam.balls);
        for (std::size_t x = 0; x < a.size(); ++x) {
          if (b[x] > 0.0) kappa = std::max(kappa, a[x] / b[x]);
        }
      }
      out.push_back(cap_certificate("kappa_r", kappa, th, "sup M_{alpha,phi}f / M_{alpha,r}f"));
      break;
    }
    case ScenarioKind::TwoWeight: {
      const auto b = bump_triple(s.setup.p, s.setup.order, s.bump_eps);
      for (auto& c : bump_certificates(b, s.setup.p, s.setup.phi)) out.push_back(c);
      break;
    }
    case ScenarioKind::Endpoint:
      if (s.mode == EndpointMode::MaximalPhi) {
        double sup = 0.0;
        for (int i = 0; i <= 240; ++i) {
          const double t = std::pow(10.0, 6.0 * i / 240.0);
          sup = std::max(sup, std::exp(s.endpoint_r * std::log(t) - s.setup.phi.log_eval(t)));
        }
        out.push_back(cap_certificate("t^r <= c phi(t)", sup, th,
                                      "r=" + std::to_string(s.endpoint_r)));
        if (!(s.endpoint_r > 1.0)) out.back().ok = false;
      } else {
        const auto b = bump_triple(s.setup.p, s.setup.order, s.bump_eps);
        for (auto& c : bump_certificates(b, s.setup.p, s.setup.phi)) out.push_back(c);
      }
      break;
  }
  return out;
}

ResolutionResult run_resolution(const Scenario& s, const FamilyInstance& fam) {
  switch (s.kind) {
    case ScenarioKind::Coifman: return coifman_check(s.setup, fam, s.thresholds);
    case ScenarioKind::PointwiseSharp:
      return pointwise_sharp_check(s.setup, s.delta, s.epsilon, fam, s.thresholds);
    case ScenarioKind::StrongType: return strong_type_check(s.setup, s.q, fam, s.thresholds);
    case ScenarioKind::WeightedBmo: return weighted_bmo_check(s.setup, fam, s.thresholds);
    case ScenarioKind::TwoWeight: {
      const auto d = s.d_override ? *s.d_override : bump_triple(s.setup.p, s.setup.order, s.bump_eps).d;
      return two_weight_check(s.setup, d, fam, s.thresholds);
    }
    case ScenarioKind::Endpoint: {
      YoungFunction sf = s.setup.phi;
      if (s.mode == EndpointMode::DerivedD) {
        sf = s.d_override ? *s.d_override : bump_triple(s.setup.p, s.setup.order, s.bump_eps).d;
      }
      return endpoint_check(s.setup, sf, s.lambdas, fam, s.thresholds);
    }
  }
  throw DomainError("unknown scenario kind");
}

InequalityReport run_scenario(const Scenario& s) {
  InequalityReport rep;
  rep.scenario = s.name;
  rep.kind = s.kind;
  rep.config_echo = s.echo;
  if (s.kind == ScenarioKind::Coifman || s.kind == ScenarioKind::PointwiseSharp ||
      s.kind == ScenarioKind::StrongType || s.kind == ScenarioKind::WeightedBmo) {
    rep.notes.push_back("M_{alpha,phi} uses phi=" + s.setup.phi.name());
  }
  if (s.setup.op.kernel.alpha_total() == 0.0) {
    rep.notes.push_back("targets within 2h of the degenerate set are excluded (guard distance)");
  }
  const auto coarse_fam = instantiate(s.family, s.grid, s.balls);
  rep.certificates = certify(s, coarse_fam);
  const bool gated = std::any_of(rep.certificates.begin(), rep.certificates.end(),
                                 [](const Certificate& c) { return !c.ok; });
  if (gated) {
    rep.status = "hypotheses not met";
    return rep;
  }
  rep.coarse = run_resolution(s, coarse_fam);
  const Grid fine_grid(s.grid.dim(), s.grid.lo(), s.grid.hi(), 2 * s.grid.n());
  rep.fine = run_resolution(s, instantiate(s.family, fine_grid, s.balls));

  const double c = rep.coarse->sup_ratio;
  const double f = rep.fine->sup_ratio;
  rep.sup_ratio = f;
  bool ok = std::isfinite(c) && std::isfinite(f) && !rep.coarse->inconsistent &&
            !rep.fine->inconsistent;
  if (ok) {
    if (c == 0.0 && f == 0.0) {
      rep.refinement_ratio = 1.0;
    } else if (c == 0.0 || f == 0.0) {
      ok = false;
      rep.refinement_ratio = kInf;
    } else {
      rep.refinement_ratio = f / c;
      const double tau = s.thresholds.tau;
      ok = rep.refinement_ratio <= 1.0 + tau && rep.refinement_ratio >= 1.0 / (1.0 + tau);
    }
  }
  rep.pass = ok;
  rep.status = ok ? "pass" : "fail";
  return rep;
}

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json resolution_json(const ResolutionResult& r) {
  nlohmann::json j = {{"N", r.n},
                      {"sup_ratio", num(r.sup_ratio)},
                      {"inconsistent", r.inconsistent},
                      {"skipped", r.skipped},
                      {"diagnostics", r.diagnostics}};
  j["tests"] = nlohmann::json::array();
  for (const auto& t : r.tests) {
    nlohmann::json tj = {{"id", t.id}, {"lhs", num(t.lhs)}, {"rhs", num(t.rhs)},
                         {"ratio", num(t.ratio)}, {"skipped", t.skipped}};
    if (!t.note.empty()) tj["note"] = t.note;
    j["tests"].push_back(tj);
  }
  return j;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

nlohmann::json InequalityReport::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["kind"] = to_string(kind);
  j["status"] = status;
  j["pass"] = pass ? nlohmann::json(*pass) : nlohmann::json(nullptr);
  j["sup_ratio"] = num(sup_ratio);
  j["refinement"] = nlohmann::json::object();
  if (coarse && fine) {
    j["refinement"] = {{"coarse", num(coarse->sup_ratio)},
                       {"fine", num(fine->sup_ratio)},
                       {"fine_over_coarse", num(refinement_ratio)}};
  }
  j["certificates"] = nlohmann::json::array();
  for (const auto& c : certificates) {
    j["certificates"].push_back(
        {{"name", c.name}, {"value", num(c.value)}, {"ok", c.ok}, {"detail", c.detail}});
  }
  j["notes"] = notes;
  j["resolutions"] = nlohmann::json::array();
  if (coarse) j["resolutions"].push_back(resolution_json(*coarse));
  if (fine) j["resolutions"].push_back(resolution_json(*fine));
  j["scenario_config"] = config_echo;
  return j;
}

std::string reports_json(const std::vector<InequalityReport>& reports,
                         const std::string& config_text) {
  nlohmann::json j;
  j["config_echo"] = config_text;
  j["reports"] = nlohmann::json::array();
  for (const auto& r : reports) j["reports"].push_back(r.to_json());
  return j.dump(2) + "\n";
}

std::string reports_csv(const std::vector<InequalityReport>& reports) {
  std::ostringstream out;
  out << "scenario,kind,N,test_id,lhs,rhs,ratio,skipped,status,certificates\n";
  for (const auto& r : reports) {
    std::string certs;
    for (const auto& c : r.certificates) {
      if (!certs.empty()) certs += ';';
      certs += c.name + "=" + fmt(c.value) + (c.ok ? ":ok" : ":fail");
    }
    for (const auto* res : {r.coarse ? &*r.coarse : nullptr, r.fine ? &*r.fine : nullptr}) {
      if (!res) continue;
      for (const auto& t : res->tests) {
        out << csv_field(r.scenario) << ',' << to_string(r.kind) << ',' << res->n << ','
            << csv_field(t.id) << ',' << fmt(t.lhs) << ',' << fmt(t.rhs) << ',' << fmt(t.ratio)
            << ',' << (t.skipped ? 1 : 0) << ',' << csv_field(r.status) << ','
            << csv_field(certs) << '\n';
      }
    }
  }
  return out.str();
}

void emit_report(const std::vector<InequalityReport>& reports, const std::string& config_text,
                 const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& body) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    os << body;
    if (!os) throw IoError("write failed for '" + path.string() + "'");
  };
  write("report.json", reports_json(reports, config_text));
  write("ratios.csv", reports_csv(reports));
}

Scenario Scenario::from_json(const nlohmann::json& j, const Thresholds& defaults,
                             const std::vector<std::uint64_t>& seeds) {
  try {
    const auto kind = scenario_kind_from_string(j.at("scenario").get<std::string>());
    nlohmann::json kj;
    const auto& opj = j.at("operator");
    if (opj.is_string()) {
      kj = {{"preset", opj.get<std::string>()}};
      for (const char* key : {"alpha", "a", "n"}) {
        if (j.contains(key)) kj[key] = j.at(key);
      }
    } else {
      kj = opj;
    }
    OperatorSpec op{kernel_from_json(kj)};
    if (j.contains("quadrature")) op.quadrature = Quadrature::from_json(j.at("quadrature"));

    const int order = j.value("order", 1);
    if (order < 0) throw ConfigError("order must be >= 0");
    const double default_p = kind == ScenarioKind::StrongType ? 1.5 : 2.0;
    Scenario s(j.value("name", to_string(kind)), kind,
               CheckSetup{op, order, YoungFunction::phi_k(order), j.value("p", default_p)});
    s.echo = j;
    s.thresholds = defaults;
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      s.thresholds.tau = t.value("tau", s.thresholds.tau);
      s.thresholds.tol = t.value("tol", s.thresholds.tol);
      s.thresholds.lhs_guard = t.value("lhs_guard", s.thresholds.lhs_guard);
      s.thresholds.certificate_cap = t.value("certificate_cap", s.thresholds.certificate_cap);
    }
    if (!(s.thresholds.tau > 0.0)) throw ConfigError("thresholds.tau must be positive");

    s.grid = j.contains("grid") ? grid_from_json(j.at("grid")) : Grid::line(-4.0, 4.0, 256);
    if (s.grid.dim() != op.kernel.dim()) throw ConfigError("grid and operator dimensions differ");
    if (j.contains("balls")) {
      const auto mode = j.at("balls").value("mode", std::string("all-centered"));
      if (mode == "oracle") {
        s.balls = BallFamily::oracle();
      } else if (mode != "all-centered") {
        throw ConfigError("unknown ball family '" + mode + "'");
      }
    }

    const auto fj = j.value("family", nlohmann::json::object());
    s.family = TestFamily::from_json(fj);
    if (!fj.contains("seeds") && !seeds.empty()) s.family.seeds = seeds;
    if (!fj.contains("weights")) {
      switch (kind) {
        case ScenarioKind::StrongType:
        case ScenarioKind::WeightedBmo:
          s.family.weights = {{"constant", {1.0}}, {"power", {0.1}}, {"power", {0.2}}};
          break;
        case ScenarioKind::TwoWeight:
        case ScenarioKind::Endpoint:
          s.family.weights = {{"constant", {1.0}}, {"spiky", {}}, {"random", {1.0, 1.0}}};
          break;
        default: break;
      }
    }

    const double alpha = op.kernel.alpha_total();
    const int n = s.grid.dim();
    s.delta = j.value("delta", s.delta);
    s.epsilon = j.value("epsilon", s.epsilon);
    s.r = j.value("r", s.r);
    s.bump_eps = j.value("eps", s.bump_eps);
    s.endpoint_r = j.value("endpoint_r", s.endpoint_r);
    if (j.contains("lambdas")) s.lambdas = j.at("lambdas").get<std::vector<double>>();
    if (j.contains("mode")) {
      const auto m = j.at("mode").get<std::string>();
      if (m == "a" || m == "maximal-phi") {
        s.mode = EndpointMode::MaximalPhi;
      } else if (m == "b" || m == "derived-d") {
        s.mode = EndpointMode::DerivedD;
      } else {
        throw ConfigError("unknown endpoint mode '" + m + "'");
      }
    }
    if (kind == ScenarioKind::Endpoint && s.mode == EndpointMode::MaximalPhi) {
      s.setup.phi = YoungFunction::power(s.endpoint_r);
    }
    if (j.contains("phi")) s.setup.phi = YoungFunction::from_json(j.at("phi"));

    switch (kind) {
      case ScenarioKind::Coifman:
        if (!(s.setup.p > 0.0)) throw ConfigError("coifman: need p > 0");
        break;
      case ScenarioKind::PointwiseSharp:
        if (!(s.delta > 0.0 && s.delta < s.epsilon && s.epsilon <= 1.0)) {
          throw ConfigError("pointwise-sharp: need 0 < delta < epsilon <= 1");
        }
        break;
      case ScenarioKind::StrongType: {
        const double upper = alpha > 0.0 ? n / alpha : kInf;
        if (!(s.setup.p > 1.0 && s.setup.p < upper)) {
          throw ConfigError("strong-type: need 1 < p < n/alpha");
        }
        s.q = 1.0 / (1.0 / s.setup.p - alpha / n);
        break;
      }
      case ScenarioKind::WeightedBmo:
        if (!(alpha > 0.0)) throw ConfigError("weighted-bmo: needs alpha > 0 (n/alpha undefined)");
        if (!(s.r > 1.0)) throw ConfigError("weighted-bmo: need r > 1");
        break;
      case ScenarioKind::TwoWeight:
        if (!(s.setup.p > 1.0)) throw ConfigError("two-weight: need p > 1");
        if (!(alpha * s.setup.p < n)) throw ConfigError("two-weight: need alpha·p < n");
        break;
      case ScenarioKind::Endpoint:
        if (alpha != 0.0) throw ConfigError("endpoint: operator must have alpha_total = 0");
        if (s.lambdas.empty()) throw ConfigError("endpoint: empty lambda grid");
        for (double l : s.lambdas) {
          if (!(l > 0.0)) throw ConfigError("endpoint: lambdas must be positive");
        }
        if (s.mode == EndpointMode::DerivedD && !(s.setup.p > 1.0)) {
          throw ConfigError("endpoint: mode b needs p > 1");
        }
        break;
    }

    if (j.contains("D")) {
      const auto d = YoungFunction::from_json(j.at("D"));
      const auto b = bump_triple(s.setup.p, order, s.bump_eps);
      // D must agree with F(t^{1/p}) up to constants.
      for (int i = 0; i <= 60; ++i) {
        const double t = std::pow(10.0, 6.0 * i / 60.0);
        const double ratio = std::exp(d.log_eval(t) - b.f.log_eval(std::pow(t, 1.0 / s.setup.p)));
        if (!(ratio > 1e-3 && ratio < 1e3)) {
          throw ConfigError("D is inconsistent with F(t^{1/p})");
        }
      }
      s.d_override = d;
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

}  // namespace fracop
