#include "fracop/operators.hpp"

#include "fracop/error.hpp"

#include <algorithm>
#include <cmath>

namespace fracop {

namespace {

struct Box {
  double lo[2];
  double size;
};

bool touches(const Box& c, const Point& p, int n) {
  const double slack = 1e-12 * c.size;
  for (int d = 0; d < n; ++d) {
    if (p[d] < c.lo[d] - slack || p[d] > c.lo[d] + c.size + slack) return false;
  }
  return true;
}

bool touches_any(const Box& c, const std::vector<Point>& sing, int n) {
  return std::any_of(sing.begin(), sing.end(), [&](const Point& p) { return touches(c, p, n); });
}

double subdivided(const CompositeKernel& k, const Point& x, const Box& c,
                  const std::vector<Point>& sing, int n, int s, int depth) {
  const double sub = c.size / s;
  const double vol = n == 1 ? sub : sub * sub;
  double total = 0.0;
  const int cols = n == 1 ? 1 : s;
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < s; ++i) {
      const Box b{{c.lo[0] + i * sub, n == 1 ? 0.0 : c.lo[1] + j * sub}, sub};
      if (touches_any(b, sing, n)) {
        if (depth > 1) total += subdivided(k, x, b, sing, n, s, depth - 1);
        continue;
      }
      const Point mid{b.lo[0] + 0.5 * sub, n == 1 ? 0.0 : b.lo[1] + 0.5 * sub};
      total += k(x, mid) * vol;
    }
  }
  return total;
}

}  // namespace

nlohmann::json Quadrature::to_json() const {
  return {{"singular_cell_policy", policy == SingularPolicy::Exclude ? "exclude" : "cell_average"},
          {"subdivision", subdivision},
          {"depth", depth}};
}

Quadrature Quadrature::from_json(const nlohmann::json& j) {
  Quadrature q;
  const auto policy = j.value("singular_cell_policy", std::string("cell_average"));
  if (policy == "exclude") {
    q.policy = SingularPolicy::Exclude;
  } else if (policy != "cell_average") {
    throw ConfigError("quadrature: unknown singular_cell_policy '" + policy + "'");
  }
  q.subdivision = j.value("subdivision", 8);
  q.depth = j.value("depth", 6);
  if (q.policy == SingularPolicy::CellAverage && q.subdivision < 4) {
    throw ConfigError("quadrature: subdivision must be >= 4 for cell_average");
  }
  if (q.depth < 1) throw ConfigError("quadrature: depth must be >= 1");
  return q;
}

bool target_admissible(const OperatorSpec& spec, const Grid& grid, const Point& x) {
  if (!grid.locate(x)) return false;
  const auto& k = spec.kernel;
  if (k.alpha_total() > 0.0) return true;
  const int n = grid.dim();
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = i + 1; j < k.size(); ++j) {
      if (distance(k.singular_point(i, x), k.singular_point(j, x), n) < 2.0 * grid.h()) {
        return false;
      }
    }
  }
  return true;
}

void check_target(const OperatorSpec& spec, const Grid& grid, const Point& x) {
  if (!grid.locate(x)) throw DomainError("operator target outside the box");
  if (!target_admissible(spec, grid, x)) {
    throw DomainError("operator target within the guard distance of the degenerate set");
  }
}

std::vector<Point> guarded_targets(const OperatorSpec& spec, const Grid& grid) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.midpoint(i);
    if (target_admissible(spec, grid, x)) out.push_back(x);
  }
  return out;
}

std::vector<double> quadrature_row(const OperatorSpec& spec, const Grid& grid, const Point& x) {
  check_target(spec, grid, x);
  const auto& k = spec.kernel;
  const int n = grid.dim();
  if (k.dim() != n) throw DomainError("operator: kernel and grid dimensions differ");
  const auto& q = spec.quadrature;
  if (q.policy == SingularPolicy::CellAverage && q.subdivision < 4) {
    throw DomainError("operator: subdivision must be >= 4");
  }
  std::vector<Point> sing;
  for (std::size_t i = 0; i < k.size(); ++i) sing.push_back(k.singular_point(i, x));

  const double h = grid.h();
  const double vol = grid.cell_volume();
  std::vector<double> row(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto ij = grid.coords(c);
    const Box cell{{grid.lo() + ij[0] * h, n == 1 ? 0.0 : grid.lo() + ij[1] * h}, h};
    if (!touches_any(cell, sing, n)) {
      row[c] = k(x, grid.midpoint(c)) * vol;
    } else if (q.policy == SingularPolicy::Exclude) {
      row[c] = 0.0;
    } else {
      row[c] = subdivided(k, x, cell, sing, n, q.subdivision, q.depth);
    }
  }
  return row;
}

OperatorMatrix::OperatorMatrix(const OperatorSpec& spec, const Grid& grid,
                               std::vector<Point> targets)
    : grid_(grid), targets_(std::move(targets)), weights_(targets_.size() * grid.size()) {
  for (const auto& x : targets_) check_target(spec, grid_, x);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(targets_.size()); ++t) {
    const auto r = quadrature_row(spec, grid_, targets_[t]);
    std::copy(r.begin(), r.end(), weights_.begin() + t * grid_.size());
  }
}

std::vector<double> OperatorMatrix::symbol_at_targets(const GridFunction& b) const {
  if (!(b.grid() == grid_)) throw DomainError("symbol lives on another grid");
  std::vector<double> out;
  out.reserve(targets_.size());
  for (const auto& x : targets_) out.push_back(*b.at(x));
  return out;
}

std::vector<double> OperatorMatrix::apply(const GridFunction& f) const {
  if (!(f.grid() == grid_)) throw DomainError("operator: function lives on another grid");
  std::vector<double> out(targets_.size());
  const auto v = f.values();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(targets_.size()); ++t) {
    const auto w = row(t);
    double s = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) s += w[c] * v[c];
    out[t] = s;
  }
  return out;
}

std::vector<double> OperatorMatrix::commutator(const GridFunction& b, int k,
                                               const GridFunction& f) const {
  if (k < 0) throw DomainError("commutator order must be >= 0");
  if (k == 0) return apply(f);
  if (!(f.grid() == grid_)) throw DomainError("operator: function lives on another grid");
  const auto bx = symbol_at_targets(b);
  std::vector<double> out(targets_.size());
  const auto v = f.values();
  const auto bv = b.values();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(targets_.size()); ++t) {
    const auto w = row(t);
    double s = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) {
      if (v[c] == 0.0) continue;
      double d = 1.0;
      const double diff = bx[t] - bv[c];
      for (int i = 0; i < k; ++i) d *= diff;
      s += d * w[c] * v[c];
    }
    out[t] = s;
  }
  return out;
}

std::vector<double> OperatorMatrix::conjugated(const GridFunction& b, double z,
                                               const GridFunction& f) const {
  if (std::abs(z) * b.max_abs() > kConjugationGuard) {
    throw DomainError("conjugation overflow guard: |z|·max|b| exceeds 20");
  }
  const auto g = f.times(b.map([z](double v) { return std::exp(-z * v); }));
  auto out = apply(g);
  const auto bx = symbol_at_targets(b);
  for (std::size_t t = 0; t < out.size(); ++t) out[t] *= std::exp(z * bx[t]);
  return out;
}

std::vector<double> apply(const OperatorSpec& spec, const GridFunction& f,
                          const std::vector<Point>& targets) {
  return OperatorMatrix(spec, f.grid(), targets).apply(f);
}

std::vector<double> apply_commutator(const CommutatorSpec& spec, const GridFunction& f,
                                     const std::vector<Point>& targets) {
  return OperatorMatrix(spec.base, f.grid(), targets).commutator(spec.b, spec.order, f);
}

std::vector<std::vector<double>> apply_batch(const OperatorSpec& spec, const Grid& grid,
                                             const std::vector<Point>& targets,
                                             const std::vector<CommutatorInput>& inputs) {
  for (const auto& in : inputs) {
    if (!in.f || !(in.f->grid() == grid)) throw DomainError("batch: function lives on another grid");
    if (in.order < 0) throw DomainError("commutator order must be >= 0");
    if (in.order > 0 && (!in.b || !(in.b->grid() == grid))) {
      throw DomainError("batch: commutator needs a symbol on the same grid");
    }
  }
  for (const auto& x : targets) check_target(spec, grid, x);
  std::vector<std::vector<double>> out(inputs.size(), std::vector<double>(targets.size()));
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(targets.size()); ++t) {
    const auto w = quadrature_row(spec, grid, targets[t]);
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      const auto& in = inputs[j];
      const auto v = in.f->values();
      double s = 0.0;
      if (in.order == 0) {
        for (std::size_t c = 0; c < w.size(); ++c) s += w[c] * v[c];
      } else {
        const auto bv = in.b->values();
        const double bx = *in.b->at(targets[t]);
        for (std::size_t c = 0; c < w.size(); ++c) {
          if (v[c] == 0.0) continue;
          double d = 1.0;
          for (int i = 0; i < in.order; ++i) d *= bx - bv[c];
          s += d * w[c] * v[c];
        }
      }
      out[j][t] = s;
    }
  }
  return out;
}

OperatorSpec adjoint(const OperatorSpec& spec) { return {spec.kernel.adjoint(), spec.quadrature}; }

std::vector<double> apply_adjoint(const OperatorSpec& spec, const GridFunction& g,
                                  const std::vector<Point>& targets) {
  return apply(adjoint(spec), g, targets);
}

std::vector<double> conjugated_apply(const OperatorSpec& spec, const GridFunction& b, double z,
                                     const GridFunction& f, const std::vector<Point>& targets) {
  return OperatorMatrix(spec, f.grid(), targets).conjugated(b, z, f);
}

}  // namespace fracop
