#include "fracop/maximal.hpp"

#include "fracop/error.hpp"
#include "fracop/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracop {

namespace {

double ball_measure(double radius, int dim) { return Ball{{0, 0}, radius}.measure(dim); }

}  // namespace

std::vector<double> default_radii(const Grid& grid) {
  std::vector<double> r;
  const double diam = grid.diameter();
  for (double x = grid.h(); x < diam * (1 - 1e-12); x *= 2.0) r.push_back(x);
  r.push_back(diam);
  return r;
}

void DiscreteBalls::add(std::vector<CellSpan> spans, const Ball& ball, double measure) {
  std::size_t count = 0;
  for (const auto& s : spans) count += static_cast<std::size_t>(s.last - s.first + 1);
  if (count == 0) return;
  spans_.insert(spans_.end(), spans.begin(), spans.end());
  offset_.push_back(spans_.size());
  measure_.push_back(measure);
  count_.push_back(count);
  balls_.push_back(ball);
}

DiscreteBalls::DiscreteBalls(const Grid& grid, const BallFamily& family) : grid_(grid) {
  const int n = grid.n();
  const double h = grid.h();
  if (family.mode == FamilyMode::Oracle) {
    if (grid.dim() != 1) throw DomainError("oracle ball family is 1D only");
    // Center c2 and radius rho in half-cell units; cell i has midpoint 2i+1.
    // Keep, per cell interval, the largest radius that produces it.
    std::vector<int> best(static_cast<std::size_t>(n) * n, 0);
    std::vector<int> best_c(static_cast<std::size_t>(n) * n, 0);
    for (int c2 = 0; c2 <= 2 * n; ++c2) {
      for (int rho = 1; rho <= 4 * n; ++rho) {
        const int lo = c2 - rho - 1;  // 2i+1 >= c2 - rho
        const int f = lo <= 0 ? 0 : (lo + 1) / 2;
        const int l = std::min(n - 1, (c2 + rho - 1) / 2);  // 2i+1 <= c2 + rho
        if (l < f) continue;
        const std::size_t key = static_cast<std::size_t>(f) * n + l;
        if (rho > best[key]) {
          best[key] = rho;
          best_c[key] = c2;
        }
      }
    }
    for (int f = 0; f < n; ++f) {
      for (int l = f; l < n; ++l) {
        const std::size_t key = static_cast<std::size_t>(f) * n + l;
        if (best[key] == 0) continue;
        const double radius = 0.5 * h * best[key];
        const Ball ball{{grid.lo() + 0.5 * h * best_c[key], 0.0}, radius};
        add({{0, f, l}}, ball, ball_measure(radius, 1));
      }
    }
    return;
  }

  const std::vector<double> radii = family.custom_radii ? family.radii : default_radii(grid);
  if (radii.empty()) throw DomainError("empty ball family");
  for (double r : radii) {
    if (!(r > 0.0)) throw DomainError("ball family radii must be positive");
  }
  const double slack = 1.0 + 1e-12;
  if (grid.dim() == 1) {
    for (int c = 0; c < n; ++c) {
      for (double r : radii) {
        // |(i - c) h| <= r
        const int w = static_cast<int>(std::floor(r * slack / h));
        add({{0, std::max(0, c - w), std::min(n - 1, c + w)}}, Ball{{grid.axis_mid(c), 0.0}, r},
            ball_measure(r, 1));
      }
    }
    return;
  }
  for (int cj = 0; cj < n; ++cj) {
    for (int ci = 0; ci < n; ++ci) {
      for (double r : radii) {
        const double rr = r * slack / h;
        const int wy = static_cast<int>(std::floor(rr));
        std::vector<CellSpan> spans;
        for (int dj = -wy; dj <= wy; ++dj) {
          const int j = cj + dj;
          if (j < 0 || j >= n) continue;
          const double rem = rr * rr - static_cast<double>(dj) * dj;
          if (rem < 0) continue;
          const int wx = static_cast<int>(std::floor(std::sqrt(rem)));
          const int a = std::max(0, ci - wx);
          const int b = std::min(n - 1, ci + wx);
          if (a <= b) spans.push_back({j, a, b});
        }
        add(std::move(spans), Ball{{grid.axis_mid(ci), grid.axis_mid(cj)}, r},
            ball_measure(r, 2));
      }
    }
  }
}

CellSet DiscreteBalls::cells(std::size_t b) const {
  CellSet out;
  out.reserve(count_[b]);
  for (const auto& s : spans(b)) {
    for (int i = s.first; i <= s.last; ++i) out.push_back(grid_.index(i, s.row));
  }
  return out;
}

void DiscreteBalls::gather(std::size_t b, std::span<const double> f,
                           std::vector<double>& out) const {
  out.clear();
  for (const auto& s : spans(b)) {
    const std::size_t base = grid_.index(0, s.row);
    out.insert(out.end(), f.begin() + base + s.first, f.begin() + base + s.last + 1);
  }
}

std::vector<double> DiscreteBalls::averages(std::span<const double> f) const {
  const int n = grid_.n();
  const int rows = grid_.dim() == 1 ? 1 : n;
  std::vector<double> prefix(static_cast<std::size_t>(rows) * (n + 1), 0.0);
  for (int j = 0; j < rows; ++j) {
    double* p = prefix.data() + static_cast<std::size_t>(j) * (n + 1);
    for (int i = 0; i < n; ++i) p[i + 1] = p[i] + f[grid_.index(i, j)];
  }
  std::vector<double> out(size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(size()); ++b) {
    double s = 0.0;
    for (const auto& sp : spans(b)) {
      const double* p = prefix.data() + static_cast<std::size_t>(sp.row) * (n + 1);
      s += p[sp.last + 1] - p[sp.first];
    }
    out[b] = s / static_cast<double>(count_[b]);
  }
  return out;
}

std::vector<double> DiscreteBalls::evaluate(
    const std::function<double(std::span<const double>, std::size_t)>& fn,
    std::span<const double> f) const {
  std::vector<double> out(size());
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(size()); ++b) {
      gather(b, f, buf);
      out[b] = fn(buf, b);
    }
  }
  return out;
}

std::vector<double> DiscreteBalls::sup_containing(std::span<const double> value) const {
  if (value.size() != size()) throw DomainError("sup_containing: one value per ball");
  std::vector<double> out(grid_.size(), 0.0);
  if (grid_.dim() == 1 && size() > 16 * grid_.size()) {
    // Dense 1D families: best[first][last], then sweep by left endpoint.
    const int n = grid_.n();
    std::vector<double> best(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t b = 0; b < size(); ++b) {
      const auto& s = spans(b)[0];
      double& slot = best[static_cast<std::size_t>(s.first) * n + s.last];
      slot = std::max(slot, value[b]);
    }
    for (int f = 0; f < n; ++f) {
      double run = 0.0;  // max over last >= x of best[f][last]
      for (int x = n - 1; x >= f; --x) {
        run = std::max(run, best[static_cast<std::size_t>(f) * n + x]);
        out[x] = std::max(out[x], run);
      }
    }
    return out;
  }
  for (std::size_t b = 0; b < size(); ++b) {
    const double v = value[b];
    for (const auto& s : spans(b)) {
      double* row = out.data() + grid_.index(0, s.row);
      for (int i = s.first; i <= s.last; ++i) row[i] = std::max(row[i], v);
    }
  }
  return out;
}

GridFunction orlicz_maximal(const GridFunction& f, double alpha, const YoungFunction& psi,
                            const DiscreteBalls& balls) {
  const int n = f.grid().dim();
  if (!(alpha >= 0.0) || !(alpha < n)) throw DomainError("maximal: need 0 <= alpha < n");
  if (!(balls.grid() == f.grid())) throw DomainError("maximal: family built on another grid");
  if (balls.size() == 0) throw DomainError("maximal: empty ball family");
  std::vector<double> value;
  if (psi.kind() == YoungKind::Linear) {
    const auto a = f.abs();
    value = balls.averages(a.values());
  } else {
    value = balls.evaluate([&](std::span<const double> v, std::size_t) {
      return luxemburg_norm(v, psi);
    }, f.values());
  }
  if (alpha > 0.0) {
    for (std::size_t b = 0; b < value.size(); ++b) {
      value[b] *= std::pow(balls.measure(b), alpha / n);
    }
  }
  return {f.grid(), balls.sup_containing(value)};
}

GridFunction orlicz_maximal(const GridFunction& f, double alpha, const YoungFunction& psi,
                            const BallFamily& family) {
  return orlicz_maximal(f, alpha, psi, DiscreteBalls(f.grid(), family));
}

GridFunction hardy_littlewood(const GridFunction& f, const DiscreteBalls& balls) {
  return orlicz_maximal(f, 0.0, YoungFunction::linear(), balls);
}

std::vector<double> ball_oscillations(const GridFunction& f, const DiscreteBalls& balls) {
  const auto mean = balls.averages(f.values());
  return balls.evaluate(
      [&](std::span<const double> v, std::size_t b) {
        double s = 0.0;
        for (double x : v) s += std::abs(x - mean[b]);
        return s / static_cast<double>(v.size());
      },
      f.values());
}

GridFunction sharp_maximal(const GridFunction& f, const DiscreteBalls& balls) {
  if (!(balls.grid() == f.grid())) throw DomainError("sharp maximal: family on another grid");
  return {f.grid(), balls.sup_containing(ball_oscillations(f, balls))};
}

GridFunction sharp_maximal(const GridFunction& f, const BallFamily& family) {
  return sharp_maximal(f, DiscreteBalls(f.grid(), family));
}

GridFunction delta_sharp(const GridFunction& f, double delta, const DiscreteBalls& balls) {
  if (!(delta > 0.0) || delta > 1.0) throw DomainError("delta sharp: need 0 < delta <= 1");
  const auto m = sharp_maximal(f.pow(delta), balls);
  return m.map([delta](double v) { return std::pow(v, 1.0 / delta); });
}

GridFunction delta_sharp(const GridFunction& f, double delta, const BallFamily& family) {
  return delta_sharp(f, delta, DiscreteBalls(f.grid(), family));
}

GridFunction iterated_maximal(const GridFunction& f, int k, const BallFamily& family) {
  if (k < 1) throw DomainError("iterated maximal: need k >= 1");
  const DiscreteBalls balls(f.grid(), family);
  GridFunction g = f;
  for (int i = 0; i < k; ++i) g = hardy_littlewood(g, balls);
  return g;
}

}  // namespace fracop
