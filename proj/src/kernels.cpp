#include "fracop/kernels.hpp"

#include "fracop/error.hpp"
#include "fracop/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracop {

namespace {

// Local sampling resolution for annulus norms of analytic kernels.
constexpr int kLocalCells1D = 4096;
constexpr int kLocalCells2D = 256;

Point mat_apply(const Eigen::MatrixXd& a, const Point& x, int n) {
  Point out{0.0, 0.0};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out[r] += a(r, c) * x[c];
  }
  return out;
}

Grid local_grid(int n, double half_width) {
  return n == 1 ? Grid::line(-half_width, half_width, kLocalCells1D)
                : Grid::square(-half_width, half_width, kLocalCells2D);
}

}  // namespace

// ---------------------------------------------------------------------------
// MatrixFamily

MatrixFamily::MatrixFamily(int n, std::vector<Eigen::MatrixXd> matrices)
    : n_(n), mats_(std::move(matrices)) {
  if (n != 1 && n != 2) throw DomainError("matrix family: dimension must be 1 or 2");
  if (mats_.empty()) throw DomainError("matrix family: needs at least one matrix");
  for (const auto& a : mats_) {
    if (a.rows() != n || a.cols() != n) throw DomainError("matrix family: dimension mismatch");
    const double d = a.determinant();
    dets_.push_back(d);
    if (std::abs(d) > kSeparationEps) {
      Eigen::MatrixXd inv = a.inverse();
      if ((a * inv - Eigen::MatrixXd::Identity(n, n)).norm() > 1e-10) {
        throw NumericalError("matrix family: inverse failed verification");
      }
      invs_.push_back(std::move(inv));
    } else {
      invs_.emplace_back();
    }
  }
}

MatrixFamily MatrixFamily::scalars(const std::vector<double>& a) {
  std::vector<Eigen::MatrixXd> m;
  for (double v : a) m.push_back(Eigen::MatrixXd::Constant(1, 1, v));
  return {1, std::move(m)};
}

const Eigen::MatrixXd& MatrixFamily::inverse(std::size_t i) const {
  if (invs_[i].size() == 0) throw DomainError("matrix family: member is not invertible");
  return invs_[i];
}

double MatrixFamily::difference_det(std::size_t i, std::size_t j) const {
  return std::abs((mats_[i] - mats_[j]).determinant());
}

double MatrixFamily::norm(std::size_t i) const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mats_[i]);
  return svd.singularValues()(0);
}

double MatrixFamily::inverse_norm(std::size_t i) const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(inverse(i));
  return svd.singularValues()(0);
}

Point MatrixFamily::apply(std::size_t i, const Point& x) const { return mat_apply(mats_[i], x, n_); }

Point MatrixFamily::apply_inverse(std::size_t i, const Point& x) const {
  return mat_apply(inverse(i), x, n_);
}

MatrixFamily MatrixFamily::inverted() const {
  std::vector<Eigen::MatrixXd> inv;
  for (std::size_t i = 0; i < size(); ++i) inv.push_back(inverse(i));
  return {n_, std::move(inv)};
}

nlohmann::json MatrixFamily::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& a : mats_) {
    if (n_ == 1) {
      out.push_back(a(0, 0));
    } else {
      out.push_back({{a(0, 0), a(0, 1)}, {a(1, 0), a(1, 1)}});
    }
  }
  return out;
}

MatrixFamily MatrixFamily::from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrices: expected a non-empty array");
  try {
    if (j.front().is_number()) return scalars(j.get<std::vector<double>>());
    std::vector<Eigen::MatrixXd> m;
    for (const auto& a : j) {
      const auto rows = a.get<std::vector<std::vector<double>>>();
      if (rows.size() != 2 || rows[0].size() != 2 || rows[1].size() != 2) {
        throw ConfigError("matrices: 2D entries must be 2x2");
      }
      Eigen::MatrixXd e(2, 2);
      e << rows[0][0], rows[0][1], rows[1][0], rows[1][1];
      m.push_back(e);
    }
    return {2, std::move(m)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("matrices: ") + e.what());
  }
}

HypothesisReport check_hypothesis_h(const MatrixFamily& family) {
  HypothesisReport rep;
  rep.min_member_det = std::numeric_limits<double>::infinity();
  rep.min_det = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < family.size(); ++i) {
    rep.min_member_det = std::min(rep.min_member_det, std::abs(family.det(i)));
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      rep.min_det = std::min(rep.min_det, family.difference_det(i, j));
    }
  }
  if (family.size() == 1) rep.min_det = rep.min_member_det;
  rep.pass = rep.min_det > kSeparationEps && rep.min_member_det > kSeparationEps;
  rep.message = rep.pass ? "hypothesis (H) holds" : "hypothesis (H) violated";
  return rep;
}

double separation_constant(const MatrixFamily& family) {
  double c = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    c = std::max(c, family.norm(i) * family.inverse_norm(i));
  }
  return 2.0 * c;
}

// ---------------------------------------------------------------------------
// Factors

double Omega::operator()(const Point& u, int dim) const {
  if (dim == 1) return u[0] > 0 ? plus : minus;
  const double theta = std::atan2(u[1], u[0]);
  double v = 0.0;
  for (std::size_t j = 0; j < cos_coef.size(); ++j) v += cos_coef[j] * std::cos(j * theta);
  for (std::size_t j = 0; j < sin_coef.size(); ++j) v += sin_coef[j] * std::sin((j + 1) * theta);
  return v;
}

double Omega::sup_bound() const {
  double s = std::max(std::abs(plus), std::abs(minus));
  double t = 0.0;
  for (double c : cos_coef) t += std::abs(c);
  for (double c : sin_coef) t += std::abs(c);
  return cos_coef.empty() && sin_coef.empty() ? s : t;
}

KernelFactor::KernelFactor(Evaluator f, double order, int n, YoungFunction psi,
                           FactorPreset preset)
    : eval_(std::move(f)), order_(order), n_(n), psi_(std::move(psi)), preset_(preset) {
  if (n != 1 && n != 2) throw DomainError("kernel factor: dimension must be 1 or 2");
  if (!(order > 0.0) || order > n) throw DomainError("kernel factor: order must lie in (0, n]");
}

KernelFactor KernelFactor::power(double order, int n, YoungFunction psi) {
  const double e = order - n;
  return {[e, n](const Point& t) { return std::pow(fracop::norm(t, n), e); }, order, n,
          std::move(psi), FactorPreset::Power};
}

KernelFactor KernelFactor::rough(double order, int n, Omega omega, YoungFunction psi) {
  const double e = order - n;
  KernelFactor k(
      [e, n, omega](const Point& t) {
        const double r = fracop::norm(t, n);
        const Point u{t[0] / r, t[1] / r};
        return omega(u, n) * std::pow(r, e);
      },
      order, n, std::move(psi), FactorPreset::Rough);
  k.omega_ = omega;
  return k;
}

KernelFactor KernelFactor::custom(Evaluator f, double order, int n, YoungFunction psi) {
  return {std::move(f), order, n, std::move(psi), FactorPreset::Custom};
}

double KernelFactor::operator()(const Point& t) const {
  if (fracop::norm(t, n_) == 0.0) throw DomainError("kernel factor evaluated on-diagonal");
  return eval_(t);
}

KernelFactor KernelFactor::reflected(const Eigen::MatrixXd& a) const {
  const int n = n_;
  auto base = eval_;
  KernelFactor k(
      [base, a, n](const Point& t) {
        const Point at = mat_apply(a, t, n);
        return base(Point{-at[0], -at[1]});
      },
      order_, n_, psi_, FactorPreset::Custom);
  return k;
}

nlohmann::json KernelFactor::to_json() const {
  nlohmann::json j = {{"alpha_i", order_}, {"psi", psi_.to_json()}};
  switch (preset_) {
    case FactorPreset::Power:
      j["preset"] = "power";
      break;
    case FactorPreset::Rough:
      j["preset"] = "rough";
      j["omega"] = {{"plus", omega_->plus},
                    {"minus", omega_->minus},
                    {"cos", omega_->cos_coef},
                    {"sin", omega_->sin_coef}};
      break;
    case FactorPreset::Custom:
      j["preset"] = "custom";
      break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Composite kernels

CompositeKernel::CompositeKernel(std::vector<KernelFactor> factors, MatrixFamily matrices)
    : factors_(std::move(factors)), matrices_(std::move(matrices)) {
  if (factors_.size() != matrices_.size()) {
    throw DomainError("composite kernel: one matrix per factor");
  }
  const int n = matrices_.dim();
  double sum = 0.0;
  for (const auto& k : factors_) {
    if (k.dim() != n) throw DomainError("composite kernel: factor dimension mismatch");
    sum += k.order();
  }
  alpha_total_ = sum - static_cast<double>(factors_.size() - 1) * n;
  if (alpha_total_ < -1e-12 || alpha_total_ >= n) {
    throw DomainError("composite kernel: total order must lie in [0, n)");
  }
  alpha_total_ = std::max(alpha_total_, 0.0);
  const auto h = check_hypothesis_h(matrices_);
  if (!h.pass) throw DomainError("composite kernel: " + h.message);
}

double CompositeKernel::operator()(const Point& x, const Point& y) const {
  double v = 1.0;
  const int n = dim();
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Point ay = matrices_.apply(i, y);
    v *= factors_[i](Point{x[0] - ay[0], n == 1 ? 0.0 : x[1] - ay[1]});
    if (v == 0.0) return 0.0;
  }
  return v;
}

Point CompositeKernel::singular_point(std::size_t i, const Point& x) const {
  return matrices_.apply_inverse(i, x);
}

CompositeKernel CompositeKernel::adjoint() const {
  std::vector<KernelFactor> f;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    f.push_back(factors_[i].reflected(matrices_.matrix(i)));
  }
  CompositeKernel k(std::move(f), matrices_.inverted());
  k.name = name.empty() ? "adjoint" : name + "*";
  return k;
}

CompositeKernel riesz_kernel(double alpha, int n) {
  std::vector<Eigen::MatrixXd> id{Eigen::MatrixXd::Identity(n, n)};
  CompositeKernel k({KernelFactor::power(alpha, n)}, MatrixFamily(n, id));
  k.name = "riesz";
  return k;
}

CompositeKernel ricci_sjogren_kernel(double a) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("ricci-sjogren: need 0 < alpha < 1");
  CompositeKernel k({KernelFactor::power(1.0 - a, 1), KernelFactor::power(a, 1)},
                    MatrixFamily::scalars({1.0, -1.0}));
  k.name = "ricci-sjogren";
  return k;
}

CompositeKernel fractional_ricci_sjogren_kernel(double a, double alpha) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("fractional ricci-sjogren: need 0 < a < 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("fractional ricci-sjogren: need 0 < alpha < 1");
  }
  const double e1 = a * (1.0 - alpha);
  const double e2 = (1.0 - a) * (1.0 - alpha);
  CompositeKernel k({KernelFactor::power(1.0 - e1, 1), KernelFactor::power(1.0 - e2, 1)},
                    MatrixFamily::scalars({1.0, -1.0}));
  k.name = "fractional-ricci-sjogren";
  return k;
}

namespace {

KernelFactor factor_from_json(const nlohmann::json& j, int n) {
  const auto preset = j.value("preset", std::string("power"));
  const double order = j.at("alpha_i").get<double>();
  const auto psi = j.contains("psi") ? YoungFunction::from_json(j.at("psi")) : YoungFunction::linear();
  if (preset == "power") return KernelFactor::power(order, n, psi);
  if (preset == "rough") {
    Omega om;
    const auto& o = j.at("omega");
    om.plus = o.value("plus", 1.0);
    om.minus = o.value("minus", 1.0);
    om.cos_coef = o.value("cos", std::vector<double>{});
    om.sin_coef = o.value("sin", std::vector<double>{});
    return KernelFactor::rough(order, n, om, psi);
  }
  throw ConfigError("unknown kernel factor preset '" + preset + "'");
}

}  // namespace

CompositeKernel kernel_from_json(const nlohmann::json& j) {
  try {
    const auto preset = j.value("preset", std::string("composite"));
    if (preset == "riesz") return riesz_kernel(j.at("alpha").get<double>(), j.value("n", 1));
    if (preset == "ricci-sjogren") return ricci_sjogren_kernel(j.at("alpha").get<double>());
    if (preset == "fractional-ricci-sjogren") {
      return fractional_ricci_sjogren_kernel(j.at("a").get<double>(), j.at("alpha").get<double>());
    }
    if (preset != "composite") throw ConfigError("unknown kernel preset '" + preset + "'");
    const auto matrices = MatrixFamily::from_json(j.at("matrices"));
    std::vector<KernelFactor> factors;
    for (const auto& f : j.at("factors")) factors.push_back(factor_from_json(f, matrices.dim()));
    CompositeKernel k(std::move(factors), matrices);
    k.name = j.value("name", std::string("composite"));
    return k;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Certificates

SizeReport size_constant(const KernelFactor& k, const std::vector<double>& s_grid) {
  if (s_grid.empty()) throw DomainError("size constant: empty scale grid");
  const int n = k.dim();
  SizeReport rep;
  for (double s : s_grid) {
    if (!(s > 0.0)) throw DomainError("size constant: scales must be positive");
    const Grid g = local_grid(n, 2.0 * s);
    const auto f = GridFunction::sample(g, [&](const Point& y) {
      return norm(y, n) > s * (1.0 + 1e-12) ? k(y) : 0.0;
    });
    const double v = std::pow(s, n - k.order()) * annulus_norm(f, Annulus{{0, 0}, s}, k.psi());
    rep.per_scale.push_back(v);
    rep.constant = std::max(rep.constant, v);
  }
  return rep;
}

HormanderReport hormander_constant(const KernelFactor& k, int order, const Point& x,
                                   double r_factor, int m_terms, double max_radius) {
  const int n = k.dim();
  if (order < 0) throw DomainError("hormander: order must be >= 0");
  if (m_terms < 8) throw DomainError("hormander: need at least 8 terms");
  if (!(r_factor > 1.0)) throw DomainError("hormander: R_factor must exceed 1");
  HormanderReport rep;
  const double xn = norm(x, n);
  if (xn == 0.0) {
    rep.terms.assign(m_terms, 0.0);
    return rep;
  }
  const double r = r_factor * xn;
  int used = 0;
  for (int j = 1; j <= m_terms; ++j) {
    const double rho = std::ldexp(r, j);
    if (max_radius > 0.0 && 2.0 * rho > max_radius) {
      rep.terms.push_back(0.0);
      continue;
    }
    ++used;
    const Grid g = local_grid(n, 2.0 * rho);
    const auto diff = GridFunction::sample(g, [&](const Point& y) {
      if (norm(y, n) <= rho * (1.0 + 1e-12)) return 0.0;
      return k(Point{y[0] - x[0], y[1] - x[1]}) - k(y);
    });
    const double term = std::pow(rho, n - k.order()) * std::pow(static_cast<double>(j), order) *
                        annulus_norm(diff, Annulus{{0, 0}, rho}, k.psi());
    rep.terms.push_back(term);
    rep.partial_sum += term;
  }
  rep.coverage = static_cast<double>(used) / m_terms;
  const double a = rep.terms[m_terms - 2];
  const double b = rep.terms[m_terms - 1];
  rep.tail_slope = (a > 0.0 && b > 0.0) ? std::log2(b / a) : 0.0;
  return rep;
}

}  // namespace fracop
