#include "fracop/family.hpp"

#include "fracop/error.hpp"
#include "fracop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace fracop {

namespace {

double param(const std::vector<double>& p, std::size_t i, double fallback) {
  return i < p.size() ? p[i] : fallback;
}

std::string format_id(const std::string& tag, const std::vector<double>& params) {
  std::string out = tag;
  char buf[32];
  for (double v : params) {
    std::snprintf(buf, sizeof buf, ":%g", v);
    out += buf;
  }
  return out;
}

bool in_support(const Point& x, int dim) {
  if (std::abs(x[0]) > 1.0) return false;
  return dim == 1 || std::abs(x[1]) <= 1.0;
}

double block_sign(std::uint64_t seed, const Point& x, int dim) {
  const auto block = [](double t) { return static_cast<std::int64_t>(std::floor(t * 8.0)); };
  std::uint64_t key = (seed + 0x51ED27ULL) * 0x9E3779B97F4A7C15ULL;
  key ^= static_cast<std::uint64_t>(block(x[0]) + (1 << 20)) * 0xBF58476D1CE4E5B9ULL;
  if (dim == 2) key ^= static_cast<std::uint64_t>(block(x[1]) + (1 << 20)) * 0x94D049BB133111EBULL;
  Xorshift64 rng(key);
  return rng.sign();
}

}  // namespace

double FunctionPreset::operator()(const Point& x, int dim) const {
  if (tag == "zero") return 0.0;
  if (tag == "indicator") {
    const double a = param(params, 0, -1.0);
    const double b = param(params, 1, 1.0);
    auto inside = [&](double t) { return t >= a && t <= b; };
    return inside(x[0]) && (dim == 1 || inside(x[1])) ? 1.0 : 0.0;
  }
  if (tag == "bump") {
    const double c = param(params, 0, 0.0);
    const double r = param(params, 1, 1.0);
    const double d = distance(x, Point{c, dim == 1 ? 0.0 : c}, dim) / r;
    return d < 1.0 ? std::exp(-1.0 / (1.0 - d * d)) : 0.0;
  }
  if (tag == "random") return in_support(x, dim) ? block_sign(seed, x, dim) : 0.0;
  if (tag == "oscillatory") {
    const double k = param(params, 0, 1.0);
    return in_support(x, dim) ? std::cos(std::numbers::pi * k * x[0]) : 0.0;
  }
  throw ConfigError("unknown function preset '" + tag + "'");
}

GridFunction FunctionPreset::sample(const Grid& grid) const {
  return GridFunction::sample(grid, [&](const Point& x) { return (*this)(x, grid.dim()); });
}

std::string FunctionPreset::id() const {
  if (tag == "random") return "random:seed" + std::to_string(seed);
  return format_id(tag, params);
}

nlohmann::json FunctionPreset::to_json() const {
  nlohmann::json j = {{"preset", tag}, {"params", params}};
  if (tag == "random" && seed != 0) j["seed"] = seed;
  return j;
}

FunctionPreset FunctionPreset::from_json(const nlohmann::json& j) {
  try {
    FunctionPreset p;
    p.tag = j.at("preset").get<std::string>();
    p.params = j.value("params", std::vector<double>{});
    p.seed = j.value("seed", std::uint64_t{0});
    static const std::vector<std::string> known = {"zero", "indicator", "bump", "random",
                                                   "oscillatory"};
    if (std::find(known.begin(), known.end(), p.tag) == known.end()) {
      throw ConfigError("unknown function preset '" + p.tag + "'");
    }
    if (p.tag == "bump" && !(param(p.params, 1, 1.0) > 0.0)) {
      throw ConfigError("bump radius must be positive");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("function: ") + e.what());
  }
}

double SymbolPreset::operator()(const Point& x, int dim) const {
  if (tag == "log-abs") {
    const double r = norm(x, dim);
    if (r == 0.0) throw DomainError("log|x| evaluated at the origin");
    return std::log(r);
  }
  if (tag == "arctan") return std::atan(x[0]);
  if (tag == "constant") return param(params, 0, 1.0);
  throw ConfigError("unknown symbol preset '" + tag + "'");
}

GridFunction SymbolPreset::sample(const Grid& grid) const {
  return GridFunction::sample(grid, [&](const Point& x) { return (*this)(x, grid.dim()); });
}

std::string SymbolPreset::id() const { return format_id(tag, params); }

nlohmann::json SymbolPreset::to_json() const { return {{"preset", tag}, {"params", params}}; }

SymbolPreset SymbolPreset::from_json(const nlohmann::json& j) {
  try {
    SymbolPreset p;
    p.tag = j.at("preset").get<std::string>();
    p.params = j.value("params", std::vector<double>{});
    static const std::vector<std::string> known = {"log-abs", "arctan", "constant"};
    if (std::find(known.begin(), known.end(), p.tag) == known.end()) {
      throw ConfigError("unknown symbol preset '" + p.tag + "'");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("symbol: ") + e.what());
  }
}

std::string weight_id(const WeightPreset& w) { return format_id(w.tag, w.params); }

TestFamily TestFamily::defaults() {
  TestFamily f;
  f.functions = {
      {"indicator", {-1.0, 1.0}},    {"indicator", {-0.5, 0.25}}, {"indicator", {0.2, 0.9}},
      {"bump", {0.0, 1.0}},          {"bump", {-0.4, 0.5}},       {"bump", {0.5, 0.3}},
      {"random", {}},                {"oscillatory", {1.0}},      {"oscillatory", {3.0}},
      {"oscillatory", {6.0}},
  };
  f.weights = {{"constant", {1.0}}, {"power", {0.3}}, {"log-example", {}}};
  f.symbols = {{"log-abs", {}}, {"arctan", {}}};
  return f;
}

std::vector<FunctionPreset> TestFamily::expanded_functions() const {
  std::vector<FunctionPreset> out;
  for (const auto& f : functions) {
    if (f.tag == "random" && f.seed == 0) {
      for (auto s : seeds) {
        FunctionPreset g = f;
        g.seed = s;
        out.push_back(g);
      }
    } else {
      out.push_back(f);
    }
  }
  return out;
}

nlohmann::json TestFamily::to_json() const {
  nlohmann::json j;
  j["functions"] = nlohmann::json::array();
  for (const auto& f : functions) j["functions"].push_back(f.to_json());
  j["weights"] = nlohmann::json::array();
  for (const auto& w : weights) j["weights"].push_back(w.to_json());
  j["symbols"] = nlohmann::json::array();
  for (const auto& s : symbols) j["symbols"].push_back(s.to_json());
  j["seeds"] = seeds;
  return j;
}

TestFamily TestFamily::from_json(const nlohmann::json& j) {
  TestFamily f = defaults();
  try {
    if (j.contains("functions")) {
      f.functions.clear();
      for (const auto& x : j.at("functions")) f.functions.push_back(FunctionPreset::from_json(x));
    }
    if (j.contains("weights")) {
      f.weights.clear();
      for (const auto& x : j.at("weights")) f.weights.push_back(WeightPreset::from_json(x));
    }
    if (j.contains("symbols")) {
      f.symbols.clear();
      for (const auto& x : j.at("symbols")) f.symbols.push_back(SymbolPreset::from_json(x));
    }
    if (j.contains("seeds")) f.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("family: ") + e.what());
  }
  if (f.functions.empty()) throw ConfigError("family: no functions");
  if (f.weights.empty()) throw ConfigError("family: no weights");
  if (f.symbols.empty()) throw ConfigError("family: no symbols");
  return f;
}

FamilyInstance instantiate(const TestFamily& family, const Grid& grid, const BallFamily& balls) {
  FamilyInstance inst{grid, DiscreteBalls(grid, balls), {}, {}, {}, {}};
  for (const auto& f : family.expanded_functions()) {
    inst.functions.push_back({f.id(), f.sample(grid)});
  }
  for (const auto& w : family.weights) {
    inst.weights.push_back({weight_id(w), make_example_weight(w, grid)});
    inst.weight_presets.push_back(w);
  }
  for (const auto& s : family.symbols) {
    inst.symbols.push_back({s.id(), BmoFunction(s.sample(grid), inst.balls)});
  }
  return inst;
}

}  // namespace fracop
