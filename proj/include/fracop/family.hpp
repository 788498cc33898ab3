#pragma once

// Test families for the inequality harness: function, weight and symbol presets
// that are defined in physical coordinates, so the same family can be sampled
// at several resolutions.

#include "fracop/grid.hpp"
#include "fracop/maximal.hpp"
#include "fracop/weights.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace fracop {

/// Function presets, all supported in [−1, 1]^n:
///   indicator(a, b)        χ_{[a,b]^n}
///   bump(c, r)             exp(−1/(1 − |x − c|²/r²)) on |x − c| < r (c on the diagonal in 2D)
///   random(seed)           ±1 on blocks of side 1/8 inside [−1, 1]^n
///   oscillatory(k)         cos(πk x_1) χ_{[−1,1]^n}
///   zero                   f ≡ 0
struct FunctionPreset {
  std::string tag = "zero";
  std::vector<double> params;
  std::uint64_t seed = 0;

  double operator()(const Point& x, int dim) const;
  GridFunction sample(const Grid& grid) const;
  std::string id() const;
  nlohmann::json to_json() const;
  static FunctionPreset from_json(const nlohmann::json& j);
};

/// Symbol presets: log-abs (log|x|), arctan (arctan x_1), constant(c).
struct SymbolPreset {
  std::string tag = "log-abs";
  std::vector<double> params;

  double operator()(const Point& x, int dim) const;
  GridFunction sample(const Grid& grid) const;
  std::string id() const;
  nlohmann::json to_json() const;
  static SymbolPreset from_json(const nlohmann::json& j);
};

std::string weight_id(const WeightPreset& w);

struct TestFamily {
  std::vector<FunctionPreset> functions;
  std::vector<WeightPreset> weights;
  std::vector<SymbolPreset> symbols;
  std::vector<std::uint64_t> seeds{1, 2, 3};

  /// 3 indicators, 3 bumps, one random pattern per seed, 3 oscillatory; weights
  /// 1, |x|^{0.3}, log-example; symbols log|x| and arctan x.
  static TestFamily defaults();

  /// Functions with every seedless random entry expanded once per seed.
  std::vector<FunctionPreset> expanded_functions() const;

  nlohmann::json to_json() const;
  /// Missing keys fall back to the defaults.
  static TestFamily from_json(const nlohmann::json& j);
};

template <class T>
struct Named {
  std::string id;
  T value;
};

/// A family sampled on one grid, with the ball family used by every maximal
/// operator and BMO norm at that resolution.
struct FamilyInstance {
  Grid grid;
  DiscreteBalls balls;
  std::vector<Named<GridFunction>> functions;
  std::vector<Named<Weight>> weights;
  std::vector<WeightPreset> weight_presets;  // parallel to weights, for exact w(A x)
  std::vector<Named<BmoFunction>> symbols;
};

FamilyInstance instantiate(const TestFamily& family, const Grid& grid,
                           const BallFamily& balls = {});

}  // namespace fracop
