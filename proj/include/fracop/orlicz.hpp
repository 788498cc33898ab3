#pragma once

// Luxemburg norms over balls, annuli and raw cell sets, and the generalized
// Hölder ratio.

#include "fracop/grid.hpp"
#include "fracop/young.hpp"

#include <span>
#include <vector>

namespace fracop {

/// inf{λ > 0 : (1/K) Σ Ψ(|v_i|/λ) <= 1} for K = values.size(). Zeros count in K.
/// LinfMarker gives max |v_i|.
double luxemburg_norm(std::span<const double> values, const YoungFunction& psi);

/// (1/K) Σ Ψ(|v_i|/λ): the quantity pinned to 1 at the norm.
double luxemburg_functional(std::span<const double> values, const YoungFunction& psi,
                            double lambda);

double luxemburg_norm(const GridFunction& f, const CellSet& cells, const YoungFunction& psi);
double luxemburg_norm(const GridFunction& f, const Ball& ball, const YoungFunction& psi);

/// ‖f χ_{s<|x−c|<=2s}‖_{Ψ, B(c, 2s)}.
double annulus_norm(const GridFunction& f, const Annulus& annulus, const YoungFunction& psi);

/// ‖f_1⋯f_m g‖_{L^1,B} / (∏‖f_i‖_{Ψ_i,B} · ‖g‖_{φ,B}); both sides are ball averages.
double generalized_holder_check(const std::vector<GridFunction>& fs, const GridFunction& g,
                                const std::vector<YoungFunction>& psis, const YoungFunction& phi,
                                const Ball& ball);

}  // namespace fracop
