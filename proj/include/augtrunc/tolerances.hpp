#pragma once

namespace augtrunc::tol {

// Row sums of stochastic matrices / generators.
inline constexpr double kRowSum = 1e-12;
// Deficits in [-kClip, 0) are treated as floating-point residue and zeroed.
inline constexpr double kClip = 1e-12;
// Poisson residual, relative to 1 + |g_bar|_inf.
inline constexpr double kResidual = 1e-9;
// Agreement between independent computational routes.
inline constexpr double kConsistency = 1e-10;
// Regenerative vs stationary variance routes.
inline constexpr double kRouteAgreement = 1e-9;
// Entrywise stability of approximate censoring between outer levels.
inline constexpr double kCensorStable = 1e-10;
// Default structured-solver tail tolerance.
inline constexpr double kTail = 1e-12;

}  // namespace augtrunc::tol
