#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace retro {

/// Binary ILP in the shape vertex cover compiles to: minimize c.x subject to
/// a_i.x >= b_i, x in [0,1]^n, all variables integral. The LP relaxation
/// drops integrality only.
struct IlpRow {
  std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient), ascending by variable
  double rhs = 0.0;                            // row sense is always >=
};

struct IlpInstance {
  int num_vars = 0;
  std::vector<double> objective;  // minimized
  std::vector<IlpRow> rows;
};

enum class LpStatus { optimal, infeasible };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  std::vector<double> x;  // full-length; fixed variables at their pinned values
};

/// Feasibility / integrality comparison tolerance used across the solver and
/// branch-and-bound.
inline constexpr double kLpTol = 1e-7;

/// Exact LP-relaxation optimum with variables pinned by `fixed` (-1 free,
/// otherwise 0 or 1). Two-phase dense primal simplex with Bland's rule, so
/// cycling is impossible; a generous pivot guard of 10*(rows+cols) throws
/// SimplexStalled if it ever trips (treat as a bug, not an input property).
/// Pinned variables are substituted out before the tableau is built, and
/// their objective contribution is included in the returned value.
LpSolution simplex_solve(const IlpInstance& ilp, const std::vector<std::int8_t>& fixed);

/// All variables free.
LpSolution simplex_solve(const IlpInstance& ilp);

/// Human-readable dump of the instance (debugging aid, not a pinned format).
std::string describe_ilp(const IlpInstance& ilp);

}  // namespace retro
