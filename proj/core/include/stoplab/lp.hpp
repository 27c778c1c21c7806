#pragma once

#include <string>
#include <vector>

#include "stoplab/defs.hpp"
#include "stoplab/errors.hpp"

namespace stoplab {

enum class RowSense { less_eq, greater_eq, equal };
enum class LpDirection { maximize, minimize };

/// What an LP column stands for, so solutions can be mapped back to tree
/// objects. `optional_mass` / `predictable_mass` carry a node id.
enum class VarKind { optional_mass, predictable_mass, aux };

struct LpVariable {
  std::string name;
  VarKind kind = VarKind::aux;
  NodeId node = -1;
  bool nonneg = true;  // lower bound 0; false means free
};

/// Dense linear program. Rows are stored explicitly; senses per row.
struct LinearProgram {
  LpDirection direction = LpDirection::maximize;
  std::vector<LpVariable> vars;
  std::vector<double> objective;              // size = vars
  std::vector<std::vector<double>> rows;      // m x n
  std::vector<RowSense> senses;               // size m
  std::vector<double> rhs;                    // size m
  std::vector<std::string> row_names;         // size m

  std::size_t num_vars() const { return vars.size(); }
  std::size_t num_rows() const { return rows.size(); }
};

/// Basic optimal solution of a LinearProgram.
///
/// `duals[i]` is the shadow price dV/d(rhs_i): for maximization with <= rows
/// and for minimization with >= rows the multipliers are nonnegative;
/// equality rows are sign-free. The solver verifies primal feasibility, dual
/// feasibility and complementary slackness to 1e-9 scale before returning and
/// throws NumericalError with a condition report otherwise.
struct LpSolution {
  std::vector<double> primal;
  std::vector<double> duals;
  double objective = 0.0;
  std::vector<int> basis;  // standard-form basic column ids, the vertex identifier
  bool is_vertex = true;
};

/// Dense two-phase simplex with Bland's anti-cycling pivot rule (entering:
/// lowest eligible index; leaving: lowest basic index among ratio ties).
/// Deterministic; always returns a vertex of the feasible polytope.
LpSolution solve_lp(const LinearProgram& lp);

/// Plain-text export in the standard LP interchange format, one constraint
/// per line, for cross-checking against external solvers.
std::string write_lp_text(const LinearProgram& lp);

}  // namespace stoplab
