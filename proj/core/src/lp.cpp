#include "stoplab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace stoplab {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kRatioTieTol = 1e-12;
constexpr double kPhase1Tol = 1e-7;
constexpr double kCheckTol = 1e-9;

void check_shape(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  const std::size_t m = lp.num_rows();
  if (lp.objective.size() != n) throw ValidationError("objective size mismatch");
  if (lp.senses.size() != m || lp.rhs.size() != m)
    throw ValidationError("row metadata size mismatch");
  for (const auto& row : lp.rows)
    if (row.size() != n) throw ValidationError("row width mismatch");
}

// Standard-form column: structural (+/- part of an original variable),
// slack/surplus, or artificial.
struct Column {
  enum Kind { structural, slack, artificial } kind = structural;
  int orig = -1;   // variable index for structural, row index otherwise
  double sign = 1; // +1 for the positive part, -1 for the negative part
};

struct Tableau {
  std::size_t m = 0, n = 0;          // rows, standard-form columns
  std::vector<double> a;             // m x (n+1), last column = rhs
  std::vector<double> reduced;       // n
  double objective = 0.0;
  std::vector<int> basis;            // size m
  std::vector<Column> cols;
  std::vector<bool> barred;          // not eligible to enter

  double& at(std::size_t i, std::size_t j) { return a[i * (n + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * (n + 1) + j]; }
  double& rhs(std::size_t i) { return a[i * (n + 1) + n]; }
  double rhs(std::size_t i) const { return a[i * (n + 1) + n]; }
};

void price(Tableau& t, const std::vector<double>& cost) {
  // reduced = cost - cost_B * T (the tableau rows already express B^{-1}A).
  t.reduced = cost;
  t.objective = 0.0;
  for (std::size_t i = 0; i < t.m; ++i) {
    double cb = cost[static_cast<std::size_t>(t.basis[i])];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j < t.n; ++j) t.reduced[j] -= cb * t.at(i, j);
    t.objective += cb * t.rhs(i);
  }
}

void pivot(Tableau& t, std::size_t row, std::size_t col) {
  const double piv = t.at(row, col);
  const std::size_t width = t.n + 1;
  double* prow = &t.a[row * width];
  for (std::size_t j = 0; j < width; ++j) prow[j] /= piv;
  for (std::size_t i = 0; i < t.m; ++i) {
    if (i == row) continue;
    double factor = t.at(i, col);
    if (factor == 0.0) continue;
    double* irow = &t.a[i * width];
    for (std::size_t j = 0; j < width; ++j) irow[j] -= factor * prow[j];
  }
  double rfac = t.reduced[col];
  if (rfac != 0.0) {
    for (std::size_t j = 0; j < t.n; ++j) t.reduced[j] -= rfac * prow[j];
    t.objective += rfac * prow[t.n];
  }
  t.basis[row] = static_cast<int>(col);
}

// Bland's rule: entering column is the lowest eligible index with a
// negative reduced cost; the leaving row is the minimum-ratio row, ties
// broken toward the lowest basic column index.
void run_simplex(Tableau& t, std::uint64_t max_iters) {
  for (std::uint64_t iter = 0;; ++iter) {
    if (iter > max_iters)
      throw NumericalError("simplex iteration cap " + std::to_string(max_iters) +
                           " exceeded; possible numerical cycling");
    std::size_t enter = t.n;
    for (std::size_t j = 0; j < t.n; ++j) {
      if (t.barred[j]) continue;
      if (t.reduced[j] < -kPivotTol) { enter = j; break; }
    }
    if (enter == t.n) return;  // optimal

    std::size_t leave = t.m;
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < t.m; ++i) {
      double aij = t.at(i, enter);
      if (aij <= kPivotTol) continue;
      double ratio = t.rhs(i) / aij;
      if (leave == t.m) {
        leave = i;
        best_ratio = ratio;
        continue;
      }
      double window = kRatioTieTol * (1.0 + std::abs(best_ratio));
      if (ratio < best_ratio - window) {
        best_ratio = ratio;
        leave = i;
      } else if (ratio <= best_ratio + window && t.basis[i] < t.basis[leave]) {
        leave = i;
      }
    }
    if (leave == t.m)
      throw NumericalError("linear program is unbounded along column " +
                           std::to_string(enter));
    pivot(t, leave, enter);
  }
}

struct StandardForm {
  Tableau t;
  std::vector<double> phase2_cost;
  std::vector<bool> row_flipped;
  std::vector<int> slack_col;  // slack/surplus column per row, -1 if none
  std::vector<int> art_col;    // artificial column per row, -1 if none
};

StandardForm build_standard_form(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  const std::size_t m = lp.num_rows();

  StandardForm sf;
  sf.row_flipped.assign(m, false);
  sf.slack_col.assign(m, -1);
  sf.art_col.assign(m, -1);

  std::vector<double> rhs = lp.rhs;
  std::vector<RowSense> senses = lp.senses;
  for (std::size_t i = 0; i < m; ++i) {
    if (rhs[i] < 0) {
      sf.row_flipped[i] = true;
      rhs[i] = -rhs[i];
      if (senses[i] == RowSense::less_eq) senses[i] = RowSense::greater_eq;
      else if (senses[i] == RowSense::greater_eq) senses[i] = RowSense::less_eq;
    }
  }

  // Column layout: structural A columns first (free vars split), then one
  // slack/surplus per inequality row, then artificials.
  std::vector<Column>& cols = sf.t.cols;
  std::vector<std::vector<double>> colmap(n);  // structural columns per var
  for (std::size_t j = 0; j < n; ++j) {
    Column c;
    c.kind = Column::structural;
    c.orig = static_cast<int>(j);
    c.sign = 1;
    cols.push_back(c);
    if (!lp.vars[j].nonneg) {
      c.sign = -1;
      cols.push_back(c);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (senses[i] == RowSense::equal) continue;
    Column c;
    c.kind = Column::slack;
    c.orig = static_cast<int>(i);
    c.sign = senses[i] == RowSense::less_eq ? 1 : -1;
    sf.slack_col[i] = static_cast<int>(cols.size());
    cols.push_back(c);
  }
  for (std::size_t i = 0; i < m; ++i) {
    bool needs_artificial = senses[i] != RowSense::less_eq;
    if (!needs_artificial) continue;
    Column c;
    c.kind = Column::artificial;
    c.orig = static_cast<int>(i);
    c.sign = 1;
    sf.art_col[i] = static_cast<int>(cols.size());
    cols.push_back(c);
  }

  Tableau& t = sf.t;
  t.m = m;
  t.n = cols.size();
  t.a.assign(m * (t.n + 1), 0.0);
  t.barred.assign(t.n, false);
  t.basis.assign(m, -1);

  for (std::size_t i = 0; i < m; ++i) {
    double sgn = sf.row_flipped[i] ? -1.0 : 1.0;
    for (std::size_t j = 0, sj = 0; j < n; ++j) {
      double v = sgn * lp.rows[i][j];
      t.at(i, sj) = v;
      ++sj;
      if (!lp.vars[j].nonneg) {
        t.at(i, sj) = -v;
        ++sj;
      }
    }
    if (sf.slack_col[i] >= 0)
      t.at(i, static_cast<std::size_t>(sf.slack_col[i])) = cols[sf.slack_col[i]].sign;
    if (sf.art_col[i] >= 0) t.at(i, static_cast<std::size_t>(sf.art_col[i])) = 1.0;
    t.rhs(i) = rhs[i];
    t.basis[i] = sf.art_col[i] >= 0 ? sf.art_col[i] : sf.slack_col[i];
  }
  (void)colmap;

  // Internally always minimize.
  const double obj_sign = lp.direction == LpDirection::maximize ? -1.0 : 1.0;
  sf.phase2_cost.assign(t.n, 0.0);
  for (std::size_t j = 0; j < t.n; ++j) {
    const Column& c = cols[j];
    if (c.kind == Column::structural)
      sf.phase2_cost[j] = obj_sign * c.sign * lp.objective[static_cast<std::size_t>(c.orig)];
  }
  return sf;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  check_shape(lp);
  const std::size_t n = lp.num_vars();
  const std::size_t m = lp.num_rows();

  StandardForm sf = build_standard_form(lp);
  Tableau& t = sf.t;
  const std::uint64_t max_iters =
      50000 + 200ull * static_cast<std::uint64_t>(t.m + t.n) * 10ull;

  // Phase 1: minimize artificial mass.
  bool any_artificial = false;
  std::vector<double> phase1_cost(t.n, 0.0);
  for (std::size_t j = 0; j < t.n; ++j)
    if (t.cols[j].kind == Column::artificial) {
      phase1_cost[j] = 1.0;
      any_artificial = true;
    }
  if (any_artificial) {
    price(t, phase1_cost);
    run_simplex(t, max_iters);
    if (t.objective > kPhase1Tol)
      throw NumericalError("linear program infeasible: phase-1 residual " +
                           fmt(t.objective));
    // Pivot artificials out of the basis where a non-artificial column is
    // available; rows that admit none are redundant and keep a zero-valued
    // artificial that is barred from re-entering.
    for (std::size_t i = 0; i < t.m; ++i) {
      std::size_t b = static_cast<std::size_t>(t.basis[i]);
      if (t.cols[b].kind != Column::artificial) continue;
      for (std::size_t j = 0; j < t.n; ++j) {
        if (t.cols[j].kind == Column::artificial) continue;
        if (std::abs(t.at(i, j)) > kPivotTol) {
          pivot(t, i, j);
          break;
        }
      }
    }
    for (std::size_t j = 0; j < t.n; ++j)
      if (t.cols[j].kind == Column::artificial) t.barred[j] = true;
  }

  // Phase 2.
  price(t, sf.phase2_cost);
  run_simplex(t, max_iters);

  LpSolution sol;
  sol.primal.assign(n, 0.0);
  for (std::size_t i = 0; i < t.m; ++i) {
    const Column& c = t.cols[static_cast<std::size_t>(t.basis[i])];
    if (c.kind == Column::structural)
      sol.primal[static_cast<std::size_t>(c.orig)] += c.sign * t.rhs(i);
  }
  sol.basis.assign(t.basis.begin(), t.basis.end());
  std::sort(sol.basis.begin(), sol.basis.end());
  sol.is_vertex = true;

  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.primal[j];

  // Simplex multipliers, read off the reduced costs of the slack and
  // artificial columns, then mapped back through row flips and the
  // internal minimize convention.
  const double dir_sign = lp.direction == LpDirection::maximize ? -1.0 : 1.0;
  sol.duals.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double y;
    if (sf.slack_col[i] >= 0) {
      double r = t.reduced[static_cast<std::size_t>(sf.slack_col[i])];
      y = t.cols[static_cast<std::size_t>(sf.slack_col[i])].sign > 0 ? -r : r;
    } else {
      y = -t.reduced[static_cast<std::size_t>(sf.art_col[i])];
    }
    if (sf.row_flipped[i]) y = -y;
    sol.duals[i] = dir_sign * y;
  }

  // Certify the answer: primal and dual feasibility plus complementary
  // slackness, in the caller's original formulation.
  std::ostringstream report;
  bool ok = true;
  auto fail = [&](const std::string& what) {
    ok = false;
    report << what << "; ";
  };
  for (std::size_t j = 0; j < n; ++j)
    if (lp.vars[j].nonneg && sol.primal[j] < -kCheckTol)
      fail("negative variable " + lp.vars[j].name + " = " + fmt(sol.primal[j]));
  for (std::size_t i = 0; i < m; ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) ax += lp.rows[i][j] * sol.primal[j];
    double slack = lp.rhs[i] - ax;
    double scale = kCheckTol * (1.0 + std::abs(lp.rhs[i]));
    switch (lp.senses[i]) {
      case RowSense::less_eq:
        if (slack < -scale) fail("row " + lp.row_names[i] + " violated by " + fmt(-slack));
        break;
      case RowSense::greater_eq:
        if (slack > scale) fail("row " + lp.row_names[i] + " violated by " + fmt(slack));
        break;
      case RowSense::equal:
        if (std::abs(slack) > scale)
          fail("row " + lp.row_names[i] + " violated by " + fmt(slack));
        break;
    }
    // Multiplier sign: shadow prices of <= rows are >= 0 when maximizing,
    // <= 0 when minimizing; the reverse for >= rows.
    double y = sol.duals[i];
    bool max = lp.direction == LpDirection::maximize;
    if (lp.senses[i] == RowSense::less_eq && (max ? y < -kCheckTol : y > kCheckTol))
      fail("dual sign on row " + lp.row_names[i] + " = " + fmt(y));
    if (lp.senses[i] == RowSense::greater_eq && (max ? y > kCheckTol : y < -kCheckTol))
      fail("dual sign on row " + lp.row_names[i] + " = " + fmt(y));
    if (lp.senses[i] != RowSense::equal &&
        std::abs(y * slack) > kCheckTol * (1.0 + std::abs(sol.objective)))
      fail("complementary slackness on row " + lp.row_names[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    double aty = 0.0;
    for (std::size_t i = 0; i < m; ++i) aty += lp.rows[i][j] * sol.duals[i];
    // Stationarity: reduced cost of x_j, with the sign arranged so that it
    // must be >= 0 for nonnegative variables and == 0 for free ones.
    double rc = lp.direction == LpDirection::maximize ? aty - lp.objective[j]
                                                      : lp.objective[j] - aty;
    double scale = kCheckTol * (1.0 + std::abs(lp.objective[j]) + std::abs(aty));
    if (lp.vars[j].nonneg) {
      if (rc < -scale) fail("dual infeasibility at variable " + lp.vars[j].name);
      if (std::abs(rc * sol.primal[j]) > 1e2 * scale * (1.0 + std::abs(sol.primal[j])))
        fail("complementary slackness at variable " + lp.vars[j].name);
    } else if (std::abs(rc) > scale) {
      fail("stationarity at free variable " + lp.vars[j].name);
    }
  }
  double by = 0.0;
  for (std::size_t i = 0; i < m; ++i) by += lp.rhs[i] * sol.duals[i];
  if (std::abs(by - sol.objective) > 1e-7 * (1.0 + std::abs(sol.objective)))
    fail("duality gap " + fmt(by - sol.objective));

  if (!ok)
    throw NumericalError("simplex self-check failed: " + report.str());
  return sol;
}

std::string write_lp_text(const LinearProgram& lp) {
  check_shape(lp);
  std::ostringstream out;
  out << "\\ exported linear program\n";
  out << (lp.direction == LpDirection::maximize ? "Maximize\n" : "Minimize\n");
  out << " obj:";
  bool first = true;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    double c = lp.objective[j];
    if (c == 0.0) continue;
    out << (first ? " " : (c >= 0 ? " + " : " ")) << fmt(c) << " " << lp.vars[j].name;
    first = false;
  }
  if (first) out << " 0 " << (lp.num_vars() ? lp.vars[0].name : "x");
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    out << " " << (lp.row_names[i].empty() ? "r" + std::to_string(i) : lp.row_names[i])
        << ":";
    bool f = true;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
      double a = lp.rows[i][j];
      if (a == 0.0) continue;
      out << (f ? " " : (a >= 0 ? " + " : " ")) << fmt(a) << " " << lp.vars[j].name;
      f = false;
    }
    if (f) out << " 0 " << lp.vars[0].name;
    switch (lp.senses[i]) {
      case RowSense::less_eq: out << " <= "; break;
      case RowSense::greater_eq: out << " >= "; break;
      case RowSense::equal: out << " = "; break;
    }
    out << fmt(lp.rhs[i]) << "\n";
  }
  out << "Bounds\n";
  for (const auto& v : lp.vars)
    if (!v.nonneg) out << " " << v.name << " free\n";
  out << "End\n";
  return out.str();
}

}  // namespace stoplab
