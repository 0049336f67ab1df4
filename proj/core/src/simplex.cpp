#include "retrosearch/simplex.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "retrosearch/errors.hpp"

namespace retro {

namespace {

constexpr double kPivotEps = 1e-9;

/// Dense tableau in equality form. Column layout: structural variables for
/// the free subset, one slack/surplus per row, artificials last; the
/// objective row is maintained by the same pivots as the body.
struct Tableau {
  std::vector<std::vector<double>> rows;  // each: ncols coefficients + rhs
  std::vector<double> obj;                // reduced costs + (-objective) in the rhs slot
  std::vector<int> basis;                 // basic column per row
  int ncols = 0;
  int art_start = 0;  // first artificial column; columns >= art_start never re-enter
  std::uint64_t pivots = 0;
  std::uint64_t pivot_limit = 0;

  void pivot(std::size_t r, int j) {
    if (++pivots > pivot_limit) {
      throw SimplexStalled("simplex: pivot guard exceeded (10*(rows+cols)); this is a bug");
    }
    auto& prow = rows[r];
    const double p = prow[static_cast<std::size_t>(j)];
    for (double& v : prow) v /= p;
    prow[static_cast<std::size_t>(j)] = 1.0;  // cancel divide round-off on the pivot itself
    auto eliminate = [&](std::vector<double>& row) {
      const double f = row[static_cast<std::size_t>(j)];
      if (f == 0.0) return;
      for (std::size_t k = 0; k < row.size(); ++k) row[k] -= f * prow[k];
      row[static_cast<std::size_t>(j)] = 0.0;
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != r) eliminate(rows[i]);
    }
    eliminate(obj);
    basis[r] = j;
  }

  /// Bland's rule: smallest negative-reduced-cost column enters, ratio ties
  /// leave with the smallest basic variable. Returns false at optimality.
  bool bland_step() {
    int enter = -1;
    for (int j = 0; j < art_start; ++j) {
      if (obj[static_cast<std::size_t>(j)] < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return false;

    std::size_t leave = rows.size();
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double a = rows[i][static_cast<std::size_t>(enter)];
      if (a <= kPivotEps) continue;
      const double ratio = rows[i].back() / a;
      if (leave == rows.size() || ratio < best_ratio - kPivotEps ||
          (ratio < best_ratio + kPivotEps && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave == rows.size()) {
      // Cannot happen for an LP whose feasible region sits inside [0,1]^n.
      throw std::logic_error("simplex: unbounded direction in a box-bounded LP");
    }
    pivot(leave, enter);
    return true;
  }

  double objective_value() const { return -obj.back(); }
};

struct ReducedRow {
  std::vector<std::pair<int, double>> terms;  // over free-variable indices
  double rhs = 0.0;
};

}  // namespace

LpSolution simplex_solve(const IlpInstance& ilp, const std::vector<std::int8_t>& fixed) {
  if (static_cast<int>(fixed.size()) != ilp.num_vars) {
    throw std::invalid_argument("simplex_solve: fixed-assignment length mismatch");
  }

  // Substitute pinned variables out.
  std::vector<int> free_index(static_cast<std::size_t>(ilp.num_vars), -1);
  std::vector<int> free_vars;
  double base_value = 0.0;
  for (int v = 0; v < ilp.num_vars; ++v) {
    if (fixed[static_cast<std::size_t>(v)] < 0) {
      free_index[static_cast<std::size_t>(v)] = static_cast<int>(free_vars.size());
      free_vars.push_back(v);
    } else {
      base_value += ilp.objective[static_cast<std::size_t>(v)] *
                    static_cast<double>(fixed[static_cast<std::size_t>(v)]);
    }
  }

  LpSolution out;
  out.x.assign(static_cast<std::size_t>(ilp.num_vars), 0.0);
  for (int v = 0; v < ilp.num_vars; ++v) {
    if (fixed[static_cast<std::size_t>(v)] >= 0) {
      out.x[static_cast<std::size_t>(v)] = static_cast<double>(fixed[static_cast<std::size_t>(v)]);
    }
  }

  std::vector<ReducedRow> reduced;
  reduced.reserve(ilp.rows.size());
  for (const IlpRow& row : ilp.rows) {
    ReducedRow rr;
    rr.rhs = row.rhs;
    for (const auto& [v, a] : row.coeffs) {
      if (fixed[static_cast<std::size_t>(v)] >= 0) {
        rr.rhs -= a * static_cast<double>(fixed[static_cast<std::size_t>(v)]);
      } else {
        rr.terms.emplace_back(free_index[static_cast<std::size_t>(v)], a);
      }
    }
    if (rr.terms.empty()) {
      if (rr.rhs > kLpTol) return out;  // pinned values alone violate the row
      continue;
    }
    reduced.push_back(std::move(rr));
  }

  const int nf = static_cast<int>(free_vars.size());
  if (nf == 0) {
    out.status = LpStatus::optimal;
    out.value = base_value;
    return out;
  }

  // Equality form: every reduced >= row gets a surplus, every free variable
  // an upper-bound slack row x_f + s = 1. Rows are oriented so the rhs is
  // non-negative; >= rows with positive rhs take an artificial.
  const int m = static_cast<int>(reduced.size()) + nf;
  Tableau t;
  std::vector<int> art_rows;
  t.art_start = nf + m;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    if (reduced[i].rhs > 0.0) art_rows.push_back(static_cast<int>(i));
  }
  t.ncols = t.art_start + static_cast<int>(art_rows.size());
  t.pivot_limit = 10ULL * static_cast<std::uint64_t>(m + t.ncols);
  t.rows.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(t.ncols) + 1, 0.0));
  t.basis.assign(static_cast<std::size_t>(m), -1);

  int next_art = t.art_start;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    auto& row = t.rows[i];
    const double sign = reduced[i].rhs > 0.0 ? 1.0 : -1.0;  // negate rows with rhs <= 0
    for (const auto& [f, a] : reduced[i].terms) row[static_cast<std::size_t>(f)] = sign * a;
    row[static_cast<std::size_t>(nf + static_cast<int>(i))] = -sign;  // surplus
    row.back() = sign * reduced[i].rhs;
    if (reduced[i].rhs > 0.0) {
      row[static_cast<std::size_t>(next_art)] = 1.0;
      t.basis[i] = next_art++;
    } else {
      t.basis[i] = nf + static_cast<int>(i);
    }
  }
  for (int f = 0; f < nf; ++f) {
    auto& row = t.rows[static_cast<std::size_t>(static_cast<int>(reduced.size()) + f)];
    row[static_cast<std::size_t>(f)] = 1.0;
    const int slack = nf + static_cast<int>(reduced.size()) + f;
    row[static_cast<std::size_t>(slack)] = 1.0;
    row.back() = 1.0;
    t.basis[static_cast<std::size_t>(static_cast<int>(reduced.size()) + f)] = slack;
  }

  if (!art_rows.empty()) {
    // Phase 1: minimize the artificial sum.
    t.obj.assign(static_cast<std::size_t>(t.ncols) + 1, 0.0);
    for (int j = t.art_start; j < t.ncols; ++j) t.obj[static_cast<std::size_t>(j)] = 1.0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (t.basis[i] >= t.art_start) {
        for (std::size_t k = 0; k < t.obj.size(); ++k) t.obj[k] -= t.rows[i][k];
      }
    }
    const int save_art_start = t.art_start;
    t.art_start = t.ncols;  // artificials may re-enter during phase 1 only
    while (t.bland_step()) {
    }
    t.art_start = save_art_start;
    if (t.objective_value() > kLpTol) return out;  // infeasible

    // Degenerate artificials leave the basis; rows that cannot release one
    // are linearly dependent and are dropped.
    for (std::size_t i = t.rows.size(); i-- > 0;) {
      if (t.basis[i] < t.art_start) continue;
      int j = -1;
      for (int k = 0; k < t.art_start; ++k) {
        if (std::abs(t.rows[i][static_cast<std::size_t>(k)]) > kPivotEps) {
          j = k;
          break;
        }
      }
      if (j >= 0) {
        t.pivot(i, j);
      } else {
        t.rows.erase(t.rows.begin() + static_cast<std::ptrdiff_t>(i));
        t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
  }

  // Phase 2 over the true objective.
  t.obj.assign(static_cast<std::size_t>(t.ncols) + 1, 0.0);
  for (int f = 0; f < nf; ++f) {
    t.obj[static_cast<std::size_t>(f)] = ilp.objective[static_cast<std::size_t>(free_vars[static_cast<std::size_t>(f)])];
  }
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double cb = t.basis[i] < nf
                          ? ilp.objective[static_cast<std::size_t>(free_vars[static_cast<std::size_t>(t.basis[i])])]
                          : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t k = 0; k < t.obj.size(); ++k) t.obj[k] -= cb * t.rows[i][k];
  }
  while (t.bland_step()) {
  }

  std::vector<double> xf(static_cast<std::size_t>(nf), 0.0);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.basis[i] < nf) xf[static_cast<std::size_t>(t.basis[i])] = t.rows[i].back();
  }
  double value = base_value;
  for (int f = 0; f < nf; ++f) {
    out.x[static_cast<std::size_t>(free_vars[static_cast<std::size_t>(f)])] = xf[static_cast<std::size_t>(f)];
    value += ilp.objective[static_cast<std::size_t>(free_vars[static_cast<std::size_t>(f)])] * xf[static_cast<std::size_t>(f)];
  }
  out.status = LpStatus::optimal;
  out.value = value;
  return out;
}

LpSolution simplex_solve(const IlpInstance& ilp) {
  return simplex_solve(ilp, std::vector<std::int8_t>(static_cast<std::size_t>(ilp.num_vars), -1));
}

std::string describe_ilp(const IlpInstance& ilp) {
  char buf[64];
  std::string out = "ilp vars=" + std::to_string(ilp.num_vars) +
                    " rows=" + std::to_string(ilp.rows.size()) + "\nmin";
  for (int v = 0; v < ilp.num_vars; ++v) {
    std::snprintf(buf, sizeof buf, " %+g x%d", ilp.objective[static_cast<std::size_t>(v)], v);
    out += buf;
  }
  out += "\n";
  for (std::size_t i = 0; i < ilp.rows.size(); ++i) {
    out += "r" + std::to_string(i) + ":";
    for (const auto& [v, a] : ilp.rows[i].coeffs) {
      std::snprintf(buf, sizeof buf, " %+g x%d", a, v);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, " >= %g\n", ilp.rows[i].rhs);
    out += buf;
  }
  out += "0 <= x <= 1, x integral\n";
  return out;
}

}  // namespace retro
