#include "dipps/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace dipps {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

LpSolution solve_lp(const LinearProgram& lp, LpTolerances tol) {
  LpSolver solver(tol);
  return solver.solve(lp);
}

void LpSolver::load(const LinearProgram& lp) {
  m_ = static_cast<int>(lp.rows.size());
  n_struct_ = lp.num_vars;
  n_slack_ = 0;
  for (const auto& r : lp.rows)
    if (r.rel == Relation::Le) ++n_slack_;
  n_total_ = n_struct_ + n_slack_ + m_;

  lo_.assign(n_total_, 0.0);
  up_.assign(n_total_, 0.0);
  for (int j = 0; j < n_struct_; ++j) {
    lo_[j] = lp.lower[j];
    up_[j] = lp.upper[j];
  }
  slack_row_.assign(n_slack_, 0);
  art_sign_.assign(m_, 1.0);
  rhs_.assign(m_, 0.0);

  // structural columns in CSC form
  std::vector<int> counts(n_struct_, 0);
  for (const auto& r : lp.rows)
    for (const auto& t : r.terms) ++counts[t.first];
  cols_.assign(n_struct_, Col{});
  int total = 0;
  for (int j = 0; j < n_struct_; ++j) {
    cols_[j].begin = total;
    total += counts[j];
    cols_[j].end = cols_[j].begin;
  }
  col_index_.assign(total, 0);
  col_value_.assign(total, 0.0);
  int slack = 0;
  for (int i = 0; i < m_; ++i) {
    const auto& r = lp.rows[i];
    rhs_[i] = r.rhs;
    for (const auto& t : r.terms) {
      int pos = cols_[t.first].end++;
      col_index_[pos] = i;
      col_value_[pos] = t.second;
    }
    if (r.rel == Relation::Le) {
      int js = n_struct_ + slack;
      slack_row_[slack] = i;
      lo_[js] = 0.0;
      up_[js] = kInf;
      ++slack;
    }
  }
  // artificial bounds start relaxed; pinned to zero for phase two
  for (int i = 0; i < m_; ++i) {
    lo_[n_struct_ + n_slack_ + i] = 0.0;
    up_[n_struct_ + n_slack_ + i] = kInf;
  }

  basic_.assign(m_, -1);
  vstate_.assign(n_total_, 0);
  xb_.assign(m_, 0.0);
  binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
  y_.assign(m_, 0.0);
  d_.assign(n_total_, 0.0);
  work_col_.assign(m_, 0.0);
  work_row_.assign(m_, 0.0);
  pivots_since_refactor_ = 0;
}

double LpSolver::nonbasic_value(int j) const {
  return vstate_[j] == 1 ? up_[j] : lo_[j];
}

void LpSolver::densify(int j, std::vector<double>& out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (j < n_struct_) {
    for (int p = cols_[j].begin; p < cols_[j].end; ++p)
      out[col_index_[p]] = col_value_[p];
  } else if (j < n_struct_ + n_slack_) {
    out[slack_row_[j - n_struct_]] = 1.0;
  } else {
    int i = j - n_struct_ - n_slack_;
    out[i] = art_sign_[i];
  }
}

// Rebuild the dense inverse of the current basis by Gauss-Jordan with
// partial pivoting.  Returns false on a (numerically) singular basis.
bool LpSolver::refactor() {
  std::vector<double> mat(static_cast<size_t>(m_) * m_, 0.0);
  std::vector<double> colbuf(m_);
  for (int k = 0; k < m_; ++k) {
    densify(basic_[k], colbuf);
    for (int i = 0; i < m_; ++i) mat[static_cast<size_t>(i) * m_ + k] = colbuf[i];
  }
  std::fill(binv_.begin(), binv_.end(), 0.0);
  for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = 1.0;

  for (int k = 0; k < m_; ++k) {
    int piv = -1;
    double best = tol_.pivot;
    for (int i = k; i < m_; ++i) {
      double v = std::fabs(mat[static_cast<size_t>(i) * m_ + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (piv < 0) return false;
    if (piv != k) {
      for (int j = 0; j < m_; ++j) {
        std::swap(mat[static_cast<size_t>(piv) * m_ + j],
                  mat[static_cast<size_t>(k) * m_ + j]);
        std::swap(binv_[static_cast<size_t>(piv) * m_ + j],
                  binv_[static_cast<size_t>(k) * m_ + j]);
      }
    }
    double p = mat[static_cast<size_t>(k) * m_ + k];
    double inv = 1.0 / p;
    for (int j = 0; j < m_; ++j) {
      mat[static_cast<size_t>(k) * m_ + j] *= inv;
      binv_[static_cast<size_t>(k) * m_ + j] *= inv;
    }
    for (int i = 0; i < m_; ++i) {
      if (i == k) continue;
      double f = mat[static_cast<size_t>(i) * m_ + k];
      if (f == 0.0) continue;
      for (int j = 0; j < m_; ++j) {
        mat[static_cast<size_t>(i) * m_ + j] -=
            f * mat[static_cast<size_t>(k) * m_ + j];
        binv_[static_cast<size_t>(i) * m_ + j] -=
            f * binv_[static_cast<size_t>(k) * m_ + j];
      }
    }
  }
  pivots_since_refactor_ = 0;
  return true;
}

void LpSolver::compute_xb() {
  // t = rhs - sum over nonbasic columns at nonzero bound values
  std::vector<double> t(rhs_);
  for (int j = 0; j < n_total_; ++j) {
    if (vstate_[j] == 2) continue;
    double v = nonbasic_value(j);
    if (v == 0.0) continue;
    if (j < n_struct_) {
      for (int p = cols_[j].begin; p < cols_[j].end; ++p)
        t[col_index_[p]] -= col_value_[p] * v;
    } else if (j < n_struct_ + n_slack_) {
      t[slack_row_[j - n_struct_]] -= v;
    } else {
      int i = j - n_struct_ - n_slack_;
      t[i] -= art_sign_[i] * v;
    }
  }
  for (int i = 0; i < m_; ++i) {
    const double* row = &binv_[static_cast<size_t>(i) * m_];
    double s = 0.0;
    for (int k = 0; k < m_; ++k) s += row[k] * t[k];
    xb_[i] = s;
  }
}

void LpSolver::compute_duals(const std::vector<double>& cost) {
  for (int i = 0; i < m_; ++i) y_[i] = 0.0;
  for (int k = 0; k < m_; ++k) {
    double cb = cost[basic_[k]];
    if (cb == 0.0) continue;
    const double* row = &binv_[static_cast<size_t>(k) * m_];
    for (int i = 0; i < m_; ++i) y_[i] += cb * row[i];
  }
  for (int j = 0; j < n_total_; ++j) {
    if (vstate_[j] == 2) {
      d_[j] = 0.0;
      continue;
    }
    double dj = cost[j];
    if (j < n_struct_) {
      for (int p = cols_[j].begin; p < cols_[j].end; ++p)
        dj -= y_[col_index_[p]] * col_value_[p];
    } else if (j < n_struct_ + n_slack_) {
      dj -= y_[slack_row_[j - n_struct_]];
    } else {
      int i = j - n_struct_ - n_slack_;
      dj -= y_[i] * art_sign_[i];
    }
    d_[j] = dj;
  }
}

// Basis change: entering column (dense image in work_col_) replaces the
// variable basic in `row`.
void LpSolver::pivot(int enter, int row) {
  double p = work_col_[row];
  double inv = 1.0 / p;
  double* br = &binv_[static_cast<size_t>(row) * m_];
  for (int j = 0; j < m_; ++j) br[j] *= inv;
  for (int i = 0; i < m_; ++i) {
    if (i == row) continue;
    double f = work_col_[i];
    if (f == 0.0) continue;
    double* bi = &binv_[static_cast<size_t>(i) * m_];
    for (int j = 0; j < m_; ++j) bi[j] -= f * br[j];
  }
  basic_[row] = enter;
  vstate_[enter] = 2;
  ++pivots_since_refactor_;
}

int LpSolver::price(const std::vector<double>& cost, bool bland) const {
  (void)cost;
  int enter = -1;
  double best = tol_.optimality;
  for (int j = 0; j < n_total_; ++j) {
    if (vstate_[j] == 2) continue;
    if (lo_[j] == up_[j]) continue;  // fixed
    double viol = vstate_[j] == 0 ? -d_[j] : d_[j];
    if (viol > best) {
      if (bland) return j;
      best = viol;
      enter = j;
    }
  }
  return enter;
}

LpStatus LpSolver::primal_loop(const std::vector<double>& cost, int& iters,
                               bool phase_one) {
  const int max_iters = 20000 + 60 * (m_ + n_struct_);
  int degen_streak = 0;
  bool bland = false;

  while (true) {
    if (iters > max_iters) return LpStatus::NumericalBreakdown;
    compute_duals(cost);
    int enter = price(cost, bland);
    if (enter < 0) return LpStatus::Optimal;
    ++iters;

    double s = vstate_[enter] == 0 ? 1.0 : -1.0;
    densify(enter, work_row_);
    for (int i = 0; i < m_; ++i) {
      const double* row = &binv_[static_cast<size_t>(i) * m_];
      double v = 0.0;
      for (int k = 0; k < m_; ++k) v += row[k] * work_row_[k];
      work_col_[i] = v;
    }

    double flip_range = up_[enter] - lo_[enter];  // may be +inf
    double best_lim = kInf;
    int leave_row = -1;
    double leave_mag = 0.0;
    int leave_to_upper = 0;
    for (int i = 0; i < m_; ++i) {
      double a = s * work_col_[i];
      int bi = basic_[i];
      double lim;
      int to_upper;
      if (a > tol_.pivot) {
        lim = (xb_[i] - lo_[bi]) / a;
        to_upper = 0;
      } else if (a < -tol_.pivot) {
        if (up_[bi] == kInf) continue;
        lim = (up_[bi] - xb_[i]) / (-a);
        to_upper = 1;
      } else {
        continue;
      }
      if (lim < 0.0) lim = 0.0;
      double mag = std::fabs(a);
      // min ratio; ties resolved toward the larger pivot magnitude
      bool better;
      if (leave_row < 0)
        better = true;
      else if (lim < best_lim - 1e-12)
        better = true;
      else if (lim <= best_lim + 1e-12 && mag > leave_mag)
        better = true;
      else
        better = false;
      if (better) {
        best_lim = std::min(lim, leave_row < 0 ? lim : best_lim);
        leave_row = i;
        leave_mag = mag;
        leave_to_upper = to_upper;
      }
    }

    if (leave_row < 0 || flip_range < best_lim) {
      if (flip_range == kInf) {
        return phase_one ? LpStatus::NumericalBreakdown : LpStatus::Unbounded;
      }
      // bound flip, basis unchanged
      for (int i = 0; i < m_; ++i) xb_[i] -= s * work_col_[i] * flip_range;
      vstate_[enter] = vstate_[enter] == 0 ? 1 : 0;
      continue;
    }

    double delta = std::max(0.0, best_lim);
    if (std::fabs(work_col_[leave_row]) < tol_.pivot)
      return LpStatus::NumericalBreakdown;

    double enter_val = nonbasic_value(enter) + s * delta;
    for (int i = 0; i < m_; ++i) xb_[i] -= s * work_col_[i] * delta;
    int leaving = basic_[leave_row];
    vstate_[leaving] = leave_to_upper ? 1 : 0;
    pivot(enter, leave_row);
    xb_[leave_row] = enter_val;

    if (delta <= 1e-11) {
      if (++degen_streak > 3 * (m_ + n_struct_) + 200) bland = true;
    } else {
      degen_streak = 0;
    }
    if (pivots_since_refactor_ >= 128) {
      if (!refactor()) return LpStatus::NumericalBreakdown;
      compute_xb();
    }
  }
}

LpStatus LpSolver::dual_loop(const std::vector<double>& cost, int& iters) {
  const int max_iters = 8000 + 20 * m_;
  while (true) {
    if (iters > max_iters) return LpStatus::NumericalBreakdown;

    int r = -1;
    double worst = tol_.feasibility;
    bool to_lower = false;
    for (int i = 0; i < m_; ++i) {
      int bi = basic_[i];
      double below = lo_[bi] - xb_[i];
      double above = up_[bi] == kInf ? -kInf : xb_[i] - up_[bi];
      if (below > worst) {
        worst = below;
        r = i;
        to_lower = true;
      }
      if (above > worst) {
        worst = above;
        r = i;
        to_lower = false;
      }
    }
    if (r < 0) return LpStatus::Optimal;
    ++iters;

    compute_duals(cost);
    const double* rho = &binv_[static_cast<size_t>(r) * m_];

    int enter = -1;
    double best_ratio = kInf;
    double best_mag = 0.0;
    double alpha_enter = 0.0;
    for (int j = 0; j < n_total_; ++j) {
      if (vstate_[j] == 2) continue;
      if (lo_[j] == up_[j]) continue;
      double alpha;
      if (j < n_struct_) {
        alpha = 0.0;
        for (int p = cols_[j].begin; p < cols_[j].end; ++p)
          alpha += rho[col_index_[p]] * col_value_[p];
      } else if (j < n_struct_ + n_slack_) {
        alpha = rho[slack_row_[j - n_struct_]];
      } else {
        continue;
      }
      bool at_lower = vstate_[j] == 0;
      bool eligible = to_lower ? (at_lower ? alpha < -tol_.pivot : alpha > tol_.pivot)
                               : (at_lower ? alpha > tol_.pivot : alpha < -tol_.pivot);
      if (!eligible) continue;
      double num = at_lower ? std::max(0.0, d_[j]) : std::max(0.0, -d_[j]);
      double mag = std::fabs(alpha);
      double ratio = num / mag;
      if (ratio < best_ratio - 1e-12 ||
          (ratio <= best_ratio + 1e-12 && mag > best_mag)) {
        best_ratio = ratio;
        best_mag = mag;
        enter = j;
        alpha_enter = alpha;
      }
    }
    if (enter < 0) return LpStatus::Infeasible;

    densify(enter, work_row_);
    for (int i = 0; i < m_; ++i) {
      const double* row = &binv_[static_cast<size_t>(i) * m_];
      double v = 0.0;
      for (int k = 0; k < m_; ++k) v += row[k] * work_row_[k];
      work_col_[i] = v;
    }
    if (std::fabs(work_col_[r]) < tol_.pivot) return LpStatus::NumericalBreakdown;

    int leaving = basic_[r];
    double bound = to_lower ? lo_[leaving] : up_[leaving];
    double delta_signed = (xb_[r] - bound) / work_col_[r];
    double enter_val = nonbasic_value(enter) + delta_signed;
    for (int i = 0; i < m_; ++i) xb_[i] -= work_col_[i] * delta_signed;
    vstate_[leaving] = to_lower ? 0 : 1;
    (void)alpha_enter;
    pivot(enter, r);
    xb_[r] = enter_val;

    if (pivots_since_refactor_ >= 128) {
      if (!refactor()) return LpStatus::NumericalBreakdown;
      compute_xb();
    }
  }
}

void LpSolver::snapshot() {
  out_basis_.basic = basic_;
  out_basis_.vstate = vstate_;
}

LpSolution LpSolver::finish(const LinearProgram& lp, LpStatus st, int iters,
                            const std::vector<double>& cost) {
  LpSolution sol;
  sol.status = st;
  sol.iterations = iters;
  sol.x.assign(n_struct_, 0.0);
  for (int j = 0; j < n_struct_; ++j)
    sol.x[j] = vstate_[j] == 2 ? 0.0 : nonbasic_value(j);
  for (int i = 0; i < m_; ++i)
    if (basic_[i] < n_struct_) sol.x[basic_[i]] = xb_[i];
  double obj = 0.0;
  for (int j = 0; j < n_struct_; ++j) obj += lp.c[j] * sol.x[j];
  sol.objective = obj;
  if (st == LpStatus::Optimal) {
    compute_duals(cost);
    sol.row_duals.assign(y_.begin(), y_.end());
    sol.reduced_costs.assign(d_.begin(), d_.begin() + n_struct_);
  }
  snapshot();
  return sol;
}

LpSolution LpSolver::solve(const LinearProgram& lp) {
  load(lp);

  // Starting point: every variable at its lower bound; rows covered by
  // slacks where the residual allows it, otherwise by artificials.
  std::vector<double> resid(rhs_);
  for (int j = 0; j < n_struct_; ++j) {
    double v = lo_[j];
    if (v == 0.0) continue;
    for (int p = cols_[j].begin; p < cols_[j].end; ++p)
      resid[col_index_[p]] -= col_value_[p] * v;
  }
  std::vector<signed char> row_has_slack(m_, 0);
  std::vector<int> row_slack(m_, -1);
  for (int k = 0; k < n_slack_; ++k) {
    row_has_slack[slack_row_[k]] = 1;
    row_slack[slack_row_[k]] = n_struct_ + k;
  }
  bool any_artificial = false;
  for (int i = 0; i < m_; ++i) {
    if (row_has_slack[i] && resid[i] >= 0.0) {
      basic_[i] = row_slack[i];
      vstate_[row_slack[i]] = 2;
    } else {
      int ja = n_struct_ + n_slack_ + i;
      art_sign_[i] = resid[i] >= 0.0 ? 1.0 : -1.0;
      basic_[i] = ja;
      vstate_[ja] = 2;
      any_artificial = true;
    }
  }
  if (!refactor()) return finish(lp, LpStatus::NumericalBreakdown, 0, lp.c);
  compute_xb();

  std::vector<double> cost2(n_total_, 0.0);
  for (int j = 0; j < n_struct_; ++j) cost2[j] = lp.c[j];

  int iters = 0;
  if (any_artificial) {
    std::vector<double> cost1(n_total_, 0.0);
    for (int i = 0; i < m_; ++i) cost1[n_struct_ + n_slack_ + i] = 1.0;
    LpStatus st1 = primal_loop(cost1, iters, true);
    if (st1 != LpStatus::Optimal) return finish(lp, st1, iters, cost2);
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basic_[i] >= n_struct_ + n_slack_) infeas += std::fabs(xb_[i]);
    for (int j = n_struct_ + n_slack_; j < n_total_; ++j)
      if (vstate_[j] == 1) infeas += up_[j];  // cannot happen (upper inf)
    if (infeas > tol_.feasibility)
      return finish(lp, LpStatus::Infeasible, iters, cost2);

    // Drive remaining basic artificials out on any usable pivot; rows with
    // no pivot are redundant and keep a pinned artificial.
    for (int r = 0; r < m_; ++r) {
      if (basic_[r] < n_struct_ + n_slack_) continue;
      const double* rho = &binv_[static_cast<size_t>(r) * m_];
      int enter = -1;
      double best = 1e-9;
      for (int j = 0; j < n_struct_ + n_slack_; ++j) {
        if (vstate_[j] == 2) continue;
        double alpha;
        if (j < n_struct_) {
          alpha = 0.0;
          for (int p = cols_[j].begin; p < cols_[j].end; ++p)
            alpha += rho[col_index_[p]] * col_value_[p];
        } else {
          alpha = rho[slack_row_[j - n_struct_]];
        }
        if (std::fabs(alpha) > best) {
          best = std::fabs(alpha);
          enter = j;
        }
      }
      if (enter < 0) continue;
      densify(enter, work_row_);
      for (int i = 0; i < m_; ++i) {
        const double* row = &binv_[static_cast<size_t>(i) * m_];
        double v = 0.0;
        for (int k = 0; k < m_; ++k) v += row[k] * work_row_[k];
        work_col_[i] = v;
      }
      // artificial leaves at (approximately) zero
      double delta_signed = xb_[r] / work_col_[r];
      double enter_val = nonbasic_value(enter) + delta_signed;
      for (int i = 0; i < m_; ++i) xb_[i] -= work_col_[i] * delta_signed;
      int leaving = basic_[r];
      vstate_[leaving] = 0;
      pivot(enter, r);
      xb_[r] = enter_val;
    }
  }
  // pin artificials for phase two
  for (int i = 0; i < m_; ++i) {
    int ja = n_struct_ + n_slack_ + i;
    up_[ja] = 0.0;
  }

  LpStatus st2 = primal_loop(cost2, iters, false);
  return finish(lp, st2, iters, cost2);
}

LpSolution LpSolver::resolve(const LinearProgram& lp, const LpBasis& start) {
  if (!start.valid()) return solve(lp);
  load(lp);
  if (static_cast<int>(start.basic.size()) != m_ ||
      static_cast<int>(start.vstate.size()) != n_total_)
    return solve(lp);
  basic_ = start.basic;
  vstate_ = start.vstate;
  for (int i = 0; i < m_; ++i) {
    int ja = n_struct_ + n_slack_ + i;
    up_[ja] = 0.0;  // artificials stay pinned
  }
  if (!refactor()) return solve(lp);
  compute_xb();

  std::vector<double> cost2(n_total_, 0.0);
  for (int j = 0; j < n_struct_; ++j) cost2[j] = lp.c[j];
  compute_duals(cost2);
  for (int j = 0; j < n_total_; ++j) {
    if (vstate_[j] == 2 || lo_[j] == up_[j]) continue;
    double viol = vstate_[j] == 0 ? -d_[j] : d_[j];
    if (viol > 100.0 * tol_.optimality) return solve(lp);  // basis too stale
  }

  int iters = 0;
  LpStatus st = dual_loop(cost2, iters);
  if (st == LpStatus::NumericalBreakdown) return solve(lp);
  if (st == LpStatus::Infeasible) {
    // confirm with a cold solve; a false prune would be silent
    return solve(lp);
  }
  // polish: finish any residual dual infeasibility with primal steps
  st = primal_loop(cost2, iters, false);
  if (st == LpStatus::NumericalBreakdown) return solve(lp);
  return finish(lp, st, iters, cost2);
}

}  // namespace dipps
