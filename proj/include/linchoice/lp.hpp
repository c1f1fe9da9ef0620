#ifndef LINCHOICE_LP_HPP
#define LINCHOICE_LP_HPP

// Dense two-phase tableau simplex for the small programs used throughout the
// library. The `Simplex` object keeps its tableau between calls so callers can
// swap objectives (primal re-optimization from the current feasible basis) or
// append cuts (dual simplex from the current dual-feasible basis).

#include "linchoice/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace linchoice::lp {

enum class Sense { minimize, maximize };
enum class Relation { less_equal, greater_equal, equal };
enum class Status { optimal, infeasible, unbounded, numerical_failure };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

struct Constraint {
  std::vector<double> coefficients;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

struct LinearProgram {
  std::vector<double> objective;
  Sense sense = Sense::minimize;
  std::vector<Constraint> constraints;
  /// Per-variable bounds; empty means lower 0 and upper +inf for every variable.
  std::vector<double> lower;
  std::vector<double> upper;

  LinearProgram() = default;
  explicit LinearProgram(std::size_t num_variables, Sense s = Sense::minimize)
      : objective(num_variables, 0.0), sense(s) {}

  std::size_t num_variables() const { return objective.size(); }

  void add_constraint(std::vector<double> coefficients, Relation relation, double rhs) {
    constraints.push_back({std::move(coefficients), relation, rhs});
  }

  double lower_bound(std::size_t j) const { return lower.empty() ? 0.0 : lower[j]; }
  double upper_bound(std::size_t j) const { return upper.empty() ? kInf : upper[j]; }

  void set_bounds(std::size_t j, double lo, double hi) {
    if (lower.empty()) lower.assign(num_variables(), 0.0);
    if (upper.empty()) upper.assign(num_variables(), kInf);
    lower[j] = lo;
    upper[j] = hi;
  }

  void validate() const {
    const std::size_t n = num_variables();
    for (std::size_t r = 0; r < constraints.size(); ++r) {
      const auto& c = constraints[r];
      if (c.coefficients.size() != n) {
        throw std::invalid_argument("constraint " + std::to_string(r) + " has " +
                                    std::to_string(c.coefficients.size()) +
                                    " coefficients, expected " + std::to_string(n));
      }
      if (!std::isfinite(c.rhs)) {
        throw std::invalid_argument("constraint " + std::to_string(r) + " has a non-finite rhs");
      }
    }
    if (!lower.empty() && lower.size() != n) throw std::invalid_argument("lower bound size mismatch");
    if (!upper.empty() && upper.size() != n) throw std::invalid_argument("upper bound size mismatch");
    for (std::size_t j = 0; j < n; ++j) {
      if (lower_bound(j) > upper_bound(j)) {
        throw std::invalid_argument("variable " + std::to_string(j) + " has lower > upper");
      }
    }
  }
};

struct LpSolution {
  Status status = Status::numerical_failure;
  std::vector<double> point;
  double value = 0.0;
  /// d(value)/d(rhs) for each constraint, in the program's own sense.
  std::vector<double> duals;
  std::size_t pivots = 0;
  double max_violation = 0.0;

  bool optimal() const { return status == Status::optimal; }
};

struct SimplexOptions {
  double pivot_tolerance = 1e-9;
  double cost_tolerance = 1e-9;
  double feasibility_tolerance = 1e-9;
  /// Violation allowed on the original constraints when certifying an optimum.
  double certify_tolerance = 1e-7;
  /// Consecutive degenerate pivots before switching from Dantzig to Bland pricing.
  std::size_t degenerate_switch = 25;
};

class Simplex {
 public:
  explicit Simplex(LinearProgram lp, SimplexOptions options = {})
      : lp_(std::move(lp)), opt_(options) {
    lp_.validate();
    build();
  }

  /// Solves from scratch (phase 1, then phase 2).
  LpSolution solve() {
    build();
    pivots_ = 0;
    feasible_ = false;
    Status s = phase_one();
    if (s != Status::optimal) return finish(s);
    feasible_ = true;
    load_costs();
    return finish(settle(primal()));
  }

  /// Replaces the objective and re-optimizes from the current feasible basis.
  LpSolution reoptimize(std::vector<double> objective, Sense sense) {
    if (objective.size() != lp_.num_variables()) {
      throw std::invalid_argument("objective size mismatch");
    }
    lp_.objective = std::move(objective);
    lp_.sense = sense;
    if (!feasible_) return solve();  // rebuilds the tableau
    pivots_ = 0;
    load_costs();
    return finish(settle(primal()));
  }

  /// Appends a constraint and restores optimality with the dual simplex.
  /// Equality constraints are appended as a pair of inequalities.
  LpSolution add_constraint(std::vector<double> coefficients, Relation relation, double rhs) {
    if (coefficients.size() != lp_.num_variables()) {
      throw std::invalid_argument("constraint size mismatch");
    }
    lp_.add_constraint(coefficients, relation, rhs);
    const std::size_t original_row = lp_.constraints.size() - 1;
    if (!feasible_) return solve();
    pivots_ = 0;
    if (relation == Relation::equal) {
      append_row(coefficients, Relation::less_equal, rhs, original_row);
      append_row(coefficients, Relation::greater_equal, rhs, original_row);
    } else {
      append_row(coefficients, relation, rhs, original_row);
    }
    Status s = dual();
    if (s == Status::optimal) s = primal();
    if (s == Status::infeasible) feasible_ = false;
    return finish(settle(s));
  }

  const LinearProgram& program() const { return lp_; }

 private:
  enum class VarKind { shifted, negated, split };
  struct VarMap {
    VarKind kind = VarKind::shifted;
    std::size_t col = 0;
    std::size_t col2 = 0;
    double offset = 0.0;
  };
  struct RowInfo {
    std::size_t unit_col = 0;   // column that started as +e_row
    double sign = 1.0;          // normalized row = sign * original row
    long original = -1;         // index into lp_.constraints, -1 for bound rows
  };

  void build() {
    const std::size_t n = lp_.num_variables();
    vars_.assign(n, {});
    std::size_t ns = 0;
    struct BoundRow { std::size_t col; double ub; };
    std::vector<BoundRow> bound_rows;
    for (std::size_t j = 0; j < n; ++j) {
      const double lo = lp_.lower_bound(j);
      const double hi = lp_.upper_bound(j);
      VarMap& vm = vars_[j];
      if (std::isfinite(lo)) {
        vm.kind = VarKind::shifted;
        vm.col = ns++;
        vm.offset = lo;
        if (std::isfinite(hi)) bound_rows.push_back({vm.col, hi - lo});
      } else if (std::isfinite(hi)) {
        vm.kind = VarKind::negated;
        vm.col = ns++;
        vm.offset = hi;
      } else {
        vm.kind = VarKind::split;
        vm.col = ns++;
        vm.col2 = ns++;
      }
    }
    num_struct_ = ns;

    // Gather normalized rows before laying out logical/artificial columns.
    struct Pending { std::vector<double> a; Relation rel; double b; RowInfo info; };
    std::vector<Pending> pending;
    for (std::size_t r = 0; r < lp_.constraints.size(); ++r) {
      const auto& c = lp_.constraints[r];
      Pending p{std::vector<double>(ns, 0.0), c.relation, c.rhs, {}};
      p.b = internal_row(c.coefficients, c.rhs, p.a);
      p.info.original = static_cast<long>(r);
      pending.push_back(std::move(p));
    }
    for (const auto& br : bound_rows) {
      Pending p{std::vector<double>(ns, 0.0), Relation::less_equal, br.ub, {}};
      p.a[br.col] = 1.0;
      pending.push_back(std::move(p));
    }
    for (auto& p : pending) {
      p.info.sign = 1.0;
      if (p.b < 0.0) {
        for (double& v : p.a) v = -v;
        p.b = -p.b;
        p.info.sign = -1.0;
        if (p.rel == Relation::less_equal) p.rel = Relation::greater_equal;
        else if (p.rel == Relation::greater_equal) p.rel = Relation::less_equal;
      }
    }

    const std::size_t m = pending.size();
    std::size_t ncols = ns;
    std::vector<long> logical(m, -1), artificial(m, -1);
    for (std::size_t r = 0; r < m; ++r) {
      if (pending[r].rel != Relation::equal) logical[r] = static_cast<long>(ncols++);
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (pending[r].rel != Relation::less_equal) artificial[r] = static_cast<long>(ncols++);
    }
    ncols_ = ncols;
    rows_.assign(m, std::vector<double>(ncols, 0.0));
    rhs_.assign(m, 0.0);
    basis_.assign(m, 0);
    info_.assign(m, {});
    artificial_.assign(ncols, false);
    banned_.assign(ncols, false);
    for (std::size_t r = 0; r < m; ++r) {
      auto& row = rows_[r];
      std::copy(pending[r].a.begin(), pending[r].a.end(), row.begin());
      rhs_[r] = pending[r].b;
      info_[r] = pending[r].info;
      if (pending[r].rel == Relation::less_equal) {
        row[logical[r]] = 1.0;
        basis_[r] = static_cast<std::size_t>(logical[r]);
        info_[r].unit_col = basis_[r];
      } else {
        if (logical[r] >= 0) row[logical[r]] = -1.0;
        row[artificial[r]] = 1.0;
        artificial_[artificial[r]] = true;
        basis_[r] = static_cast<std::size_t>(artificial[r]);
        info_[r].unit_col = basis_[r];
      }
    }
    is_basic_.assign(ncols, false);
    for (std::size_t b : basis_) is_basic_[b] = true;
    feasible_ = false;
  }

  // Maps original coefficients into internal structural columns; returns the
  // shifted right-hand side.
  double internal_row(const std::vector<double>& a, double rhs, std::vector<double>& out) const {
    double b = rhs;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const VarMap& vm = vars_[j];
      switch (vm.kind) {
        case VarKind::shifted:
          out[vm.col] += a[j];
          b -= a[j] * vm.offset;
          break;
        case VarKind::negated:
          out[vm.col] -= a[j];
          b -= a[j] * vm.offset;
          break;
        case VarKind::split:
          out[vm.col] += a[j];
          out[vm.col2] -= a[j];
          break;
      }
    }
    return b;
  }

  void append_row(const std::vector<double>& coefficients, Relation relation, double rhs,
                  std::size_t original_row) {
    std::vector<double> a(num_struct_, 0.0);
    double b = internal_row(coefficients, rhs, a);
    double sign = 1.0;
    if (relation == Relation::greater_equal) {
      for (double& v : a) v = -v;
      b = -b;
      sign = -1.0;
    }
    const std::size_t slack = ncols_++;
    for (auto& row : rows_) row.push_back(0.0);
    reduced_.push_back(0.0);
    cost_.push_back(0.0);
    artificial_.push_back(false);
    banned_.push_back(false);
    is_basic_.push_back(true);

    std::vector<double> row(ncols_, 0.0);
    std::copy(a.begin(), a.end(), row.begin());
    row[slack] = 1.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const double f = row[basis_[i]];
      if (f == 0.0) continue;
      const auto& src = rows_[i];
      for (std::size_t j = 0; j < ncols_; ++j) row[j] -= f * src[j];
      b -= f * rhs_[i];
      row[basis_[i]] = 0.0;
    }
    rows_.push_back(std::move(row));
    rhs_.push_back(b);
    basis_.push_back(slack);
    info_.push_back({slack, sign, static_cast<long>(original_row)});
  }

  // A failed run leaves the tableau in an unknown state; force a rebuild.
  Status settle(Status s) {
    if (s == Status::numerical_failure) feasible_ = false;
    return s;
  }

  void pivot(std::size_t r, std::size_t e) {
    auto& pr = rows_[r];
    const double inv = 1.0 / pr[e];
    for (double& v : pr) v *= inv;
    rhs_[r] *= inv;
    pr[e] = 1.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == r) continue;
      auto& row = rows_[i];
      const double f = row[e];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < ncols_; ++j) row[j] -= f * pr[j];
      rhs_[i] -= f * rhs_[r];
      row[e] = 0.0;
    }
    const double f = reduced_[e];
    if (f != 0.0) {
      for (std::size_t j = 0; j < ncols_; ++j) reduced_[j] -= f * pr[j];
      objective_rhs_ -= f * rhs_[r];
      reduced_[e] = 0.0;
    }
    is_basic_[basis_[r]] = false;
    basis_[r] = e;
    is_basic_[e] = true;
    if ((++pivots_ & 63) == 0) poll_deadline();
  }

  void compute_reduced() {
    reduced_ = cost_;
    objective_rhs_ = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const auto& row = rows_[i];
      for (std::size_t j = 0; j < ncols_; ++j) reduced_[j] -= cb * row[j];
      objective_rhs_ -= cb * rhs_[i];
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) reduced_[basis_[i]] = 0.0;
  }

  std::size_t pivot_limit() const { return 200 * (rows_.size() + ncols_) + 1000; }

  Status primal() {
    std::size_t degenerate = 0;
    const std::size_t limit = pivots_ + pivot_limit();
    while (true) {
      if (pivots_ > limit) return Status::numerical_failure;
      const bool bland = degenerate >= opt_.degenerate_switch;
      long enter = -1;
      double best = -opt_.cost_tolerance;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (is_basic_[j] || banned_[j]) continue;
        if (reduced_[j] < best) {
          enter = static_cast<long>(j);
          if (bland) break;
          best = reduced_[j];
        }
      }
      if (enter < 0) return Status::optimal;
      const std::size_t e = static_cast<std::size_t>(enter);
      long leave = -1;
      double min_ratio = kInf;
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        const double a = rows_[i][e];
        if (a <= opt_.pivot_tolerance) continue;
        const double ratio = std::max(rhs_[i], 0.0) / a;
        if (leave < 0 || ratio < min_ratio - 1e-12) {
          leave = static_cast<long>(i);
          min_ratio = ratio;
        } else if (ratio <= min_ratio + 1e-12) {
          const std::size_t cur = static_cast<std::size_t>(leave);
          const bool better = bland ? basis_[i] < basis_[cur] : a > rows_[cur][e];
          if (better) {
            leave = static_cast<long>(i);
            min_ratio = std::min(min_ratio, ratio);
          }
        }
      }
      if (leave < 0) return Status::unbounded;
      degenerate = (min_ratio <= 1e-12) ? degenerate + 1 : 0;
      pivot(static_cast<std::size_t>(leave), e);
    }
  }

  Status dual() {
    const std::size_t limit = pivots_ + pivot_limit();
    while (true) {
      if (pivots_ > limit) return Status::numerical_failure;
      long leave = -1;
      double worst = -opt_.feasibility_tolerance;
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rhs_[i] < worst) {
          worst = rhs_[i];
          leave = static_cast<long>(i);
        }
      }
      if (leave < 0) return Status::optimal;
      const auto& row = rows_[static_cast<std::size_t>(leave)];
      long enter = -1;
      double best = kInf;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (is_basic_[j] || banned_[j]) continue;
        const double a = row[j];
        if (a >= -opt_.pivot_tolerance) continue;
        const double ratio = std::max(reduced_[j], 0.0) / -a;
        if (ratio < best - 1e-12 || (ratio <= best + 1e-12 && enter >= 0 &&
                                     -a > -row[static_cast<std::size_t>(enter)])) {
          best = std::min(best, ratio);
          enter = static_cast<long>(j);
        }
      }
      if (enter < 0) return Status::infeasible;
      pivot(static_cast<std::size_t>(leave), static_cast<std::size_t>(enter));
    }
  }

  Status phase_one() {
    std::fill(banned_.begin(), banned_.end(), false);
    cost_.assign(ncols_, 0.0);
    bool any = false;
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (artificial_[j]) {
        cost_[j] = 1.0;
        any = true;
      }
    }
    if (any) {
      compute_reduced();
      Status s = primal();
      if (s == Status::numerical_failure) return s;
      double scale = 1.0;
      for (double b : rhs_) scale = std::max(scale, std::abs(b));
      if (-objective_rhs_ > opt_.feasibility_tolerance * scale) return Status::infeasible;
      // Drive zero-level artificials out of the basis where possible; rows
      // where that fails are redundant and stay inert.
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (!artificial_[basis_[r]]) continue;
        long best = -1;
        double mag = opt_.pivot_tolerance;
        for (std::size_t j = 0; j < ncols_; ++j) {
          if (artificial_[j] || is_basic_[j]) continue;
          if (std::abs(rows_[r][j]) > mag) {
            mag = std::abs(rows_[r][j]);
            best = static_cast<long>(j);
          }
        }
        if (best >= 0) pivot(r, static_cast<std::size_t>(best));
      }
    }
    for (std::size_t j = 0; j < ncols_; ++j) banned_[j] = artificial_[j];
    return Status::optimal;
  }

  void load_costs() {
    cost_.assign(ncols_, 0.0);
    objective_offset_ = 0.0;
    const double s = lp_.sense == Sense::maximize ? -1.0 : 1.0;
    for (std::size_t j = 0; j < lp_.num_variables(); ++j) {
      const double c = s * lp_.objective[j];
      const VarMap& vm = vars_[j];
      switch (vm.kind) {
        case VarKind::shifted:
          cost_[vm.col] += c;
          objective_offset_ += c * vm.offset;
          break;
        case VarKind::negated:
          cost_[vm.col] -= c;
          objective_offset_ += c * vm.offset;
          break;
        case VarKind::split:
          cost_[vm.col] += c;
          cost_[vm.col2] -= c;
          break;
      }
    }
    compute_reduced();
  }

  LpSolution finish(Status status) {
    LpSolution sol;
    sol.status = status;
    sol.pivots = pivots_;
    if (status != Status::optimal) return sol;

    std::vector<double> internal(ncols_, 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) internal[basis_[i]] = rhs_[i];
    const std::size_t n = lp_.num_variables();
    sol.point.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const VarMap& vm = vars_[j];
      switch (vm.kind) {
        case VarKind::shifted: sol.point[j] = vm.offset + internal[vm.col]; break;
        case VarKind::negated: sol.point[j] = vm.offset - internal[vm.col]; break;
        case VarKind::split: sol.point[j] = internal[vm.col] - internal[vm.col2]; break;
      }
    }
    double value = 0.0;
    for (std::size_t j = 0; j < n; ++j) value += lp_.objective[j] * sol.point[j];
    sol.value = value;

    double worst = 0.0;
    for (const auto& c : lp_.constraints) {
      double lhs = 0.0;
      double scale = std::max(1.0, std::abs(c.rhs));
      for (std::size_t j = 0; j < n; ++j) {
        lhs += c.coefficients[j] * sol.point[j];
        scale = std::max(scale, std::abs(c.coefficients[j] * sol.point[j]));
      }
      double v = 0.0;
      if (c.relation != Relation::greater_equal) v = std::max(v, lhs - c.rhs);
      if (c.relation != Relation::less_equal) v = std::max(v, c.rhs - lhs);
      worst = std::max(worst, v / scale);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double scale = std::max(1.0, std::abs(sol.point[j]));
      worst = std::max(worst, (lp_.lower_bound(j) - sol.point[j]) / scale);
      worst = std::max(worst, (sol.point[j] - lp_.upper_bound(j)) / scale);
    }
    sol.max_violation = worst;
    if (worst > opt_.certify_tolerance) {
      sol.status = Status::numerical_failure;
      return sol;
    }

    sol.duals.assign(lp_.constraints.size(), 0.0);
    const double s = lp_.sense == Sense::maximize ? -1.0 : 1.0;
    for (const auto& info : info_) {
      if (info.original < 0) continue;
      const double y = -reduced_[info.unit_col] * info.sign * s;
      sol.duals[static_cast<std::size_t>(info.original)] += y;
    }
    return sol;
  }

  LinearProgram lp_;
  SimplexOptions opt_;
  std::vector<VarMap> vars_;
  std::size_t num_struct_ = 0;
  std::size_t ncols_ = 0;
  std::vector<std::vector<double>> rows_;
  std::vector<double> rhs_;
  std::vector<std::size_t> basis_;
  std::vector<RowInfo> info_;
  std::vector<bool> artificial_;
  std::vector<bool> banned_;
  std::vector<bool> is_basic_;
  std::vector<double> cost_;
  std::vector<double> reduced_;
  double objective_rhs_ = 0.0;
  double objective_offset_ = 0.0;
  std::size_t pivots_ = 0;
  bool feasible_ = false;
};

inline LpSolution solve(const LinearProgram& lp, SimplexOptions options = {}) {
  return Simplex(lp, options).solve();
}

/// Result of `find_feasible`: a feasible point maximizing the uniform slack on
/// every non-degenerate inequality and finite bound (capped at 1).
struct FeasiblePoint {
  LpSolution solution;
  double slack = 0.0;

  bool strictly_feasible(double threshold = 1e-9) const {
    return solution.optimal() && slack >= threshold;
  }
};

inline FeasiblePoint find_feasible(const LinearProgram& lp, SimplexOptions options = {}) {
  lp.validate();
  const std::size_t n = lp.num_variables();
  LinearProgram aux(n + 1, Sense::maximize);
  aux.objective[n] = 1.0;
  aux.lower.assign(n + 1, 0.0);
  aux.upper.assign(n + 1, kInf);
  aux.lower[n] = 0.0;
  aux.upper[n] = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    aux.lower[j] = lp.lower_bound(j);
    aux.upper[j] = lp.upper_bound(j);
  }
  for (const auto& c : lp.constraints) {
    std::vector<double> a = c.coefficients;
    a.push_back(0.0);
    const bool degenerate = std::all_of(c.coefficients.begin(), c.coefficients.end(),
                                        [](double v) { return v == 0.0; });
    if (!degenerate) {
      if (c.relation == Relation::less_equal) a[n] = 1.0;
      if (c.relation == Relation::greater_equal) a[n] = -1.0;
    }
    aux.add_constraint(std::move(a), c.relation, c.rhs);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = lp.lower_bound(j);
    const double hi = lp.upper_bound(j);
    if (std::isfinite(lo) && std::isfinite(hi) && lo == hi) continue;
    if (std::isfinite(lo)) {
      std::vector<double> a(n + 1, 0.0);
      a[j] = 1.0;
      a[n] = -1.0;
      aux.add_constraint(std::move(a), Relation::greater_equal, lo);
    }
    if (std::isfinite(hi)) {
      std::vector<double> a(n + 1, 0.0);
      a[j] = 1.0;
      a[n] = 1.0;
      aux.add_constraint(std::move(a), Relation::less_equal, hi);
    }
  }
  LpSolution aux_sol = Simplex(std::move(aux), options).solve();
  FeasiblePoint out;
  out.solution.status = aux_sol.status;
  out.solution.pivots = aux_sol.pivots;
  out.solution.max_violation = aux_sol.max_violation;
  if (!aux_sol.optimal()) return out;
  out.slack = aux_sol.point[n];
  out.solution.point.assign(aux_sol.point.begin(), aux_sol.point.begin() + static_cast<long>(n));
  double value = 0.0;
  for (std::size_t j = 0; j < n; ++j) value += lp.objective[j] * out.solution.point[j];
  out.solution.value = value;
  return out;
}

}  // namespace linchoice::lp

#endif  // LINCHOICE_LP_HPP
