#ifndef LINCHOICE_DISTORTION_HPP
#define LINCHOICE_DISTORTION_HPP

// Instance distortion: the worst welfare ratio over every average voter
//   v_bar = (1/n) sum_j v_j,  v_j in F_j = {v in simplex : <c_a - c_b, v> >= 0
//                                          for each reported a > b}.
// The region is a Minkowski average, so a linear objective over it splits into
// one small LP per voter; voters reporting the same ranking share an LP.

#include "linchoice/lp.hpp"
#include "linchoice/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace linchoice {

struct RegionOptions {
  bool include_hull = false;
};

class FeasibleRegion {
 public:
  struct Minimum {
    double value = 0.0;
    Vector witness;  // attaining average voter
  };

  FeasibleRegion(const Profile& profile, const CandidateSet& candidates, RegionOptions options = {})
      : d_(candidates.dim()), n_(profile.num_voters()), include_hull_(options.include_hull) {
    if (profile.num_candidates() != candidates.size()) {
      throw ValidationError("profile and candidate set disagree on the number of candidates");
    }
    if (n_ == 0) throw ValidationError("profile is empty");
    std::map<std::vector<std::pair<int, int>>, std::size_t> index;
    for (std::size_t v = 0; v < n_; ++v) {
      auto pairs = profile.ordinal_pairs(v);
      auto [it, fresh] = index.try_emplace(pairs, records_.size());
      if (fresh) {
        records_.push_back(Record{pairs, 0, std::nullopt});
        first_voter_.push_back(v);
      }
      ++records_[it->second].multiplicity;
    }
    feasible_ = Vector::Zero(static_cast<Eigen::Index>(d_));
    for (std::size_t r = 0; r < records_.size(); ++r) {
      Record& rec = records_[r];
      lp::LinearProgram prog = build(rec.pairs, candidates);
      const lp::FeasiblePoint fp = lp::find_feasible(prog);
      if (!fp.solution.optimal()) {
        throw RealizabilityError("voter " + std::to_string(first_voter_[r]) +
                                 "'s preferences admit no consistent utility vector" +
                                 (include_hull_ ? " in the candidate hull" : ""));
      }
      for (std::size_t i = 0; i < d_; ++i) {
        feasible_(static_cast<Eigen::Index>(i)) += static_cast<double>(rec.multiplicity) * fp.solution.point[i];
      }
      rec.solver.emplace(std::move(prog));
    }
    feasible_ /= static_cast<double>(n_);
  }

  std::size_t dim() const { return d_; }
  std::size_t num_voters() const { return n_; }
  std::size_t num_records() const { return records_.size(); }
  bool include_hull() const { return include_hull_; }

  /// A point of the region (average of per-voter max-slack points).
  const Vector& feasible_point() const { return feasible_; }

  /// min over the region of <direction, v_bar>.
  Minimum minimize(const Vector& direction) {
    if (static_cast<std::size_t>(direction.size()) != d_) throw std::invalid_argument("direction has wrong dimension");
    Minimum out;
    out.witness = Vector::Zero(static_cast<Eigen::Index>(d_));
    for (Record& rec : records_) {
      std::vector<double> objective(rec.solver->program().num_variables(), 0.0);
      for (std::size_t i = 0; i < d_; ++i) objective[i] = direction(static_cast<Eigen::Index>(i));
      lp::LpSolution sol = rec.solver->reoptimize(std::move(objective), lp::Sense::minimize);
      if (!sol.optimal()) {
        // A warm start that lost its way gets one cold retry.
        sol = rec.solver->solve();
        if (!sol.optimal()) throw SolverError("feasible-region LP failed: " + lp::to_string(sol.status));
      }
      const double w = static_cast<double>(rec.multiplicity);
      out.value += w * sol.value;
      for (std::size_t i = 0; i < d_; ++i) out.witness(static_cast<Eigen::Index>(i)) += w * sol.point[i];
      ++solves_;
    }
    out.value /= static_cast<double>(n_);
    out.witness /= static_cast<double>(n_);
    return out;
  }

  std::size_t lp_solves() const { return solves_; }

 private:
  struct Record {
    std::vector<std::pair<int, int>> pairs;
    std::size_t multiplicity = 0;
    std::optional<lp::Simplex> solver;
  };

  lp::LinearProgram build(const std::vector<std::pair<int, int>>& pairs, const CandidateSet& candidates) const {
    const std::size_t m = candidates.size();
    const std::size_t vars = d_ + (include_hull_ ? m : 0);
    lp::LinearProgram prog(vars);
    const Matrix& c = candidates.vectors();
    std::vector<double> sum(vars, 0.0);
    for (std::size_t i = 0; i < d_; ++i) sum[i] = 1.0;
    prog.add_constraint(sum, lp::Relation::equal, 1.0);
    for (auto [a, b] : pairs) {
      std::vector<double> row(vars, 0.0);
      bool any = false;
      for (std::size_t i = 0; i < d_; ++i) {
        row[i] = c(a, static_cast<Eigen::Index>(i)) - c(b, static_cast<Eigen::Index>(i));
        any = any || row[i] != 0.0;
      }
      if (any) prog.add_constraint(std::move(row), lp::Relation::greater_equal, 0.0);
    }
    if (include_hull_) {
      // v = C^T lambda, lambda in the simplex.
      std::vector<double> lam(vars, 0.0);
      for (std::size_t k = 0; k < m; ++k) lam[d_ + k] = 1.0;
      prog.add_constraint(std::move(lam), lp::Relation::equal, 1.0);
      for (std::size_t i = 0; i < d_; ++i) {
        std::vector<double> row(vars, 0.0);
        row[i] = 1.0;
        for (std::size_t k = 0; k < m; ++k) row[d_ + k] = -c(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
        prog.add_constraint(std::move(row), lp::Relation::equal, 0.0);
      }
    }
    return prog;
  }

  std::size_t d_;
  std::size_t n_;
  bool include_hull_;
  std::vector<Record> records_;
  std::vector<std::size_t> first_voter_;
  Vector feasible_;
  std::size_t solves_ = 0;
};

struct DistortionOptions {
  double epsilon = 1e-6;
  /// A test point beta is accepted when the region minimum is >= -this.
  double feasibility = 1e-10;
  /// Separation reports a violation below -this.
  double violation = 1e-9;
  std::size_t max_iterations = 500;
};

struct PairBeta {
  double beta = 1.0;
  Vector witness;
  std::size_t tests = 0;
};

/// Largest beta in [0,1] with min over the region of <chosen - beta * challenger, v_bar> >= 0,
/// found by Dinkelbach updates (each failed test yields the ratio at its
/// witness as a new upper bound) safeguarded by bisection.
inline PairBeta pair_beta(const Vector& chosen, const Vector& challenger, FeasibleRegion& region,
                          const DistortionOptions& options = {}) {
  PairBeta out;
  double lo = 0.0, hi = 1.0;
  double beta = 1.0;
  Vector lo_witness = region.feasible_point();
  for (std::size_t it = 0; it < 200; ++it) {
    const FeasibleRegion::Minimum m = region.minimize(chosen - beta * challenger);
    ++out.tests;
    if (m.value >= -options.feasibility) {
      lo = beta;
      lo_witness = m.witness;
    } else {
      hi = beta;
      const double num = chosen.dot(m.witness), den = challenger.dot(m.witness);
      if (den > 0.0) hi = std::min(hi, std::max(num / den, lo));
    }
    if (hi - lo <= options.epsilon || lo >= hi) break;
    // Dinkelbach proposes hi itself; fall back to bisection if it stalls.
    beta = (it < 12) ? hi : 0.5 * (lo + hi);
    if (beta <= lo) beta = 0.5 * (lo + hi);
  }
  out.beta = (hi <= options.epsilon && lo <= options.epsilon) ? 0.0 : lo;
  out.witness = lo_witness;
  return out;
}

struct DistortionReport {
  double value = 1.0;  // 1 / beta, +inf when beta == 0
  double beta = 1.0;
  Vector witness;
  /// beta against each challenger (for the optimal rules: per candidate).
  Vector betas;
  std::size_t worst = 0;
  std::size_t iterations = 0;
  double epsilon = 1e-6;
};

inline double beta_to_distortion(double beta) { return beta > 0.0 ? 1.0 / beta : kInf; }

/// Distortion of choosing the point x (a candidate or a lottery's mean).
inline DistortionReport instance_distortion_point(const Vector& x, const CandidateSet& candidates,
                                                  FeasibleRegion& region, const DistortionOptions& options = {}) {
  const std::size_t m = candidates.size();
  DistortionReport rep;
  rep.epsilon = options.epsilon;
  rep.betas = Vector::Ones(static_cast<Eigen::Index>(m));
  rep.witness = region.feasible_point();
  for (std::size_t c = 0; c < m; ++c) {
    poll_deadline();
    const PairBeta pb = pair_beta(x, candidates.vector(c), region, options);
    rep.betas(static_cast<Eigen::Index>(c)) = pb.beta;
    rep.iterations += pb.tests;
    if (pb.beta < rep.beta) {
      rep.beta = pb.beta;
      rep.worst = c;
      rep.witness = pb.witness;
    }
  }
  rep.value = beta_to_distortion(rep.beta);
  return rep;
}

inline DistortionReport instance_distortion_candidate(std::size_t c, const CandidateSet& candidates,
                                                      FeasibleRegion& region, const DistortionOptions& options = {}) {
  if (c >= candidates.size()) throw std::out_of_range("candidate index out of range");
  return instance_distortion_point(candidates.vector(c), candidates, region, options);
}

inline DistortionReport instance_distortion_lottery(const Lottery& lottery, const CandidateSet& candidates,
                                                    FeasibleRegion& region, const DistortionOptions& options = {}) {
  return instance_distortion_point(lottery.mean_point(candidates), candidates, region, options);
}

/// For each challenger c in index order, minimizes <point - beta * c, v_bar>;
/// returns the first witness whose value falls below -violation.
inline std::optional<Vector> separation_oracle(const Vector& point, double beta, FeasibleRegion& region,
                                               const CandidateSet& candidates, const DistortionOptions& options = {}) {
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const FeasibleRegion::Minimum m = region.minimize(point - beta * candidates.vector(c));
    if (m.value < -options.violation) return m.witness;
  }
  return std::nullopt;
}

namespace detail {

inline double best_welfare_rate(const CandidateSet& candidates, const Vector& vbar) {
  return (candidates.vectors() * vbar).maxCoeff();
}

}  // namespace detail

struct DeterministicResult {
  std::size_t winner = 0;
  DistortionReport report;
};

/// Column generation over average-voter witnesses. For candidate k the master
///   max beta  s.t.  <c_k, v> >= beta * max_c <c, v>  for v in the witness set
/// has a closed form; separation adds the most violating witness until none
/// remains. Witnesses are shared across candidates, and a candidate whose
/// master bound cannot beat the incumbent is dropped early.
inline DeterministicResult optimal_deterministic(const CandidateSet& candidates, FeasibleRegion& region,
                                                 const DistortionOptions& options = {}) {
  const std::size_t m = candidates.size();
  std::vector<Vector> witnesses{region.feasible_point()};
  auto master = [&](std::size_t k) {
    double beta = 1.0;
    for (const Vector& v : witnesses) {
      const double top = detail::best_welfare_rate(candidates, v);
      if (top > 0.0) beta = std::min(beta, candidates.vector(k).dot(v) / top);
    }
    return std::max(beta, 0.0);
  };

  DeterministicResult out;
  out.report.epsilon = options.epsilon;
  out.report.betas = Vector::Zero(static_cast<Eigen::Index>(m));
  double best = -1.0;
  std::size_t iterations = 0;
  for (std::size_t k = 0; k < m; ++k) {
    double beta = master(k);
    while (beta > best + 1e-9) {
      poll_deadline();
      if (++iterations > options.max_iterations) {
        throw SolverError("optimal deterministic rule hit the iteration cap; best verified distortion " +
                          std::to_string(beta_to_distortion(std::max(best, 0.0))));
      }
      auto cut = separation_oracle(candidates.vector(k), beta, region, candidates, options);
      if (!cut) break;
      witnesses.push_back(std::move(*cut));
      beta = master(k);
    }
    out.report.betas(static_cast<Eigen::Index>(k)) = beta;
    if (beta > best + 1e-9) {
      best = beta;
      out.winner = k;
    }
  }
  // Final figures come from the full evaluator so they match the candidate report.
  const DistortionReport exact = instance_distortion_candidate(out.winner, candidates, region, options);
  out.report.value = exact.value;
  out.report.beta = exact.beta;
  out.report.witness = exact.witness;
  out.report.worst = exact.worst;
  out.report.iterations = iterations;
  return out;
}

struct RandomizedResult {
  Lottery lottery;
  DistortionReport report;
  double master_beta = 1.0;
};

/// Column generation for the randomized optimum: the master LP over (p, beta)
///   max beta  s.t.  sum_i p_i <c_i, v> - beta * max_c <c, v> >= 0  for v in the witness set,
/// grown with every challenger's violating witness each round.
inline RandomizedResult optimal_randomized(const CandidateSet& candidates, FeasibleRegion& region,
                                           const DistortionOptions& options = {}) {
  const std::size_t m = candidates.size();
  lp::LinearProgram prog(m + 1, lp::Sense::maximize);
  prog.objective[m] = 1.0;
  prog.set_bounds(m, 0.0, 1.0);
  std::vector<double> simplex(m + 1, 1.0);
  simplex[m] = 0.0;
  prog.add_constraint(simplex, lp::Relation::equal, 1.0);

  auto cut_row = [&](const Vector& v) {
    const Vector rates = candidates.vectors() * v;
    std::vector<double> row(m + 1);
    for (std::size_t i = 0; i < m; ++i) row[i] = rates(static_cast<Eigen::Index>(i));
    row[m] = -rates.maxCoeff();
    return row;
  };
  prog.add_constraint(cut_row(region.feasible_point()), lp::Relation::greater_equal, 0.0);
  lp::Simplex master(prog);
  lp::LpSolution sol = master.solve();

  std::size_t iterations = 0;
  while (true) {
    poll_deadline();
    if (!sol.optimal()) throw SolverError("randomized master LP failed: " + lp::to_string(sol.status));
    if (++iterations > options.max_iterations) {
      throw SolverError("optimal randomized rule hit the iteration cap");
    }
    Vector p(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) p(static_cast<Eigen::Index>(i)) = std::max(sol.point[i], 0.0);
    p /= p.sum();
    const Vector point = candidates.vectors().transpose() * p;
    const double beta = sol.point[m];
    bool added = false;
    for (std::size_t c = 0; c < m; ++c) {
      const FeasibleRegion::Minimum mn = region.minimize(point - beta * candidates.vector(c));
      if (mn.value < -options.violation) {
        sol = master.add_constraint(cut_row(mn.witness), lp::Relation::greater_equal, 0.0);
        added = true;
        if (!sol.optimal()) break;
      }
    }
    if (!added) {
      RandomizedResult out;
      out.lottery = Lottery::normalized(p);
      out.master_beta = beta;
      out.report = instance_distortion_lottery(out.lottery, candidates, region, options);
      out.report.iterations = iterations;
      return out;
    }
  }
}

/// Max-candidate welfare over the lottery's expected welfare.
inline double empirical_distortion(const Lottery& lottery, const UtilityProfile& utilities) {
  const Vector w = welfares(utilities);
  if (lottery.size() != static_cast<std::size_t>(w.size())) {
    throw std::invalid_argument("lottery length does not match the utility profile");
  }
  const double best = w.maxCoeff();
  const double got = w.dot(lottery.probabilities());
  if (best <= 0.0) return 1.0;
  if (!(got > 0.0)) return kInf;
  return best / got;
}

}  // namespace linchoice

#endif  // LINCHOICE_DISTORTION_HPP
