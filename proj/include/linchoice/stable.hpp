#ifndef LINCHOICE_STABLE_HPP
#define LINCHOICE_STABLE_HPP

// Stable lotteries over size-k committees: distributions W with
// E|S_c(W)| <= n/k for every challenger c, where S_c(W) is the set of voters
// strictly preferring c to every member of W.
//
// Both modes solve the restricted master LP
//     min t  s.t.  sum_W q_W |S_c(W)| <= n/k + t  (all c),  q in the simplex
// by column generation. Exact mode prices over every committee, so the master
// optimum is the full LP optimum. Heuristic mode seeds the pool with a
// multiplicative-weights adversary and prices with greedy coverage plus swap
// local search. Either way the result is certified by recounting blocking
// voters on the support.

#include "linchoice/lp.hpp"
#include "linchoice/model.hpp"
#include "linchoice/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace linchoice {

using Committee = std::vector<int>;

struct CommitteeLottery {
  std::size_t k = 0;
  std::vector<Committee> committees;
  std::vector<double> probabilities;
  Vector marginals;
  /// E|S_c(W)| per candidate, recounted on the support.
  Vector expected_blocking;
  double max_expected_blocking = 0.0;
  bool exact = false;
  std::size_t iterations = 0;
};

struct StableOptions {
  /// Committee spaces up to this size are priced exhaustively.
  std::uint64_t exact_limit = 200000;
  std::size_t max_iterations = 400;
  std::size_t mw_rounds = 0;  // 0 selects 4 * m
  double certify_slack = 1e-6;
};

/// Number of voters strictly preferring `challenger` to every member of the
/// committee (0 when the challenger sits on the committee).
inline std::size_t blocking_count(const Committee& committee, int challenger, const Profile& profile) {
  if (std::find(committee.begin(), committee.end(), challenger) != committee.end()) return 0;
  const std::size_t m = profile.num_candidates();
  std::size_t count = 0;
  for (std::size_t v = 0; v < profile.num_voters(); ++v) {
    const Preference& pref = profile.voter(v);
    if (pref.is_total()) {
      std::vector<int> pos(m);
      for (std::size_t i = 0; i < m; ++i) pos[static_cast<std::size_t>(pref.ranking[i])] = static_cast<int>(i);
      bool beats = true;
      for (int w : committee) beats = beats && pos[static_cast<std::size_t>(challenger)] < pos[static_cast<std::size_t>(w)];
      if (beats) ++count;
    } else {
      // Strict preference under the transitive closure of the reported pairs.
      std::vector<bool> below(m, false);
      std::vector<int> stack{challenger};
      while (!stack.empty()) {
        const int a = stack.back();
        stack.pop_back();
        for (auto [x, y] : pref.pairs) {
          if (x == a && !below[static_cast<std::size_t>(y)]) {
            below[static_cast<std::size_t>(y)] = true;
            stack.push_back(y);
          }
        }
      }
      bool beats = true;
      for (int w : committee) beats = beats && below[static_cast<std::size_t>(w)];
      if (beats) ++count;
    }
  }
  return count;
}

namespace detail {

inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > cap) return cap + 1;
  }
  return r;
}

/// Positions of every candidate in every voter's total order.
class RankTable {
 public:
  explicit RankTable(const Profile& profile) : n_(profile.num_voters()), m_(profile.num_candidates()) {
    if (!profile.all_total()) throw ValidationError("stable lotteries require total orders");
    order_.resize(n_ * m_);
    pos_.resize(n_ * m_);
    for (std::size_t v = 0; v < n_; ++v) {
      const auto& r = profile.ranking(v);
      for (std::size_t i = 0; i < m_; ++i) {
        order_[v * m_ + i] = r[i];
        pos_[v * m_ + static_cast<std::size_t>(r[i])] = static_cast<int>(i);
      }
    }
  }

  std::size_t voters() const { return n_; }
  std::size_t candidates() const { return m_; }
  int pos(std::size_t v, int c) const { return pos_[v * m_ + static_cast<std::size_t>(c)]; }
  int order(std::size_t v, std::size_t i) const { return order_[v * m_ + i]; }

  int best_position(std::size_t v, const Committee& w) const {
    int best = static_cast<int>(m_);
    for (int c : w) best = std::min(best, pos(v, c));
    return best;
  }

  /// |S_c(W)| for every candidate c.
  std::vector<double> blocking(const Committee& w) const {
    std::vector<double> s(m_, 0.0);
    for (std::size_t v = 0; v < n_; ++v) {
      const int top = best_position(v, w);
      for (int i = 0; i < top; ++i) s[static_cast<std::size_t>(order(v, static_cast<std::size_t>(i)))] += 1.0;
    }
    return s;
  }

  /// sum_c y_c |S_c(W)| via per-voter prefix sums of y along the ranking.
  double weighted_blocking(const Committee& w, const std::vector<double>& prefix) const {
    double total = 0.0;
    for (std::size_t v = 0; v < n_; ++v) total += prefix[v * (m_ + 1) + static_cast<std::size_t>(best_position(v, w))];
    return total;
  }

  std::vector<double> prefix_sums(const std::vector<double>& y) const {
    std::vector<double> prefix(n_ * (m_ + 1), 0.0);
    for (std::size_t v = 0; v < n_; ++v) {
      for (std::size_t i = 0; i < m_; ++i) {
        prefix[v * (m_ + 1) + i + 1] = prefix[v * (m_ + 1) + i] + y[static_cast<std::size_t>(order(v, i))];
      }
    }
    return prefix;
  }

 private:
  std::size_t n_, m_;
  std::vector<int> order_;
  std::vector<int> pos_;
};

/// Greedy minimization of sum_c y_c |S_c(W)| followed by swap local search.
inline Committee greedy_committee(const RankTable& table, const std::vector<double>& y, std::size_t k) {
  const std::size_t n = table.voters(), m = table.candidates();
  const std::vector<double> prefix = table.prefix_sums(y);
  std::vector<int> best_pos(n, static_cast<int>(m));
  std::vector<bool> in(m, false);
  Committee w;
  for (std::size_t step = 0; step < k; ++step) {
    int pick = -1;
    double pick_cost = kInf;
    for (std::size_t c = 0; c < m; ++c) {
      if (in[c]) continue;
      double cost = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        const int p = std::min(best_pos[v], table.pos(v, static_cast<int>(c)));
        cost += prefix[v * (m + 1) + static_cast<std::size_t>(p)];
      }
      if (cost < pick_cost - 1e-12) {
        pick_cost = cost;
        pick = static_cast<int>(c);
      }
    }
    in[static_cast<std::size_t>(pick)] = true;
    w.push_back(pick);
    for (std::size_t v = 0; v < n; ++v) best_pos[v] = std::min(best_pos[v], table.pos(v, pick));
  }
  double cost = table.weighted_blocking(w, prefix);
  for (int sweep = 0; sweep < 50; ++sweep) {
    bool improved = false;
    for (std::size_t slot = 0; slot < w.size(); ++slot) {
      for (std::size_t c = 0; c < m; ++c) {
        if (in[c]) continue;
        const int old = w[slot];
        w[slot] = static_cast<int>(c);
        const double trial = table.weighted_blocking(w, prefix);
        if (trial < cost - 1e-12) {
          cost = trial;
          in[static_cast<std::size_t>(old)] = false;
          in[c] = true;
          improved = true;
        } else {
          w[slot] = old;
        }
      }
    }
    if (!improved) break;
  }
  std::sort(w.begin(), w.end());
  return w;
}

struct MasterResult {
  std::vector<double> q;
  double t = 0.0;
  std::vector<double> y;  // adversary weights on challengers (>= 0)
  double z = 0.0;         // dual of the simplex row
};

inline MasterResult solve_master(const std::vector<std::vector<double>>& columns, std::size_t m, double bound) {
  const std::size_t cols = columns.size();
  lp::LinearProgram prog(cols + 1);
  prog.objective[cols] = 1.0;
  prog.set_bounds(cols, -kInf, kInf);
  for (std::size_t c = 0; c < m; ++c) {
    std::vector<double> row(cols + 1, 0.0);
    for (std::size_t j = 0; j < cols; ++j) row[j] = columns[j][c];
    row[cols] = -1.0;
    prog.add_constraint(std::move(row), lp::Relation::less_equal, bound);
  }
  std::vector<double> simplex(cols + 1, 1.0);
  simplex[cols] = 0.0;
  prog.add_constraint(std::move(simplex), lp::Relation::equal, 1.0);
  const lp::LpSolution sol = lp::solve(prog);
  if (!sol.optimal()) throw SolverError("stable-lottery master LP failed: " + lp::to_string(sol.status));
  MasterResult out;
  out.q.assign(sol.point.begin(), sol.point.begin() + static_cast<long>(cols));
  out.t = sol.point[cols];
  out.y.resize(m);
  for (std::size_t c = 0; c < m; ++c) out.y[c] = std::max(0.0, -sol.duals[c]);
  out.z = sol.duals[m];
  return out;
}

inline void next_combination(Committee& w, std::size_t m) {
  const std::size_t k = w.size();
  std::size_t i = k;
  while (i > 0 && static_cast<std::size_t>(w[i - 1]) == m - k + i - 1) --i;
  if (i == 0) return;
  ++w[i - 1];
  for (std::size_t j = i; j < k; ++j) w[j] = w[j - 1] + 1;
}

}  // namespace detail

/// Recounts E|S_c(W)| for every candidate by direct blocking-count evaluation.
inline Vector recount_expected_blocking(const CommitteeLottery& lottery, const Profile& profile) {
  Vector e = Vector::Zero(static_cast<Eigen::Index>(profile.num_candidates()));
  for (std::size_t j = 0; j < lottery.committees.size(); ++j) {
    for (std::size_t c = 0; c < profile.num_candidates(); ++c) {
      e(static_cast<Eigen::Index>(c)) +=
          lottery.probabilities[j] * static_cast<double>(blocking_count(lottery.committees[j], static_cast<int>(c), profile));
    }
  }
  return e;
}

inline bool certify_stable(const CommitteeLottery& lottery, const Profile& profile, double slack = 1e-6) {
  const double bound = static_cast<double>(profile.num_voters()) / static_cast<double>(lottery.k);
  return recount_expected_blocking(lottery, profile).maxCoeff() <= bound + slack;
}

inline CommitteeLottery stable_lottery(const Profile& profile, std::size_t k, StableOptions options = {}) {
  const std::size_t m = profile.num_candidates();
  const std::size_t n = profile.num_voters();
  if (m == 0 || n == 0) throw ValidationError("profile is empty");
  if (k < 1) throw ValidationError("committee size must be at least 1");
  k = std::min(k, m);
  const detail::RankTable table(profile);
  const double bound = static_cast<double>(n) / static_cast<double>(k);

  const std::uint64_t space = detail::binomial_capped(m, k, options.exact_limit);
  const bool exact = space <= options.exact_limit;

  std::vector<Committee> pool;
  std::vector<std::vector<double>> columns;
  std::set<Committee> seen;
  auto add = [&](Committee w) {
    std::sort(w.begin(), w.end());
    if (!seen.insert(w).second) return false;
    columns.push_back(table.blocking(w));
    pool.push_back(std::move(w));
    return true;
  };

  // Exhaustive table of |S_c(W)| for exact pricing.
  std::vector<Committee> all;
  std::vector<std::vector<double>> all_blocking;
  if (exact) {
    Committee w(k);
    std::iota(w.begin(), w.end(), 0);
    for (std::uint64_t i = 0; i < space; ++i) {
      all.push_back(w);
      all_blocking.push_back(table.blocking(w));
      detail::next_combination(w, m);
    }
  }

  // Seed: multiplicative-weights adversary over challengers with greedy best
  // responses.
  {
    std::vector<double> y(m, 1.0 / static_cast<double>(m));
    const std::size_t rounds = exact ? 1 : (options.mw_rounds ? options.mw_rounds : 4 * m);
    const double eta = std::sqrt(8.0 * std::log(static_cast<double>(std::max<std::size_t>(m, 2))) /
                                 static_cast<double>(std::max<std::size_t>(rounds, 1)));
    for (std::size_t r = 0; r < rounds; ++r) {
      poll_deadline();
      Committee w = detail::greedy_committee(table, y, k);
      const std::vector<double> s = table.blocking(w);
      add(w);
      double total = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        y[c] *= std::exp(eta * s[c] / static_cast<double>(n));
        total += y[c];
      }
      for (double& v : y) v /= total;
    }
  }

  detail::MasterResult master;
  std::size_t it = 0;
  for (; it < options.max_iterations; ++it) {
    poll_deadline();
    master = detail::solve_master(columns, m, bound);
    Committee candidate;
    double reduced = 0.0;
    if (exact) {
      double best = kInf;
      std::size_t arg = 0;
      for (std::size_t j = 0; j < all.size(); ++j) {
        double cost = 0.0;
        for (std::size_t c = 0; c < m; ++c) cost += master.y[c] * all_blocking[j][c];
        if (cost < best) {
          best = cost;
          arg = j;
        }
      }
      candidate = all[arg];
      reduced = best - master.z;
    } else {
      candidate = detail::greedy_committee(table, master.y, k);
      const std::vector<double> s = table.blocking(candidate);
      double cost = 0.0;
      for (std::size_t c = 0; c < m; ++c) cost += master.y[c] * s[c];
      reduced = cost - master.z;
    }
    if (reduced >= -1e-9 || !add(candidate)) break;
  }

  CommitteeLottery out;
  out.k = k;
  out.exact = exact;
  out.iterations = it;
  double total = 0.0;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    if (master.q[j] > 1e-12) {
      out.committees.push_back(pool[j]);
      out.probabilities.push_back(master.q[j]);
      total += master.q[j];
    }
  }
  for (double& p : out.probabilities) p /= total;
  out.marginals = Vector::Zero(static_cast<Eigen::Index>(m));
  out.expected_blocking = Vector::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < out.committees.size(); ++j) {
    for (int c : out.committees[j]) out.marginals(c) += out.probabilities[j];
    const std::vector<double> s = table.blocking(out.committees[j]);
    for (std::size_t c = 0; c < m; ++c) out.expected_blocking(static_cast<Eigen::Index>(c)) += out.probabilities[j] * s[c];
  }
  out.max_expected_blocking = out.expected_blocking.maxCoeff();
  if (out.max_expected_blocking > bound + options.certify_slack) {
    throw SolverError("could not certify a stable lottery: max expected blocking " +
                      std::to_string(out.max_expected_blocking) + " exceeds n/k = " + std::to_string(bound) +
                      (exact ? "" : " (heuristic mode)"));
  }
  return out;
}

inline std::size_t ceil_sqrt(std::size_t d) {
  std::size_t k = 0;
  while (k * k < d) ++k;
  return k;
}

struct StableRuleOptions {
  std::optional<std::size_t> k_override;
  StableOptions stable;
  ProjectionOptions projection;
};

/// Half the mass from the stable lottery's marginals (divided by k = ceil(sqrt d)),
/// half from the uniform projection lottery.
inline Lottery linear_stable_lottery_rule(const Profile& profile, const CandidateSet& candidates,
                                          const StableRuleOptions& options = {}) {
  const std::size_t m = candidates.size();
  if (profile.num_candidates() != m) throw ValidationError("profile and candidate set disagree on m");
  const std::size_t k = std::min(options.k_override.value_or(ceil_sqrt(candidates.dim())), m);
  const CommitteeLottery w = stable_lottery(profile, k, options.stable);
  const ProjectionResult proj = uproj(candidates, options.projection);
  Vector p = w.marginals / (2.0 * static_cast<double>(w.k)) + 0.5 * proj.lottery.probabilities();
  return Lottery::normalized(std::move(p));
}

/// Stable-lottery marginals over committees of size min(2d, m), divided by k.
inline Lottery pure_stable_lottery_rule(const Profile& profile, std::size_t d, const StableRuleOptions& options = {}) {
  const std::size_t m = profile.num_candidates();
  if (d < 1) throw ValidationError("dimension must be at least 1");
  const std::size_t k = std::min(options.k_override.value_or(2 * d), m);
  const CommitteeLottery w = stable_lottery(profile, k, options.stable);
  return Lottery::normalized(w.marginals / static_cast<double>(w.k));
}

}  // namespace linchoice

#endif  // LINCHOICE_STABLE_HPP
