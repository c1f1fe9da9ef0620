#ifndef LINCHOICE_MODEL_HPP
#define LINCHOICE_MODEL_HPP

#include "linchoice/common.hpp"
#include "linchoice/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace linchoice {

inline constexpr double kNormTolerance = 1e-6;

// ---------------------------------------------------------------------------
// Validation of normalized nonnegative vectors.

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks that every entry is nonnegative and every row sums to 1 within 1e-6.
inline ValidationReport validate_rows(const Matrix& rows, const std::string& what = "row") {
  ValidationReport report;
  if (rows.rows() < 1 || rows.cols() < 1) {
    report.violations.push_back(what + " matrix is empty");
    return report;
  }
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      const double v = rows(i, j);
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << what << " " << i << " has a non-finite entry at column " << j;
        report.violations.push_back(os.str());
      } else if (v < 0.0) {
        std::ostringstream os;
        os << what << " " << i << " has a negative entry " << v << " at column " << j;
        report.violations.push_back(os.str());
      }
    }
    const double sum = rows.row(i).sum();
    if (std::abs(sum - 1.0) > kNormTolerance) {
      std::ostringstream os;
      os << what << " " << i << " sums to " << sum;
      report.violations.push_back(os.str());
    }
  }
  return report;
}

inline ValidationReport validate_candidates(const Matrix& vectors) {
  return validate_rows(vectors, "row");
}

enum class Normalization { strict, renormalize };

namespace detail {

inline Matrix checked_rows(Matrix rows, Normalization mode, const char* what) {
  if (mode == Normalization::renormalize) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        if (rows(i, j) < 0.0 && rows(i, j) > -1e-12) rows(i, j) = 0.0;
      }
      const double s = rows.row(i).sum();
      if (s > 0.0) rows.row(i) /= s;
    }
  }
  ValidationReport report = validate_rows(rows, what);
  if (!report.ok()) throw ValidationError(std::string(what) + ": " + report.violations.front());
  return rows;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Domain types.

/// m candidates embedded in the d-simplex, one per row.
class CandidateSet {
 public:
  CandidateSet() = default;
  explicit CandidateSet(Matrix vectors, Normalization mode = Normalization::strict,
                        std::vector<std::string> labels = {})
      : vectors_(detail::checked_rows(std::move(vectors), mode, "candidate")),
        labels_(std::move(labels)) {
    if (!labels_.empty() && labels_.size() != size()) {
      throw ValidationError("candidate labels do not match the number of candidates");
    }
  }

  static CandidateSet basis(std::size_t d) {
    return CandidateSet(Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
  }

  std::size_t size() const { return static_cast<std::size_t>(vectors_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  const Matrix& vectors() const { return vectors_; }
  Vector vector(std::size_t c) const { return vectors_.row(static_cast<Eigen::Index>(c)).transpose(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::string label(std::size_t c) const {
    return labels_.empty() ? "c" + std::to_string(c) : labels_[c];
  }

 private:
  Matrix vectors_;
  std::vector<std::string> labels_;
};

/// n voters in the d-simplex, optionally with convex-combination witnesses
/// (n x m weights) showing each voter lies in the candidate hull.
class VoterSet {
 public:
  VoterSet() = default;
  explicit VoterSet(Matrix vectors, Normalization mode = Normalization::strict,
                    std::optional<Matrix> weights = std::nullopt)
      : vectors_(detail::checked_rows(std::move(vectors), mode, "voter")),
        weights_(std::move(weights)) {
    if (weights_ && weights_->rows() != vectors_.rows()) {
      throw ValidationError("combination weights do not match the number of voters");
    }
  }

  std::size_t size() const { return static_cast<std::size_t>(vectors_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  const Matrix& vectors() const { return vectors_; }
  Vector vector(std::size_t v) const { return vectors_.row(static_cast<Eigen::Index>(v)).transpose(); }
  const std::optional<Matrix>& weights() const { return weights_; }

 private:
  Matrix vectors_;
  std::optional<Matrix> weights_;
};

/// One voter's ordinal report: a total order (most preferred first) or a
/// list of strict pairwise comparisons (a, b) meaning a is preferred to b.
struct Preference {
  std::vector<int> ranking;
  std::vector<std::pair<int, int>> pairs;

  static Preference total(std::vector<int> order) { return {std::move(order), {}}; }
  static Preference partial(std::vector<std::pair<int, int>> p) { return {{}, std::move(p)}; }

  bool is_total() const { return !ranking.empty(); }
  bool operator==(const Preference&) const = default;
};

class Profile {
 public:
  Profile() = default;
  Profile(std::vector<Preference> voters, std::size_t num_candidates)
      : voters_(std::move(voters)), m_(num_candidates) {
    validate();
  }

  static Profile from_rankings(std::vector<std::vector<int>> rankings) {
    std::vector<Preference> prefs;
    prefs.reserve(rankings.size());
    std::size_t m = rankings.empty() ? 0 : rankings.front().size();
    for (auto& r : rankings) prefs.push_back(Preference::total(std::move(r)));
    return Profile(std::move(prefs), m);
  }

  std::size_t num_voters() const { return voters_.size(); }
  std::size_t num_candidates() const { return m_; }
  const std::vector<Preference>& voters() const { return voters_; }
  const Preference& voter(std::size_t v) const { return voters_[v]; }

  bool all_total() const {
    return std::all_of(voters_.begin(), voters_.end(), [](const Preference& p) { return p.is_total(); });
  }

  const std::vector<int>& ranking(std::size_t v) const {
    if (!voters_[v].is_total()) {
      throw ValidationError("voter " + std::to_string(v) + " does not report a total order");
    }
    return voters_[v].ranking;
  }

  /// Comparisons implied by voter v: adjacent pairs of a total order (the rest
  /// follow by transitivity), or the reported pairs verbatim.
  std::vector<std::pair<int, int>> ordinal_pairs(std::size_t v) const {
    const Preference& p = voters_[v];
    if (!p.is_total()) return p.pairs;
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i + 1 < p.ranking.size(); ++i) out.emplace_back(p.ranking[i], p.ranking[i + 1]);
    return out;
  }

  /// The unique most-preferred member of `subset` for voter v. For pair lists
  /// the maximal elements under the transitive closure must be unique.
  int top_among(std::size_t v, const std::vector<bool>& subset) const {
    const Preference& p = voters_[v];
    if (p.is_total()) {
      for (int c : p.ranking) {
        if (subset[static_cast<std::size_t>(c)]) return c;
      }
      throw ValidationError("voter " + std::to_string(v) + " ranks no candidate of the subset");
    }
    const auto closure = transitive_closure(p.pairs);
    int top = -1;
    for (std::size_t c = 0; c < m_; ++c) {
      if (!subset[c]) continue;
      bool dominated = false;
      for (std::size_t o = 0; o < m_ && !dominated; ++o) {
        if (o != c && subset[o] && closure[o * m_ + c]) dominated = true;
      }
      if (dominated) continue;
      if (top >= 0) {
        throw ValidationError("voter " + std::to_string(v) + " has no identifiable top choice");
      }
      top = static_cast<int>(c);
    }
    if (top < 0) throw ValidationError("voter " + std::to_string(v) + " has no identifiable top choice");
    return top;
  }

  int top(std::size_t v) const { return top_among(v, std::vector<bool>(m_, true)); }

  /// Restriction of a total-order profile to a subset, preserving relative order.
  Profile restricted_to(const std::vector<int>& keep) const {
    std::vector<int> position(m_, -1);
    for (std::size_t i = 0; i < keep.size(); ++i) position[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
    std::vector<Preference> out;
    for (std::size_t v = 0; v < voters_.size(); ++v) {
      std::vector<int> r;
      for (int c : ranking(v)) {
        if (position[static_cast<std::size_t>(c)] >= 0) r.push_back(position[static_cast<std::size_t>(c)]);
      }
      out.push_back(Preference::total(std::move(r)));
    }
    return Profile(std::move(out), keep.size());
  }

 private:
  std::vector<bool> transitive_closure(const std::vector<std::pair<int, int>>& pairs) const {
    std::vector<bool> reach(m_ * m_, false);
    for (auto [a, b] : pairs) reach[static_cast<std::size_t>(a) * m_ + static_cast<std::size_t>(b)] = true;
    for (std::size_t k = 0; k < m_; ++k)
      for (std::size_t i = 0; i < m_; ++i)
        if (reach[i * m_ + k])
          for (std::size_t j = 0; j < m_; ++j)
            if (reach[k * m_ + j]) reach[i * m_ + j] = true;
    return reach;
  }

  void validate() const {
    for (std::size_t v = 0; v < voters_.size(); ++v) {
      const Preference& p = voters_[v];
      const std::string who = "voter " + std::to_string(v);
      if (p.is_total()) {
        if (p.ranking.size() != m_) {
          throw ValidationError(who + " ranks " + std::to_string(p.ranking.size()) + " candidates, expected " +
                                std::to_string(m_));
        }
        std::vector<bool> seen(m_, false);
        for (int c : p.ranking) {
          if (c < 0 || static_cast<std::size_t>(c) >= m_ || seen[static_cast<std::size_t>(c)]) {
            throw ValidationError(who + " ranking is not a permutation of the candidates");
          }
          seen[static_cast<std::size_t>(c)] = true;
        }
      } else {
        for (auto [a, b] : p.pairs) {
          if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= m_ || static_cast<std::size_t>(b) >= m_) {
            throw ValidationError(who + " compares an unknown candidate");
          }
          if (a == b) throw ValidationError(who + " compares a candidate with itself");
        }
        const auto closure = transitive_closure(p.pairs);
        for (std::size_t c = 0; c < m_; ++c) {
          if (closure[c * m_ + c]) throw ValidationError(who + " pairwise comparisons contain a cycle");
        }
      }
    }
  }

  std::vector<Preference> voters_;
  std::size_t m_ = 0;
};

/// n x m matrix of utilities u_v(c).
class UtilityProfile {
 public:
  UtilityProfile() = default;
  explicit UtilityProfile(Matrix utilities) : u_(std::move(utilities)) {
    for (Eigen::Index i = 0; i < u_.rows(); ++i)
      for (Eigen::Index j = 0; j < u_.cols(); ++j)
        if (!(u_(i, j) >= 0.0)) {
          throw ValidationError("utility (" + std::to_string(i) + ", " + std::to_string(j) + ") is negative or NaN");
        }
  }

  std::size_t num_voters() const { return static_cast<std::size_t>(u_.rows()); }
  std::size_t num_candidates() const { return static_cast<std::size_t>(u_.cols()); }
  const Matrix& matrix() const { return u_; }
  double operator()(std::size_t v, std::size_t c) const {
    return u_(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(c));
  }

 private:
  Matrix u_;
};

class Lottery {
 public:
  Lottery() = default;
  explicit Lottery(Vector probabilities) : p_(std::move(probabilities)) {
    if (p_.size() == 0) throw ValidationError("lottery is empty");
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
      if (!(p_(i) >= 0.0)) throw ValidationError("lottery entry " + std::to_string(i) + " is negative");
    }
    if (std::abs(p_.sum() - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "lottery sums to " << p_.sum();
      throw ValidationError(os.str());
    }
  }

  /// Clamps round-off negatives and rescales to sum one.
  static Lottery normalized(Vector weights) {
    for (Eigen::Index i = 0; i < weights.size(); ++i) weights(i) = std::max(weights(i), 0.0);
    const double s = weights.sum();
    if (!(s > 0.0)) throw ValidationError("lottery weights sum to zero");
    return Lottery(weights / s);
  }

  static Lottery point_mass(std::size_t m, std::size_t c) {
    Vector p = Vector::Zero(static_cast<Eigen::Index>(m));
    p(static_cast<Eigen::Index>(c)) = 1.0;
    return Lottery(std::move(p));
  }

  static Lottery uniform(std::size_t m) {
    return Lottery(Vector::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m)));
  }

  std::size_t size() const { return static_cast<std::size_t>(p_.size()); }
  const Vector& probabilities() const { return p_; }
  double operator[](std::size_t c) const { return p_(static_cast<Eigen::Index>(c)); }

  /// The lottery-weighted mean candidate vector.
  Vector mean_point(const CandidateSet& candidates) const {
    if (size() != candidates.size()) throw std::invalid_argument("lottery length does not match candidates");
    return candidates.vectors().transpose() * p_;
  }

 private:
  Vector p_;
};

/// One experimental unit.
struct Instance {
  CandidateSet candidates;
  std::optional<VoterSet> voters;
  Profile profile;
  std::optional<UtilityProfile> utilities;
  std::optional<std::uint64_t> seed;
  std::string family = "custom";
};

// ---------------------------------------------------------------------------
// Utility and welfare arithmetic.

inline double utility(const Vector& voter, const Vector& candidate) {
  if (voter.size() != candidate.size()) {
    throw std::invalid_argument("dimension mismatch: voter has " + std::to_string(voter.size()) +
                                " coordinates, candidate has " + std::to_string(candidate.size()));
  }
  return voter.dot(candidate);
}

inline UtilityProfile compute_utilities(const VoterSet& voters, const CandidateSet& candidates) {
  if (voters.dim() != candidates.dim()) throw std::invalid_argument("voter/candidate dimension mismatch");
  Matrix u = voters.vectors() * candidates.vectors().transpose();
  // Products of nonnegative vectors can only go negative through round-off.
  u = u.cwiseMax(0.0);
  return UtilityProfile(std::move(u));
}

inline double welfare(const UtilityProfile& utilities, std::size_t candidate) {
  if (candidate >= utilities.num_candidates()) {
    throw std::out_of_range("candidate index " + std::to_string(candidate) + " out of range");
  }
  return utilities.matrix().col(static_cast<Eigen::Index>(candidate)).sum();
}

inline Vector welfares(const UtilityProfile& utilities) {
  return utilities.matrix().colwise().sum().transpose();
}

inline double expected_welfare(const UtilityProfile& utilities, const Lottery& lottery) {
  if (lottery.size() != utilities.num_candidates()) {
    throw std::invalid_argument("lottery length does not match the number of candidates");
  }
  return welfares(utilities).dot(lottery.probabilities());
}

/// Sorts each voter's candidates by utility, descending; equal utilities are
/// ordered by ascending candidate index.
inline Profile utilities_to_profile(const UtilityProfile& utilities) {
  const std::size_t m = utilities.num_candidates();
  std::vector<Preference> prefs;
  prefs.reserve(utilities.num_voters());
  for (std::size_t v = 0; v < utilities.num_voters(); ++v) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return utilities(v, static_cast<std::size_t>(a)) > utilities(v, static_cast<std::size_t>(b));
    });
    prefs.push_back(Preference::total(std::move(order)));
  }
  return Profile(std::move(prefs), m);
}

/// Whether `utilities` agrees with every reported comparison (weakly, so ties
/// are consistent with either order).
inline bool consistent_with(const UtilityProfile& utilities, const Profile& profile, double tol = 1e-12) {
  if (utilities.num_voters() != profile.num_voters()) return false;
  for (std::size_t v = 0; v < profile.num_voters(); ++v) {
    for (auto [a, b] : profile.ordinal_pairs(v)) {
      if (utilities(v, static_cast<std::size_t>(a)) < utilities(v, static_cast<std::size_t>(b)) - tol) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Convex hull membership and the favorite-utility floor.

/// LP membership test: is there lambda in the m-simplex with C^T lambda = v
/// (coordinatewise within `tol`)? Returns the weights when there is.
inline std::optional<Vector> hull_weights(const Vector& v, const CandidateSet& candidates, double tol = 1e-9) {
  const std::size_t m = candidates.size();
  const std::size_t d = candidates.dim();
  lp::LinearProgram prog(m);
  prog.add_constraint(std::vector<double>(m, 1.0), lp::Relation::equal, 1.0);
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> row(m);
    for (std::size_t c = 0; c < m; ++c) row[c] = candidates.vectors()(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i));
    prog.add_constraint(row, lp::Relation::less_equal, v(static_cast<Eigen::Index>(i)) + tol);
    prog.add_constraint(std::move(row), lp::Relation::greater_equal, v(static_cast<Eigen::Index>(i)) - tol);
  }
  const lp::LpSolution sol = lp::solve(prog);
  if (!sol.optimal()) return std::nullopt;
  return Eigen::Map<const Vector>(sol.point.data(), static_cast<Eigen::Index>(m));
}

/// Verifies that every voter lies in the candidate hull, using the stored
/// witnesses when present and an LP membership test otherwise.
inline ValidationReport check_expressiveness(const VoterSet& voters, const CandidateSet& candidates) {
  ValidationReport report;
  if (voters.dim() != candidates.dim()) {
    report.violations.push_back("voter/candidate dimension mismatch");
    return report;
  }
  const auto& w = voters.weights();
  for (std::size_t v = 0; v < voters.size(); ++v) {
    const Vector x = voters.vector(v);
    bool ok = false;
    if (w && static_cast<std::size_t>(w->cols()) == candidates.size()) {
      const Vector lambda = w->row(static_cast<Eigen::Index>(v)).transpose();
      const bool simplex = (lambda.array() >= -1e-12).all() && std::abs(lambda.sum() - 1.0) <= kNormTolerance;
      ok = simplex && (candidates.vectors().transpose() * lambda - x).cwiseAbs().maxCoeff() <= kNormTolerance;
    }
    if (!ok) ok = hull_weights(x, candidates, 1e-9).has_value();
    if (!ok) report.violations.push_back("voter " + std::to_string(v) + " lies outside the candidate convex hull");
  }
  return report;
}

/// min over voters of max over candidates of v.c. For voters in the candidate
/// hull the result is at least 1/d.
inline double min_favorite_utility(const VoterSet& voters, const CandidateSet& candidates,
                                   bool check_hull = true) {
  if (check_hull) {
    const ValidationReport report = check_expressiveness(voters, candidates);
    if (!report.ok()) throw ValidationError("expressiveness violated: " + report.violations.front());
  }
  const Matrix u = voters.vectors() * candidates.vectors().transpose();
  return u.rowwise().maxCoeff().minCoeff();
}

}  // namespace linchoice

#endif  // LINCHOICE_MODEL_HPP
