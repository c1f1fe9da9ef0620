#ifndef LINCHOICE_RULES_HPP
#define LINCHOICE_RULES_HPP

#include "linchoice/model.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace linchoice {

/// Positional scores s1 >= s2 >= ... >= sm >= 0.
class ScoreVector {
 public:
  explicit ScoreVector(std::vector<double> scores) : s_(std::move(scores)) {
    if (s_.empty()) throw ValidationError("score vector is empty");
    for (std::size_t i = 0; i < s_.size(); ++i) {
      if (!(s_[i] >= 0.0)) throw ValidationError("score vector has a negative entry");
      if (i > 0 && s_[i] > s_[i - 1]) throw ValidationError("score vector is not nonincreasing");
    }
    norm_ = 0.0;
    for (double v : s_) norm_ += v;
  }

  static ScoreVector plurality(std::size_t m) {
    std::vector<double> s(m, 0.0);
    s[0] = 1.0;
    return ScoreVector(std::move(s));
  }

  static ScoreVector constant(std::size_t m) { return ScoreVector(std::vector<double>(m, 1.0)); }

  /// s_i = 1/i + H_m/m, whose l1 norm is exactly 2 H_m.
  static ScoreVector harmonic(std::size_t m) {
    const double h = harmonic_number(m);
    std::vector<double> s(m);
    for (std::size_t i = 0; i < m; ++i) s[i] = 1.0 / static_cast<double>(i + 1) + h / static_cast<double>(m);
    ScoreVector out(std::move(s));
    out.norm_ = 2.0 * h;
    return out;
  }

  static double harmonic_number(std::size_t m) {
    double h = 0.0;
    for (std::size_t i = m; i >= 1; --i) h += 1.0 / static_cast<double>(i);
    return h;
  }

  std::size_t size() const { return s_.size(); }
  double operator[](std::size_t i) const { return s_[i]; }
  double norm() const { return norm_; }

 private:
  std::vector<double> s_;
  double norm_ = 0.0;
};

/// Candidate with the most first places; ties go to the lowest index.
inline std::size_t plurality(const Profile& profile) {
  const std::size_t m = profile.num_candidates();
  if (m == 0 || profile.num_voters() == 0) throw ValidationError("profile is empty");
  std::vector<std::size_t> votes(m, 0);
  for (std::size_t v = 0; v < profile.num_voters(); ++v) ++votes[static_cast<std::size_t>(profile.top(v))];
  std::size_t best = 0;
  for (std::size_t c = 1; c < m; ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return best;
}

/// For each coordinate, the first candidate attaining the maximum value there.
inline std::vector<std::size_t> coordinate_maximizers(const CandidateSet& candidates) {
  std::vector<std::size_t> chosen;
  std::vector<bool> in(candidates.size(), false);
  const Matrix& c = candidates.vectors();
  for (Eigen::Index i = 0; i < c.cols(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < c.rows(); ++r) {
      if (c(r, i) > c(best, i)) best = r;
    }
    if (!in[static_cast<std::size_t>(best)]) {
      in[static_cast<std::size_t>(best)] = true;
      chosen.push_back(static_cast<std::size_t>(best));
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

/// Plurality among the per-coordinate maximizers, each voter counting for the
/// restricted candidate it ranks highest.
inline std::size_t max_coordinate_plurality(const Profile& profile, const CandidateSet& candidates) {
  if (profile.num_candidates() != candidates.size()) {
    throw ValidationError("profile and candidate set disagree on the number of candidates");
  }
  if (profile.num_voters() == 0) throw ValidationError("profile is empty");
  const std::vector<std::size_t> hat = coordinate_maximizers(candidates);
  std::vector<bool> subset(candidates.size(), false);
  for (std::size_t c : hat) subset[c] = true;
  std::vector<std::size_t> votes(candidates.size(), 0);
  for (std::size_t v = 0; v < profile.num_voters(); ++v) {
    ++votes[static_cast<std::size_t>(profile.top_among(v, subset))];
  }
  std::size_t best = hat.front();
  for (std::size_t c : hat) {
    if (votes[c] > votes[best]) best = c;
  }
  return best;
}

/// Randomized scoring rule: Pr[c] = score_V(c) / (n * |s|_1).
inline Lottery rsr_lottery(const Profile& profile, const ScoreVector& scores) {
  const std::size_t m = profile.num_candidates();
  const std::size_t n = profile.num_voters();
  if (scores.size() != m) throw ValidationError("score vector length does not match the number of candidates");
  if (!(scores.norm() > 0.0)) throw ValidationError("score vector is identically zero");
  if (n == 0) throw ValidationError("profile is empty");
  Vector total = Vector::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t v = 0; v < n; ++v) {
    const auto& r = profile.ranking(v);
    for (std::size_t pos = 0; pos < m; ++pos) total(r[pos]) += scores[pos];
  }
  Vector p = total / (static_cast<double>(n) * scores.norm());
  // Guard only against last-bit drift; the identity already sums to one.
  return Lottery(p / p.sum());
}

inline Lottery random_dictatorship(const Profile& profile) {
  return rsr_lottery(profile, ScoreVector::plurality(profile.num_candidates()));
}

inline Lottery harmonic_lottery(const Profile& profile) {
  return rsr_lottery(profile, ScoreVector::harmonic(profile.num_candidates()));
}

inline Lottery uniform_lottery(const Profile& profile) { return Lottery::uniform(profile.num_candidates()); }

}  // namespace linchoice

#endif  // LINCHOICE_RULES_HPP
