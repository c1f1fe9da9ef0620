#ifndef LINCHOICE_INSTANCES_HPP
#define LINCHOICE_INSTANCES_HPP

// Instance generators: a random synthetic family, the worst-case constructions
// behind the plurality / random-dictatorship / randomized lower bounds, clone
// insertion, and ratings-matrix ingestion by masked NMF.

#include "linchoice/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace linchoice {

struct GeneratorSpec {
  std::string family = "random";
  std::size_t n = 10;
  std::size_t m = 5;
  std::size_t d = 3;
  std::uint64_t seed = 0;
  double dirichlet_alpha = 1.0;
  double epsilon_tiebreak = 1e-4;
  std::size_t k_star = 0;       // randomized-lb: which group's favorite is the hidden best
  bool literal_center = false;  // plurality-worst: put c_0 at mu rather than off the e_1 axis
};

namespace detail {

inline Vector dirichlet(std::mt19937_64& rng, std::size_t k, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Vector v(static_cast<Eigen::Index>(k));
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gamma(rng);
    const double s = v.sum();
    if (s > 0.0 && std::isfinite(s)) return v / s;
  }
  throw ValidationError("Dirichlet sampling underflowed; increase alpha");
}

inline Matrix utility_matrix(const Matrix& voters, const Matrix& candidates) { return voters * candidates.transpose(); }

inline Instance assemble(CandidateSet candidates, VoterSet voters, std::optional<Profile> profile, std::string family,
                         std::optional<std::uint64_t> seed) {
  UtilityProfile u(utility_matrix(voters.vectors(), candidates.vectors()));
  Profile p = profile ? std::move(*profile) : utilities_to_profile(u);
  return Instance{std::move(candidates), std::move(voters), std::move(p), std::move(u), seed, std::move(family)};
}

}  // namespace detail

/// Dirichlet(alpha) candidates; voters are Dirichlet(1) convex combinations of
/// candidates (weights kept as expressiveness witnesses).
inline Instance gen_random(const GeneratorSpec& spec) {
  if (spec.n < 1 || spec.m < 1 || spec.d < 1) throw ValidationError("n, m and d must be at least 1");
  if (!(spec.dirichlet_alpha > 0.0)) throw ValidationError("dirichlet_alpha must be positive");
  std::mt19937_64 rng(spec.seed);
  const auto m = static_cast<Eigen::Index>(spec.m), n = static_cast<Eigen::Index>(spec.n);
  Matrix cand(m, static_cast<Eigen::Index>(spec.d));
  for (Eigen::Index c = 0; c < m; ++c) cand.row(c) = detail::dirichlet(rng, spec.d, spec.dirichlet_alpha).transpose();
  Matrix weights(n, m);
  for (Eigen::Index v = 0; v < n; ++v) weights.row(v) = detail::dirichlet(rng, spec.m, 1.0).transpose();
  Matrix vot = weights * cand;
  for (Eigen::Index v = 0; v < n; ++v) vot.row(v) /= vot.row(v).sum();
  return detail::assemble(CandidateSet(cand), VoterSet(vot, Normalization::strict, weights), std::nullopt, "random",
                          spec.seed);
}

/// Plurality lower-bound construction: a centrist candidate c_0 backed by a
/// small group of voters at mu, and m-1 copies of e_1 splitting everyone else.
///
/// With c_0 = mu every voter values c_0 at exactly 1/d, so the e_1 voters would
/// contribute to its welfare too. By default c_0 is instead uniform on
/// coordinates 2..d: mu voters still value it at 1/d, e_1 voters at 0, and mu
/// stays in the candidate hull, which yields the ratio (n - g + g/d) / (g/d)
/// for a backing group of size g.
inline Instance gen_plurality_worstcase(std::size_t n, std::size_t m, std::size_t d, bool literal_center = false) {
  if (n < 4 || m < 3 || d < 2) throw ValidationError("plurality-worst requires n >= 4, m >= 3, d >= 2");
  std::size_t group = 2;
  if (n < m) {
    if (m % n != 0) throw ValidationError("plurality-worst with n < m requires n to divide m");
    group = m / n + 1;
    if (group >= n) throw ValidationError("plurality-worst with n < m requires m/n + 1 < n");
  } else if (n - group > group * (m - 1)) {
    throw ValidationError("plurality-worst requires n - 2 <= 2(m - 1) so that c_0 keeps the plurality");
  }
  const auto md = static_cast<Eigen::Index>(m), dd = static_cast<Eigen::Index>(d);
  Matrix cand = Matrix::Zero(md, dd);
  if (literal_center) {
    cand.row(0).setConstant(1.0 / static_cast<double>(d));
  } else {
    cand.row(0).tail(dd - 1).setConstant(1.0 / static_cast<double>(d - 1));
  }
  for (Eigen::Index c = 1; c < md; ++c) cand(c, 0) = 1.0;

  Matrix vot = Matrix::Zero(static_cast<Eigen::Index>(n), dd);
  std::vector<std::vector<int>> rankings;
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<int> r;
    if (v < group) {
      vot.row(static_cast<Eigen::Index>(v)).setConstant(1.0 / static_cast<double>(d));
      for (int c = 0; c < static_cast<int>(m); ++c) r.push_back(c);
    } else {
      vot(static_cast<Eigen::Index>(v), 0) = 1.0;
      const int top = 1 + static_cast<int>((v - group) % (m - 1));
      r.push_back(top);
      for (int c = 1; c < static_cast<int>(m); ++c) {
        if (c != top) r.push_back(c);
      }
      r.push_back(0);
    }
    rankings.push_back(std::move(r));
  }
  return detail::assemble(CandidateSet(cand), VoterSet(vot), Profile::from_rankings(rankings), "plurality-worst",
                          std::nullopt);
}

/// Random-dictatorship lower bound: basis candidates, d-1 groups with voters at
/// e_i (1/2 + eps) + e_d (1/2 - eps), so group i ranks c_i > c_d > rest.
inline Instance gen_rd_worstcase(std::size_t d, std::size_t group_size, double epsilon = 1e-4) {
  if (d < 2) throw ValidationError("rd-worst requires d >= 2");
  if (!(epsilon > 0.0 && epsilon < 0.1)) throw ValidationError("rd-worst requires epsilon in (0, 0.1)");
  if (group_size < 1) throw ValidationError("rd-worst requires a positive group size");
  const std::size_t n = group_size * (d - 1);
  Matrix vot = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t v = 0; v < n; ++v) {
    const auto i = static_cast<Eigen::Index>(v / group_size);
    vot(static_cast<Eigen::Index>(v), i) = 0.5 + epsilon;
    vot(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(d - 1)) = 0.5 - epsilon;
  }
  return detail::assemble(CandidateSet::basis(d), VoterSet(vot), std::nullopt, "rd-worst", std::nullopt);
}

/// Randomized lower bound: K = ceil(sqrt d) equal groups, group k ranking c_k
/// first. Candidate k < K sits at e_k, candidates K..d-1 at e_K..e_{d-1} and
/// the rest at e_1; the hidden best c_{k*} swaps embeddings with c_0 so it sits
/// at e_0, where its group's voters live. Everyone else is at mu.
inline Instance gen_randomized_lb(std::size_t n, std::size_t d, std::size_t m, std::size_t k_star = 0) {
  std::size_t groups = 0;
  while (groups * groups < d) ++groups;
  if (d < 1 || m < d) throw ValidationError("randomized-lb requires m >= d >= 1");
  if (n == 0 || n % groups != 0) throw ValidationError("randomized-lb requires ceil(sqrt d) to divide n");
  if (k_star >= groups) throw ValidationError("randomized-lb requires k* < ceil(sqrt d)");
  const auto dd = static_cast<Eigen::Index>(d);
  Matrix cand = Matrix::Zero(static_cast<Eigen::Index>(m), dd);
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t axis = c < d ? c : (d > 1 ? 1 : 0);
    cand(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(axis)) = 1.0;
  }
  if (k_star != 0) cand.row(0).swap(cand.row(static_cast<Eigen::Index>(k_star)));

  const std::size_t per = n / groups;
  Matrix vot(static_cast<Eigen::Index>(n), dd);
  std::vector<std::vector<int>> rankings;
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t g = v / per;
    if (g == k_star) {
      vot.row(static_cast<Eigen::Index>(v)) = Vector::Unit(dd, 0).transpose();
    } else {
      vot.row(static_cast<Eigen::Index>(v)).setConstant(1.0 / static_cast<double>(d));
    }
    std::vector<int> r{static_cast<int>(g)};
    for (int c = 0; c < static_cast<int>(m); ++c) {
      if (c != static_cast<int>(g)) r.push_back(c);
    }
    rankings.push_back(std::move(r));
  }
  return detail::assemble(CandidateSet(cand), VoterSet(vot), Profile::from_rankings(rankings), "randomized-lb",
                          std::nullopt);
}

/// Appends an exact copy of `candidate` ranked directly below it by every voter.
inline Instance gen_clone_test(const Instance& base, std::size_t candidate) {
  const std::size_t m = base.candidates.size();
  if (candidate >= m) throw ValidationError("clone candidate index out of range");
  const auto clone = static_cast<int>(m);
  const int orig = static_cast<int>(candidate);

  Matrix cand(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(base.candidates.dim()));
  cand << base.candidates.vectors(), base.candidates.vectors().row(orig);
  std::vector<std::string> labels = base.candidates.labels();
  if (!labels.empty()) labels.push_back(labels[candidate] + "'");

  std::vector<Preference> prefs;
  for (std::size_t v = 0; v < base.profile.num_voters(); ++v) {
    const Preference& p = base.profile.voter(v);
    if (p.is_total()) {
      std::vector<int> r;
      for (int c : p.ranking) {
        r.push_back(c);
        if (c == orig) r.push_back(clone);
      }
      prefs.push_back(Preference::total(std::move(r)));
    } else {
      std::vector<std::pair<int, int>> pairs = p.pairs;
      for (auto [a, b] : p.pairs) {
        if (a == orig) pairs.emplace_back(clone, b);
      }
      pairs.emplace_back(orig, clone);
      prefs.push_back(Preference::partial(std::move(pairs)));
    }
  }

  Instance out{CandidateSet(cand, Normalization::strict, labels), base.voters, Profile(std::move(prefs), m + 1),
               std::nullopt, base.seed, "clone-test"};
  if (base.voters && base.voters->weights()) {
    const Matrix& w = *base.voters->weights();
    Matrix w2(w.rows(), w.cols() + 1);
    w2 << w, Vector::Zero(w.rows());
    out.voters = VoterSet(base.voters->vectors(), Normalization::strict, w2);
  }
  if (base.utilities) {
    const Matrix& u = base.utilities->matrix();
    Matrix u2(u.rows(), u.cols() + 1);
    u2 << u, u.col(orig);
    out.utilities = UtilityProfile(u2);
  }
  return out;
}

struct IngestOptions {
  std::size_t d = 3;
  std::size_t iterations = 500;
  std::uint64_t seed = 0;
};

struct IngestResult {
  Instance instance;
  /// Masked Frobenius reconstruction error after every update.
  std::vector<double> error_history;
  /// Voters outside the candidate hull (expressiveness is reported, not enforced).
  std::vector<std::size_t> outside_hull;
};

/// Masked nonnegative matrix factorization R ~ W H by multiplicative updates;
/// missing entries are NaN and drop out of numerators and denominators alike.
inline IngestResult ingest_ratings(const Matrix& ratings, const IngestOptions& options = {}) {
  const Eigen::Index n = ratings.rows(), m = ratings.cols();
  const auto d = static_cast<Eigen::Index>(options.d);
  if (n == 0 || m == 0) throw ValidationError("ratings matrix is empty");
  if (d < 1) throw ValidationError("d must be at least 1");
  Matrix mask = Matrix::Zero(n, m), r = Matrix::Zero(n, m);
  std::size_t observed = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double x = ratings(i, j);
      if (std::isnan(x)) continue;
      if (x < 0.0 || !std::isfinite(x)) throw ValidationError("ratings must be nonnegative and finite");
      mask(i, j) = 1.0;
      r(i, j) = x;
      ++observed;
    }
  }
  if (observed == 0) throw ValidationError("ratings matrix has no observed entries");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> init(0.1, 1.0);
  Matrix w(n, d), h(d, m);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = init(rng);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = init(rng);

  constexpr double tiny = 1e-12;
  IngestResult out;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    Matrix approx = mask.cwiseProduct(w * h);
    w = w.cwiseProduct((r * h.transpose()).cwiseQuotient((approx * h.transpose()).array().max(tiny).matrix()));
    approx = mask.cwiseProduct(w * h);
    h = h.cwiseProduct((w.transpose() * r).cwiseQuotient((w.transpose() * approx).array().max(tiny).matrix()));
    out.error_history.push_back((mask.cwiseProduct(w * h) - r).norm());
  }

  Matrix cand = h.transpose();
  for (Eigen::Index c = 0; c < m; ++c) {
    const double s = cand.row(c).sum();
    if (!(s > 0.0)) throw ValidationError("candidate " + std::to_string(c) + " factorized to a zero row");
    cand.row(c) /= s;
  }
  for (Eigen::Index v = 0; v < n; ++v) {
    const double s = w.row(v).sum();
    if (!(s > 0.0)) throw ValidationError("voter " + std::to_string(v) + " factorized to a zero row");
    w.row(v) /= s;
  }
  CandidateSet candidates(cand);
  VoterSet voters(w);
  for (Eigen::Index v = 0; v < n; ++v) {
    if (!hull_weights(voters.vectors().row(v).transpose(), candidates)) out.outside_hull.push_back(static_cast<std::size_t>(v));
  }
  out.instance = detail::assemble(std::move(candidates), std::move(voters), std::nullopt, "ingest", options.seed);
  return out;
}

inline Instance generate(const GeneratorSpec& spec) {
  if (spec.family == "random") return gen_random(spec);
  if (spec.family == "plurality-worst") return gen_plurality_worstcase(spec.n, spec.m, spec.d, spec.literal_center);
  if (spec.family == "rd-worst") {
    if (spec.d < 2 || spec.n % (spec.d - 1) != 0) throw ValidationError("rd-worst requires d - 1 to divide n");
    return gen_rd_worstcase(spec.d, spec.n / (spec.d - 1), spec.epsilon_tiebreak);
  }
  if (spec.family == "randomized-lb") return gen_randomized_lb(spec.n, spec.d, spec.m, spec.k_star);
  if (spec.family == "clone-test") {
    GeneratorSpec base = spec;
    base.family = "random";
    Instance inst = gen_clone_test(gen_random(base), spec.k_star % spec.m);
    inst.seed = spec.seed;
    return inst;
  }
  throw ValidationError("unknown family '" + spec.family + "'");
}

}  // namespace linchoice

#endif  // LINCHOICE_INSTANCES_HPP
