#ifndef LINCHOICE_PROJECTION_HPP
#define LINCHOICE_PROJECTION_HPP

// Uniform projection rule: the lottery whose mean candidate minimizes
// KL(mu || x) over the candidate hull, mu the uniform vector.
//
// Solved with away-step Frank-Wolfe over the lottery weights. The linear
// oracle scores each candidate by sum_i mu_i c_i / x_i; the Frank-Wolfe gap is
// the best score minus one, so a gap below tolerance is exactly the
// first-order condition sum_i mu_i c_i / x_i <= 1 + tol for every candidate.

#include "linchoice/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace linchoice {

struct ProjectionOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 10000;
};

struct ProjectionResult {
  Lottery lottery;
  Vector point;
  double kl = 0.0;
  double fw_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Coordinates where some candidate is positive; mu is uniform over these.
  std::vector<std::size_t> support;
  /// KL value after every iteration (nonincreasing).
  std::vector<double> kl_history;
};

namespace detail {

struct UniformTarget {
  std::vector<std::size_t> support;
  double weight = 0.0;  // mu_i on the support
};

inline UniformTarget effective_support(const CandidateSet& candidates) {
  UniformTarget t;
  const Matrix& c = candidates.vectors();
  for (Eigen::Index i = 0; i < c.cols(); ++i) {
    if (c.col(i).maxCoeff() > 0.0) t.support.push_back(static_cast<std::size_t>(i));
  }
  t.weight = 1.0 / static_cast<double>(t.support.size());
  return t;
}

inline double kl_from_uniform(const UniformTarget& t, const Vector& x) {
  double kl = 0.0;
  for (std::size_t i : t.support) {
    const double xi = x(static_cast<Eigen::Index>(i));
    if (!(xi > 0.0)) return kInf;
    kl += t.weight * std::log(t.weight / xi);
  }
  return kl;
}

/// sum_i mu_i c_i / x_i for every candidate c.
inline Vector oracle_scores(const UniformTarget& t, const CandidateSet& candidates, const Vector& x) {
  Vector w = Vector::Zero(x.size());
  for (std::size_t i : t.support) w(static_cast<Eigen::Index>(i)) = t.weight / x(static_cast<Eigen::Index>(i));
  return candidates.vectors() * w;
}

// Exact line search of -sum mu_i ln(x_i + g dir_i) over g in [0, g_max].
inline double line_search(const UniformTarget& t, const Vector& x, const Vector& dir, double g_max) {
  double domain = g_max;
  for (std::size_t i : t.support) {
    const auto k = static_cast<Eigen::Index>(i);
    if (dir(k) < 0.0) domain = std::min(domain, -x(k) / dir(k));
  }
  auto slope = [&](double g) {
    double s = 0.0;
    for (std::size_t i : t.support) {
      const auto k = static_cast<Eigen::Index>(i);
      const double xi = x(k) + g * dir(k);
      if (!(xi > 0.0)) return kInf;
      s -= t.weight * dir(k) / xi;
    }
    return s;
  };
  if (domain >= g_max && slope(g_max) <= 0.0) return g_max;
  double lo = 0.0, hi = std::min(domain, g_max);
  for (int it = 0; it < 200 && hi - lo > 1e-17 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) <= 0.0) lo = mid;
    else hi = mid;
  }
  return lo;
}

// Newton direction on the face spanned by the active candidates, from the KKT
// system of  min f(p)  s.t.  sum p = 1  restricted to those candidates.
inline Vector face_newton_direction(const UniformTarget& t, const Matrix& cm, const Vector& p, const Vector& x) {
  std::vector<Eigen::Index> active;
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    if (p(c) > 0.0) active.push_back(c);
  }
  const auto k = static_cast<Eigen::Index>(active.size());
  Matrix cs(k, x.size());
  for (Eigen::Index r = 0; r < k; ++r) cs.row(r) = cm.row(active[static_cast<std::size_t>(r)]);
  Vector dinv = Vector::Zero(x.size()), grad_w = Vector::Zero(x.size());
  for (std::size_t i : t.support) {
    const auto j = static_cast<Eigen::Index>(i);
    dinv(j) = t.weight / (x(j) * x(j));
    grad_w(j) = -t.weight / x(j);
  }
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
  kkt.topLeftCorner(k, k) = cs * dinv.asDiagonal() * cs.transpose();
  kkt.block(0, k, k, 1).setOnes();
  kkt.block(k, 0, 1, k).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs.head(k) = -(cs * grad_w);
  const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  Vector dp = Vector::Zero(p.size());
  for (Eigen::Index r = 0; r < k; ++r) dp(active[static_cast<std::size_t>(r)]) = sol(r);
  return dp;
}

}  // namespace detail

inline ProjectionResult uproj(const CandidateSet& candidates, ProjectionOptions options = {}) {
  const std::size_t m = candidates.size();
  if (m == 0) throw ValidationError("candidate set is empty");
  const detail::UniformTarget target = detail::effective_support(candidates);
  const Matrix& cm = candidates.vectors();

  Vector p = Vector::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m));
  Vector x = cm.transpose() * p;
  ProjectionResult out;
  out.support = target.support;
  double gap = kInf;
  std::size_t it = 0;
  for (; it < options.max_iterations; ++it) {
    const Vector scores = detail::oracle_scores(target, candidates, x);
    Eigen::Index s = 0;
    scores.maxCoeff(&s);
    gap = scores(s) - 1.0;
    if (gap <= options.tolerance) break;

    Eigen::Index a = -1;
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(m); ++c) {
      if (p(c) > 0.0 && (a < 0 || scores(c) < scores(a))) a = c;
    }
    const double away_gap = 1.0 - scores(a);
    Vector dir;
    double g_max;
    const bool toward = gap >= away_gap || p(a) >= 1.0 - 1e-15;
    if (toward) {
      dir = cm.row(s).transpose() - x;
      g_max = 1.0;
    } else {
      dir = x - cm.row(a).transpose();
      g_max = p(a) / (1.0 - p(a));
    }
    const double g = detail::line_search(target, x, dir, g_max);
    if (toward) {
      p *= (1.0 - g);
      p(s) += g;
    } else {
      p *= (1.0 + g);
      p(a) -= g;
      if (g >= g_max) p(a) = 0.0;
    }
    for (Eigen::Index c = 0; c < p.size(); ++c) {
      if (p(c) < 1e-300) p(c) = 0.0;
    }
    p /= p.sum();
    x = cm.transpose() * p;

    // Frank-Wolfe steps settle the active face; Newton steps on that face
    // then converge quickly to the interior optimum.
    if (it % 10 == 9) {
      const Vector dp = detail::face_newton_direction(target, cm, p, x);
      double t_max = 1.0;
      for (Eigen::Index c = 0; c < p.size(); ++c) {
        if (dp(c) < 0.0) t_max = std::min(t_max, -p(c) / dp(c));
      }
      const Vector dx = cm.transpose() * dp;
      if (dp.allFinite() && t_max > 0.0) {
        const double g = detail::line_search(target, x, dx, t_max);
        if (g > 0.0) {
          p += g * dp;
          for (Eigen::Index c = 0; c < p.size(); ++c) {
            if (p(c) < 1e-15) p(c) = 0.0;
          }
          p /= p.sum();
          x = cm.transpose() * p;
        }
      }
    }
    out.kl_history.push_back(detail::kl_from_uniform(target, x));
  }

  // Sparsify, then prefer a single candidate sitting exactly at the optimum.
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    if (p(c) < 1e-12) p(c) = 0.0;
  }
  p /= p.sum();
  x = cm.transpose() * p;
  for (std::size_t c = 0; c < m; ++c) {
    if ((cm.row(static_cast<Eigen::Index>(c)).transpose() - x).cwiseAbs().maxCoeff() <= 1e-9) {
      p = Vector::Zero(static_cast<Eigen::Index>(m));
      p(static_cast<Eigen::Index>(c)) = 1.0;
      x = cm.row(static_cast<Eigen::Index>(c)).transpose();
      break;
    }
  }
  const Vector scores = detail::oracle_scores(target, candidates, x);
  out.fw_gap = scores.maxCoeff() - 1.0;
  out.iterations = it;
  out.converged = out.fw_gap <= options.tolerance;
  out.lottery = Lottery::normalized(p);
  out.point = std::move(x);
  out.kl = detail::kl_from_uniform(target, out.point);
  return out;
}

/// min over voters of v . c_hat.
inline double uproj_welfare_floor(const ProjectionResult& result, const VoterSet& voters) {
  if (voters.dim() != static_cast<std::size_t>(result.point.size())) {
    throw std::invalid_argument("voter dimension does not match the projection");
  }
  return (voters.vectors() * result.point).minCoeff();
}

}  // namespace linchoice

#endif  // LINCHOICE_PROJECTION_HPP
