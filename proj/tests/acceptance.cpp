// Acceptance suite: one PASS/FAIL line per criterion, each checked at its
// stated tolerance and wall-clock budget. Exit status is nonzero if any fail.

#include "linchoice/bench.hpp"

#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace linchoice;
using testing_support::grid_distortion;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

Matrix utilities_of(const Instance& inst) { return inst.voters->vectors() * inst.candidates.vectors().transpose(); }

double welfare_ratio(const Matrix& u, const Vector& p) {
  const Vector w = u.colwise().sum().transpose();
  const double got = w.dot(p);
  return got > 0 ? w.maxCoeff() / got : kInf;
}

GeneratorSpec random_spec(std::size_t n, std::size_t m, std::size_t d, std::uint64_t seed, double alpha = 1.0) {
  GeneratorSpec s;
  s.n = n;
  s.m = m;
  s.d = d;
  s.seed = seed;
  s.dirichlet_alpha = alpha;
  return s;
}

/// Voters strictly preferring c to every committee member, counted from the rankings.
double expected_blocking(const CommitteeLottery& l, const Profile& p, int c) {
  double total = 0.0;
  for (std::size_t w = 0; w < l.committees.size(); ++w) {
    const Committee& W = l.committees[w];
    if (std::find(W.begin(), W.end(), c) != W.end()) continue;
    std::size_t count = 0;
    for (std::size_t v = 0; v < p.num_voters(); ++v) {
      const auto& r = p.voter(v).ranking;
      const auto pos_c = std::find(r.begin(), r.end(), c) - r.begin();
      bool beats = true;
      for (int x : W) beats = beats && pos_c < std::find(r.begin(), r.end(), x) - r.begin();
      count += beats;
    }
    total += l.probabilities[w] * static_cast<double>(count);
  }
  return total;
}

/// Shared suite for the committee criteria: n = 20, d cycling over {4, 9, 16}.
std::vector<Instance> committee_suite() {
  std::vector<Instance> out;
  const std::size_t dims[] = {4, 9, 16};
  for (std::size_t i = 0; i < 50; ++i) out.push_back(generate(random_spec(20, 6 + i % 7, dims[i % 3], 6000 + i)));
  return out;
}

Outcome utility_floor() {
  std::size_t checked = 0;
  double worst = kInf;
  for (std::size_t i = 0; i < 1000; ++i) {
    const std::size_t d = 2 + i % 9, m = 1 + i % 12;
    Instance inst = generate(random_spec(15, m, d, 1000 + i, i % 2 ? 1.0 : 0.3));
    const Matrix u = utilities_of(inst);
    for (Eigen::Index v = 0; v < u.rows(); ++v) {
      worst = std::min(worst, u.row(v).maxCoeff() - 1.0 / static_cast<double>(d));
      ++checked;
    }
  }
  return {worst >= -1e-12, std::to_string(checked) + " voters, min(best - 1/d) = " + fmt(worst)};
}

Outcome projection_guarantee() {
  double worst_welfare = kInf, worst_foc = -kInf;
  for (std::size_t i = 0; i < 200; ++i) {
    const std::size_t d = 2 + i % 9, m = 1 + i % 15, n = 30;
    Instance inst = generate(random_spec(n, m, d, 2000 + i, i % 3 == 0 ? 0.2 : 1.0));
    const ProjectionResult r = uproj(inst.candidates);
    const Matrix u = utilities_of(inst);
    const Vector p = r.lottery.probabilities();
    worst_welfare = std::min(worst_welfare, (u * p).sum() - static_cast<double>(n) / static_cast<double>(d));

    const Matrix& c = inst.candidates.vectors();
    const Vector chat = c.transpose() * p;
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (c.col(j).maxCoeff() > 0) support.push_back(j);
    }
    for (Eigen::Index k = 0; k < c.rows(); ++k) {
      double s = 0.0;
      for (Eigen::Index j : support) s += c(k, j) / chat(j);
      worst_foc = std::max(worst_foc, s / static_cast<double>(support.size()));
    }
  }
  return {worst_welfare >= -1e-6 && worst_foc <= 1.0 + 1e-6,
          "min(welfare - n/d) = " + fmt(worst_welfare) + ", max first-order sum = " + fmt(worst_foc)};
}

Outcome projection_basis() {
  double err = 0.0;
  for (std::size_t d = 1; d <= 12; ++d) {
    const ProjectionResult r = uproj(CandidateSet::basis(d));
    const double mu = 1.0 / static_cast<double>(d);
    err = std::max(err, std::abs(r.kl));
    err = std::max(err, (r.lottery.probabilities().array() - mu).abs().maxCoeff());
    err = std::max(err, (r.point.array() - mu).abs().maxCoeff());
  }
  return {err <= 1e-9, "max deviation over d = 1..12: " + fmt(err)};
}

Outcome plurality_worst() {
  Instance inst = gen_plurality_worstcase(10, 5, 5);
  const std::size_t w = plurality(inst.profile);
  const Matrix u = utilities_of(inst);
  const double value = welfare_ratio(u, Vector::Unit(5, static_cast<Eigen::Index>(w)));
  return {std::abs(value - 21.0) <= 1e-6, "winner " + std::to_string(w) + ", empirical distortion " + fmt(value)};
}

Outcome rd_worst() {
  Instance inst = gen_rd_worstcase(10, 10, 1e-4);
  const Matrix u = utilities_of(inst);
  Vector p = Vector::Zero(10);
  for (std::size_t v = 0; v < inst.profile.num_voters(); ++v) p(inst.profile.voter(v).ranking[0]) += 1.0;
  p /= static_cast<double>(inst.profile.num_voters());
  const double value = welfare_ratio(u, p);
  const double lib = empirical_distortion(random_dictatorship(inst.profile), *inst.utilities);
  return {std::abs(value - 9.0) <= 0.09 && std::abs(lib - value) <= 1e-9,
          "empirical distortion " + fmt(value) + " (library " + fmt(lib) + ")"};
}

Outcome stable_certificate() {
  double worst = -kInf;
  bool all_exact = true;
  std::size_t k_counts[5] = {};
  for (const Instance& inst : committee_suite()) {
    const std::size_t k = ceil_sqrt(inst.candidates.dim());
    ++k_counts[k];
    const CommitteeLottery l = stable_lottery(inst.profile, k);
    all_exact = all_exact && l.exact;
    for (int c = 0; c < static_cast<int>(inst.candidates.size()); ++c) {
      worst = std::max(worst, expected_blocking(l, inst.profile, c) - 20.0 / static_cast<double>(k));
    }
  }
  return {all_exact && worst <= 1e-6, "max(E|S_c(W)| - n/k) = " + fmt(worst) + " over k=2,3,4 counts " +
                                          std::to_string(k_counts[2]) + "," + std::to_string(k_counts[3]) + "," +
                                          std::to_string(k_counts[4]) + (all_exact ? "" : ", some not exact")};
}

Outcome lslr_bound() {
  double worst_margin = -kInf, worst_value = 0.0;
  for (const Instance& inst : committee_suite()) {
    const double d = static_cast<double>(inst.candidates.dim());
    FeasibleRegion region(inst.profile, inst.candidates);
    const Lottery l = linear_stable_lottery_rule(inst.profile, inst.candidates);
    const double value = instance_distortion_lottery(l, inst.candidates, region).value;
    if (value - 2.0 * std::sqrt(d) > worst_margin) {
      worst_margin = value - 2.0 * std::sqrt(d);
      worst_value = value;
    }
  }
  return {worst_margin <= 1e-3,
          "max(distortion - 2 sqrt d) = " + fmt(worst_margin) + " (distortion " + fmt(worst_value) + ")"};
}

Outcome pslr_bound() {
  double worst = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    Instance inst = generate(random_spec(40, 20, 5, 8000 + i));
    const Lottery l = pure_stable_lottery_rule(inst.profile, 5);
    worst = std::max(worst, welfare_ratio(utilities_of(inst), l.probabilities()));
  }
  return {worst <= 20.0, "max empirical distortion " + fmt(worst)};
}

Outcome optimal_vs_grid() {
  constexpr double rel = 0.05, eps = 1e-6;
  std::size_t instances = 0, compared = 0, infinite = 0, order_violations = 0;
  double worst_rel = 0.0;
  std::string worst_case;
  for (std::size_t i = 0; i < 100; ++i) {
    const std::size_t n = 1 + i % 3, m = 2 + (i / 3) % 3, d = 2 + (i / 9) % 2;
    Instance inst = generate(random_spec(n, m, d, 9000 + i));
    if (n > 3 || m > 4 || d > 3) continue;
    ++instances;
    FeasibleRegion region(inst.profile, inst.candidates);
    const auto det = optimal_deterministic(inst.candidates, region);
    const auto rnd = optimal_randomized(inst.candidates, region);
    std::vector<std::pair<Vector, double>> points;
    double best_fixed = kInf;
    for (std::size_t c = 0; c < m; ++c) {
      const double v = instance_distortion_candidate(c, inst.candidates, region).value;
      best_fixed = std::min(best_fixed, v);
      points.emplace_back(inst.candidates.vector(c), v);
    }
    points.emplace_back(rnd.lottery.mean_point(inst.candidates), rnd.report.value);
    auto leq = [&](double a, double b) { return a <= b * (1 + eps) + eps || std::isinf(b); };
    if (!leq(rnd.report.value, det.report.value) || !leq(det.report.value, best_fixed)) ++order_violations;
    for (const auto& [x, lp] : points) {
      const double grid = grid_distortion(inst.profile, inst.candidates, x, 50);
      double err = 0.0;
      if (std::isinf(lp) || std::isinf(grid)) {
        ++infinite;
        err = std::isinf(lp) && std::isinf(grid) ? 0.0 : kInf;
      } else {
        err = std::abs(lp - grid) / lp;
      }
      ++compared;
      if (err > worst_rel) {
        worst_rel = err;
        worst_case = "instance " + std::to_string(i) + " lp " + fmt(lp) + " grid " + fmt(grid);
      }
    }
  }
  std::string detail = std::to_string(instances) + " instances, " + std::to_string(compared) + " values (" +
                       std::to_string(infinite) + " unbounded), max relative error " + fmt(worst_rel) +
                       ", ordering violations " + std::to_string(order_violations);
  if (!worst_case.empty()) detail += "; worst: " + worst_case;
  return {worst_rel <= rel && order_violations == 0 && instances > 0, detail};
}

Outcome symmetric_pair() {
  const CandidateSet c = CandidateSet::basis(2);
  const Profile p = Profile::from_rankings({{0, 1}, {1, 0}});
  FeasibleRegion region(p, c);
  DistortionOptions opt;
  opt.epsilon = 1e-8;
  const double c0 = instance_distortion_candidate(0, c, region, opt).value;
  const double c1 = instance_distortion_candidate(1, c, region, opt).value;
  const auto det = optimal_deterministic(c, region, opt);
  const auto rnd = optimal_randomized(c, region, opt);
  const double g0 = grid_distortion(p, c, c.vector(0), 100);
  const double gr = grid_distortion(p, c, rnd.lottery.mean_point(c), 100);
  const bool ok = std::abs(c0 - 3.0) <= 1e-3 && std::abs(c1 - 3.0) <= 1e-3 && std::abs(det.report.value - 3.0) <= 1e-3 &&
                  std::abs(rnd.report.value - 1.5) <= 1e-3 && std::abs(rnd.lottery[0] - 0.5) <= 1e-3 &&
                  std::abs(g0 - 3.0) <= 1e-3 && std::abs(gr - 1.5) <= 1e-3;
  return {ok, "candidates " + fmt(c0) + ", " + fmt(c1) + "; optimal-det " + fmt(det.report.value) + "; optimal-rand " +
                  fmt(rnd.report.value) + " with (" + fmt(rnd.lottery[0]) + ", " + fmt(rnd.lottery[1]) +
                  "); grid " + fmt(g0) + ", " + fmt(gr)};
}

Outcome randomized_lower_bound() {
  Instance inst = gen_randomized_lb(16, 16, 16);
  FeasibleRegion region(inst.profile, inst.candidates);
  const auto rnd = optimal_randomized(inst.candidates, region);
  // Pigeonhole bound: some group favorite gets at most 1/K; if it is the hidden
  // best, the welfare ratio is at least uw1 / (uw1/K + uw2 (1 - 1/K)).
  const double K = 4.0, d = 16.0;
  const double uw1 = 1.0 / K + (1.0 - 1.0 / K) / d, uw2 = 1.0 / d;
  const double formula = uw1 / (uw1 / K + uw2 * (1.0 - 1.0 / K));
  return {rnd.report.value >= 2.4, "optimal-rand instance distortion " + fmt(rnd.report.value) +
                                       " (construction bound " + fmt(formula) + ")"};
}

Outcome clone_invariance() {
  double worst = 0.0;
  std::size_t moved = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    Instance base = generate(random_spec(12, 4 + i % 4, 2 + i % 3, 12000 + i));
    const std::size_t m = base.candidates.size();
    const std::size_t orig = i % m;
    Instance cloned = gen_clone_test(base, orig);

    const Lottery l = harmonic_lottery(base.profile);
    Vector extended = Vector::Zero(static_cast<Eigen::Index>(m + 1));
    extended.head(static_cast<Eigen::Index>(m)) = l.probabilities();
    FeasibleRegion r0(base.profile, base.candidates), r1(cloned.profile, cloned.candidates);
    const double before = instance_distortion_lottery(l, base.candidates, r0).value;
    const double after = instance_distortion_lottery(Lottery(extended), cloned.candidates, r1).value;
    worst = std::max(worst, std::abs(before - after));

    const std::size_t w0 = max_coordinate_plurality(base.profile, base.candidates);
    const std::size_t w1 = max_coordinate_plurality(cloned.profile, cloned.candidates);
    if ((base.candidates.vector(w0) - cloned.candidates.vector(w1)).cwiseAbs().maxCoeff() > 0) ++moved;
  }
  return {worst <= 1e-3 && moved == 0,
          "max |change| " + fmt(worst) + ", MCP winner embedding changed on " + std::to_string(moved) + " instances"};
}

Outcome dominance_grid() {
  BenchConfig cfg;
  cfg.values = {2, 4, 6, 8, 10};
  cfg.n = 100;
  cfg.m = 25;
  cfg.trials = 20;
  cfg.seed = 2024;
  cfg.timing = false;
  const auto rows = run_bench(cfg);
  constexpr double eps = 1e-3;
  std::map<std::size_t, std::map<std::string, double>> by_instance;
  std::size_t bad_rows = 0, violations = 0;
  for (const auto& r : rows) {
    if (r.status != "ok") ++bad_rows;
    by_instance[r.instance_id][r.rule] = r.instance_distortion;
  }
  for (auto& [id, v] : by_instance) {
    for (const auto& [rule, value] : v) {
      if (v["optimal-rand"] > value + eps) ++violations;
      if (is_deterministic_rule(rule) && v["optimal-det"] > value + eps) ++violations;
    }
  }
  return {bad_rows == 0 && violations == 0 && by_instance.size() == 100,
          std::to_string(by_instance.size()) + " instances, " + std::to_string(rows.size()) + " rows, non-ok rows " +
              std::to_string(bad_rows) + ", dominance violations " + std::to_string(violations)};
}

Outcome harmonic_vs_rd() {
  // All voters rank the good candidate first, followed by m - 1 clones.
  std::vector<double> scaled;
  bool decreasing = true, rd_one = true;
  double prev = 1.0;
  for (std::size_t m : {4, 16, 64, 256, 1024}) {
    std::vector<std::vector<int>> r(10, std::vector<int>(m));
    for (auto& row : r) std::iota(row.begin(), row.end(), 0);
    const Profile p = Profile::from_rankings(r);
    const double h = harmonic_lottery(p)[0];
    rd_one = rd_one && std::abs(random_dictatorship(p)[0] - 1.0) <= 1e-12;
    decreasing = decreasing && h < prev;
    prev = h;
    scaled.push_back(h * std::log(static_cast<double>(m)));
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  const bool theta = *lo > 0.25 && *hi < 1.0;

  std::mt19937_64 rng(14);
  double worst = kInf;
  for (std::size_t i = 0; i < 100; ++i) {
    const std::size_t m = 2 + i % 30, n = 1 + i % 25;
    const Profile p = testing_support::random_profile(rng, n, m);
    const Lottery h = harmonic_lottery(p);
    double hm = 0.0;
    for (std::size_t j = 1; j <= m; ++j) hm += 1.0 / static_cast<double>(j);
    std::vector<double> rd(m, 0.0);
    for (std::size_t v = 0; v < n; ++v) rd[static_cast<std::size_t>(p.voter(v).ranking[0])] += 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < m; ++c) worst = std::min(worst, h[c] - rd[c] / (2.0 * hm));
  }
  return {decreasing && rd_one && theta && worst >= -1e-12,
          "good-candidate mass * ln m in [" + fmt(*lo) + ", " + fmt(*hi) + "], RD mass 1: " + (rd_one ? "yes" : "no") +
              "; min(harmonic - RD/(2H_m)) = " + fmt(worst)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "best-candidate utility floor 1/d", 5, utility_floor},
      {2, "projection lottery welfare and first-order condition", 30, projection_guarantee},
      {3, "projection on basis candidates is exact", 1, projection_basis},
      {4, "plurality worst case n=10 m=5 d=5 equals 21", 1, plurality_worst},
      {5, "random dictatorship worst case d=10 near 9", 1, rd_worst},
      {6, "stable lottery certificate (exact mode)", 60, stable_certificate},
      {7, "linear stable lottery rule within 2 sqrt d", 600, lslr_bound},
      {8, "pure stable lottery rule within 4d", 60, pslr_bound},
      {9, "instance-optimal rules agree with grid oracle", 300, optimal_vs_grid},
      {10, "two-voter symmetric fixture", 1, symmetric_pair},
      {11, "randomized lower-bound instance at least 2.4", 60, randomized_lower_bound},
      {12, "clone invariance", 120, clone_invariance},
      {13, "optimal rules dominate on the synthetic grid", 1800, dominance_grid},
      {14, "harmonic versus random dictatorship", 10, harmonic_vs_rd},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s criterion %2d: %s -- %s [%.2f s / %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
