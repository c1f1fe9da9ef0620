#ifndef LINCHOICE_BENCH_HPP
#define LINCHOICE_BENCH_HPP

// Rule registry and the benchmark grid harness: generate instances over a
// varied parameter, run each rule under a per-rule deadline, and report
// instance and empirical distortion per (instance, rule).

#include "linchoice/distortion.hpp"
#include "linchoice/instances.hpp"
#include "linchoice/io.hpp"
#include "linchoice/projection.hpp"
#include "linchoice/rules.hpp"
#include "linchoice/stable.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace linchoice {

inline const std::vector<std::string>& all_rules() {
  static const std::vector<std::string> rules{"plurality", "mcp",  "rd",   "harmonic",    "uniform",
                                              "uproj",     "lslr", "pslr", "optimal-det", "optimal-rand"};
  return rules;
}

inline bool is_deterministic_rule(const std::string& rule) {
  return rule == "plurality" || rule == "mcp" || rule == "optimal-det";
}

/// Whether the rule reads candidate embeddings (ordinal-only rules do not).
inline bool rule_needs_embeddings(const std::string& rule) {
  return rule == "mcp" || rule == "uproj" || rule == "lslr" || rule == "optimal-det" || rule == "optimal-rand";
}

struct RuleOptions {
  DistortionOptions distortion;
  StableRuleOptions stable;
  std::optional<std::size_t> d;  // pslr dimension when embeddings are absent
};

struct RuleOutput {
  Lottery lottery;
  std::optional<std::size_t> winner;
  /// Present for the optimal rules, which certify their own value.
  std::optional<DistortionReport> report;
};

/// Runs a named rule. `region` is required only by the optimal rules.
inline RuleOutput apply_rule(const std::string& rule, const Profile& profile, const CandidateSet* candidates,
                             FeasibleRegion* region, const RuleOptions& options = {}) {
  const std::size_t m = profile.num_candidates();
  if (rule_needs_embeddings(rule) && !candidates) throw ValidationError("rule '" + rule + "' needs candidate embeddings");
  RuleOutput out;
  auto point = [&](std::size_t w) {
    out.winner = w;
    out.lottery = Lottery::point_mass(m, w);
  };
  if (rule == "plurality") {
    point(plurality(profile));
  } else if (rule == "mcp") {
    point(max_coordinate_plurality(profile, *candidates));
  } else if (rule == "rd") {
    out.lottery = random_dictatorship(profile);
  } else if (rule == "harmonic") {
    out.lottery = harmonic_lottery(profile);
  } else if (rule == "uniform") {
    out.lottery = uniform_lottery(profile);
  } else if (rule == "uproj") {
    out.lottery = uproj(*candidates, options.stable.projection).lottery;
  } else if (rule == "lslr") {
    out.lottery = linear_stable_lottery_rule(profile, *candidates, options.stable);
  } else if (rule == "pslr") {
    const std::size_t d = candidates ? candidates->dim() : options.d.value_or(0);
    if (d == 0) throw ValidationError("rule 'pslr' needs the dimension d");
    out.lottery = pure_stable_lottery_rule(profile, d, options.stable);
  } else if (rule == "optimal-det" || rule == "optimal-rand") {
    if (!region) throw std::invalid_argument("optimal rules need a feasible region");
    if (rule == "optimal-det") {
      auto r = optimal_deterministic(*candidates, *region, options.distortion);
      point(r.winner);
      out.report = r.report;
    } else {
      auto r = optimal_randomized(*candidates, *region, options.distortion);
      out.lottery = r.lottery;
      out.report = r.report;
    }
  } else {
    throw ValidationError("unknown rule '" + rule + "'");
  }
  return out;
}

struct BenchConfig {
  std::string family = "random";
  std::string vary = "d";
  std::vector<std::size_t> values{2, 4, 6, 8, 10};
  std::size_t n = 100, m = 25, d = 4;
  std::size_t trials = 20;
  std::vector<std::string> rules = all_rules();
  std::uint64_t seed = 0;
  double dirichlet_alpha = 1.0;
  std::chrono::milliseconds timeout{120000};
  std::size_t threads = 0;  // 0: LINCHOICE_THREADS or hardware concurrency
  bool include_hull = false;
  bool timing = true;
  RuleOptions rule_options;
};

struct BenchRow {
  std::size_t instance_id = 0;
  std::string family;
  std::size_t n = 0, m = 0, d = 0;
  std::uint64_t seed = 0;
  std::string rule;
  double instance_distortion = kInf;
  double empirical_distortion = kInf;
  double runtime_ms = 0.0;
  std::string status = "ok";
};

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::size_t worker_count(std::size_t requested) {
  std::size_t threads = requested;
  if (threads == 0) {
    if (const char* env = std::getenv("LINCHOICE_THREADS")) {
      try {
        threads = static_cast<std::size_t>(std::stoul(env));
      } catch (const std::exception&) {
        throw ValidationError("LINCHOICE_THREADS must be a positive integer");
      }
    }
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return threads;
}

inline std::vector<GeneratorSpec> bench_specs(const BenchConfig& cfg) {
  if (cfg.vary != "d" && cfg.vary != "n" && cfg.vary != "m") throw ValidationError("--vary must be one of d, n, m");
  std::vector<GeneratorSpec> specs;
  for (std::size_t value : cfg.values) {
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      GeneratorSpec s;
      s.family = cfg.family;
      s.n = cfg.vary == "n" ? value : cfg.n;
      s.m = cfg.vary == "m" ? value : cfg.m;
      s.d = cfg.vary == "d" ? value : cfg.d;
      s.dirichlet_alpha = cfg.dirichlet_alpha;
      s.seed = mix_seed(cfg.seed, specs.size());
      specs.push_back(s);
    }
  }
  return specs;
}

/// Evaluates every configured rule on one instance.
inline std::vector<BenchRow> bench_instance(std::size_t id, const GeneratorSpec& spec, const BenchConfig& cfg) {
  std::vector<BenchRow> rows;
  auto fill = [&](BenchRow& row, const std::string& rule) {
    row.instance_id = id;
    row.family = spec.family;
    row.n = spec.n;
    row.m = spec.m;
    row.d = spec.d;
    row.seed = spec.seed;
    row.rule = rule;
  };
  Instance inst;
  std::optional<FeasibleRegion> region;
  try {
    inst = generate(spec);
    region.emplace(inst.profile, inst.candidates, RegionOptions{cfg.include_hull});
  } catch (const std::exception& e) {
    for (const auto& rule : cfg.rules) {
      BenchRow row;
      fill(row, rule);
      row.status = std::string("error: ") + e.what();
      rows.push_back(row);
    }
    return rows;
  }
  const double eps = cfg.rule_options.distortion.epsilon;
  for (const auto& rule : cfg.rules) {
    BenchRow row;
    fill(row, rule);
    const auto start = std::chrono::steady_clock::now();
    try {
      ScopedDeadline deadline(cfg.timeout);
      RuleOutput out = apply_rule(rule, inst.profile, &inst.candidates, &*region, cfg.rule_options);
      const DistortionReport rep =
          out.report ? *out.report : instance_distortion_lottery(out.lottery, inst.candidates, *region, cfg.rule_options.distortion);
      row.instance_distortion = rep.value;
      if (inst.utilities) row.empirical_distortion = empirical_distortion(out.lottery, *inst.utilities);
      if (row.instance_distortion < 1.0 - eps) {
        row.status = "check-failed: instance distortion below 1";
      } else if (std::isfinite(row.instance_distortion) &&
                 row.empirical_distortion > row.instance_distortion * (1.0 + eps) + eps) {
        row.status = "check-failed: empirical exceeds instance distortion";
      }
    } catch (const TimeoutError&) {
      row.status = "timeout";
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    if (cfg.timing) {
      row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  for (const auto& r : cfg.rules) {
    if (std::find(all_rules().begin(), all_rules().end(), r) == all_rules().end()) {
      throw ValidationError("unknown rule '" + r + "'");
    }
  }
  const std::vector<GeneratorSpec> specs = bench_specs(cfg);
  std::vector<std::vector<BenchRow>> results(specs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) results[i] = bench_instance(i, specs[i], cfg);
  };
  const std::size_t threads = std::min(worker_count(cfg.threads), std::max<std::size_t>(specs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::vector<BenchRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  auto rule_rank = [&](const std::string& r) {
    return std::find(cfg.rules.begin(), cfg.rules.end(), r) - cfg.rules.begin();
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const BenchRow& a, const BenchRow& b) {
    return a.instance_id != b.instance_id ? a.instance_id < b.instance_id : rule_rank(a.rule) < rule_rank(b.rule);
  });
  return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "instance_id,family,n,m,d,seed,rule,instance_distortion,empirical_distortion,runtime_ms,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.instance_id << ',' << r.family << ',' << r.n << ',' << r.m << ',' << r.d << ',' << r.seed << ','
        << r.rule << ',' << format_number(r.instance_distortion) << ',' << format_number(r.empirical_distortion)
        << ',' << format_number(r.runtime_ms) << ',' << status << "\n";
  }
}

}  // namespace linchoice

#endif  // LINCHOICE_BENCH_HPP
