// linchoice command-line interface.
//
// Exit status: 0 success, 1 domain error (validation, realizability, solver),
// 2 usage or I/O error.

#include "linchoice/bench.hpp"
#include "linchoice/io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace linchoice;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Inputs {
  std::string candidates, voters, profile, utilities;
  bool renormalize = false;
};

void add_inputs(CLI::App* cmd, Inputs& in, bool with_voters = false) {
  cmd->add_option("--candidates", in.candidates, "candidates.csv (header f1,...,fd)");
  cmd->add_option("--profile", in.profile, "profile.jsonl");
  if (with_voters) {
    cmd->add_option("--voters", in.voters, "voters.csv (header f1,...,fd)");
    cmd->add_option("--utilities", in.utilities, "utilities.csv (header c0,...)");
  }
  cmd->add_flag("--renormalize", in.renormalize, "rescale rows to sum to one instead of rejecting them");
}

Normalization mode(const Inputs& in) { return in.renormalize ? Normalization::renormalize : Normalization::strict; }

std::optional<CandidateSet> load_candidates(const Inputs& in) {
  if (in.candidates.empty()) return std::nullopt;
  return CandidateSet(read_vectors_csv(in.candidates), mode(in));
}

Profile load_profile(const Inputs& in, const std::optional<CandidateSet>& c) {
  if (in.profile.empty()) throw UsageError("--profile is required");
  return read_profile_jsonl(in.profile, c ? std::optional<std::size_t>(c->size()) : std::nullopt);
}

CandidateSet require_candidates(const Inputs& in, const std::string& why) {
  auto c = load_candidates(in);
  if (!c) throw UsageError("--candidates is required " + why);
  return *c;
}

json report_json(const DistortionReport& r, const CandidateSet& c) {
  json j;
  j["value"] = number_json(r.value);
  j["beta"] = r.beta;
  j["witness"] = std::vector<double>(r.witness.data(), r.witness.data() + r.witness.size());
  j["worst_challenger"] = r.worst;
  j["worst_label"] = c.label(r.worst);
  j["betas"] = std::vector<double>(r.betas.data(), r.betas.data() + r.betas.size());
  j["iterations"] = r.iterations;
  j["epsilon"] = r.epsilon;
  return j;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voting rules and distortion under linear utilities"};
  app.require_subcommand(1);

  // validate
  Inputs val_in;
  bool val_hull = false;
  auto* validate = app.add_subcommand("validate", "check input files against the model invariants");
  add_inputs(validate, val_in, true);
  validate->add_flag("--check-hull", val_hull, "verify voters lie in the candidate convex hull");

  // elect
  Inputs el_in;
  std::string el_rule = "plurality";
  auto* elect = app.add_subcommand("elect", "run a deterministic rule");
  add_inputs(elect, el_in);
  elect->add_option("--rule", el_rule, "plurality | mcp")->check(CLI::IsMember({"plurality", "mcp"}));

  // lottery
  Inputs lo_in;
  std::string lo_rule = "rd";
  std::optional<std::size_t> lo_d, lo_k;
  double lo_tol = 1e-8;
  std::uint64_t lo_seed = 0;
  auto* lottery = app.add_subcommand("lottery", "run a randomized rule");
  add_inputs(lottery, lo_in);
  lottery->add_option("--rule", lo_rule, "rd | harmonic | uniform | uproj | lslr | pslr")
      ->check(CLI::IsMember({"rd", "harmonic", "uniform", "uproj", "lslr", "pslr"}));
  lottery->add_option("--d", lo_d, "dimension for pslr when no candidates are given");
  lottery->add_option("--k-override", lo_k, "committee size for lslr/pslr");
  lottery->add_option("--tolerance", lo_tol, "uproj Frank-Wolfe tolerance");
  lottery->add_option("--seed", lo_seed, "seed (all current rules are deterministic)");

  // distortion
  Inputs di_in;
  std::optional<std::size_t> di_winner;
  std::string di_lottery, di_rule;
  double di_eps = 1e-6;
  bool di_hull = false;
  auto* distortion = app.add_subcommand("distortion", "instance distortion of a candidate, lottery, or rule");
  add_inputs(distortion, di_in);
  auto* w_opt = distortion->add_option("--winner", di_winner, "candidate index");
  auto* l_opt = distortion->add_option("--lottery", di_lottery, "lottery JSON file");
  auto* r_opt = distortion->add_option("--rule", di_rule, "rule name");
  w_opt->excludes(l_opt)->excludes(r_opt);
  l_opt->excludes(r_opt);
  distortion->add_option("--epsilon", di_eps, "binary-search precision on beta");
  distortion->add_flag("--include-hull", di_hull, "restrict voters to the candidate hull");

  // optimal
  Inputs op_in;
  std::string op_mode = "det";
  double op_eps = 1e-6;
  bool op_hull = false;
  auto* optimal = app.add_subcommand("optimal", "instance-optimal deterministic or randomized rule");
  add_inputs(optimal, op_in);
  optimal->add_option("--mode", op_mode, "det | rand")->check(CLI::IsMember({"det", "rand"}));
  optimal->add_option("--epsilon", op_eps, "precision on beta");
  optimal->add_flag("--include-hull", op_hull, "restrict voters to the candidate hull");

  // empirical
  Inputs em_in;
  std::optional<std::size_t> em_winner;
  std::string em_lottery, em_rule;
  auto* empirical = app.add_subcommand("empirical", "distortion against the true utilities");
  add_inputs(empirical, em_in, true);
  auto* ew = empirical->add_option("--winner", em_winner, "candidate index");
  auto* el = empirical->add_option("--lottery", em_lottery, "lottery JSON file");
  auto* er = empirical->add_option("--rule", em_rule, "rule name (needs --profile)");
  ew->excludes(el)->excludes(er);
  el->excludes(er);

  // gen
  GeneratorSpec gen_spec;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate an instance");
  gen->add_option("--family", gen_spec.family, "random | plurality-worst | rd-worst | randomized-lb | clone-test")
      ->check(CLI::IsMember({"random", "plurality-worst", "rd-worst", "randomized-lb", "clone-test"}));
  gen->add_option("--n", gen_spec.n, "voters");
  gen->add_option("--m", gen_spec.m, "candidates");
  gen->add_option("--d", gen_spec.d, "dimension");
  gen->add_option("--seed", gen_spec.seed, "random seed");
  gen->add_option("--alpha", gen_spec.dirichlet_alpha, "Dirichlet concentration for candidates");
  gen->add_option("--epsilon", gen_spec.epsilon_tiebreak, "rd-worst tie-break perturbation");
  gen->add_option("--k-star", gen_spec.k_star, "randomized-lb hidden group; clone-test cloned candidate");
  gen->add_flag("--literal-center", gen_spec.literal_center, "plurality-worst: c_0 = mu");
  gen->add_option("--out", gen_out, "output directory")->required();

  // ingest
  std::string in_ratings, in_out;
  IngestOptions in_opt;
  auto* ingest = app.add_subcommand("ingest", "factorize a ratings matrix into an instance");
  ingest->add_option("--ratings", in_ratings, "ratings.csv (header c0,...; empty cells missing)")->required();
  ingest->add_option("--d", in_opt.d, "embedding dimension")->required();
  ingest->add_option("--iterations", in_opt.iterations, "multiplicative-update iterations");
  ingest->add_option("--seed", in_opt.seed, "factor initialization seed");
  ingest->add_option("--out", in_out, "output directory")->required();

  // bench
  BenchConfig bc;
  std::string bench_values = "2,4,6,8,10", bench_rules = "all", bench_out;
  double bench_timeout_s = 120.0;
  bool no_timing = false;
  auto* bench = app.add_subcommand("bench", "run an experiment grid and write CSV");
  bench->add_option("--family", bc.family, "generator family");
  bench->add_option("--vary", bc.vary, "d | n | m")->check(CLI::IsMember({"d", "n", "m"}));
  bench->add_option("--values", bench_values, "comma-separated values of the varied parameter");
  bench->add_option("--n", bc.n, "voters");
  bench->add_option("--m", bc.m, "candidates");
  bench->add_option("--d", bc.d, "dimension");
  bench->add_option("--trials", bc.trials, "instances per value");
  bench->add_option("--rules", bench_rules, "comma-separated rules or 'all'");
  bench->add_option("--seed", bc.seed, "base seed");
  bench->add_option("--timeout", bench_timeout_s, "seconds per rule per instance");
  bench->add_option("--threads", bc.threads, "worker threads (default: LINCHOICE_THREADS or all cores)");
  bench->add_option("--epsilon", bc.rule_options.distortion.epsilon, "precision on beta");
  bench->add_flag("--include-hull", bc.include_hull, "restrict voters to the candidate hull");
  bench->add_flag("--no-timing", no_timing, "write runtime_ms as 0 so reruns are byte-identical");
  bench->add_option("--out", bench_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      json j;
      std::vector<std::string> problems;
      std::optional<CandidateSet> c;
      std::optional<Matrix> raw_c;
      if (!val_in.candidates.empty()) {
        raw_c = read_vectors_csv(val_in.candidates);
        for (auto& v : validate_candidates(*raw_c).violations) problems.push_back("candidates: " + v);
        if (problems.empty() || val_in.renormalize) c = CandidateSet(*raw_c, mode(val_in));
      }
      std::optional<VoterSet> voters;
      if (!val_in.voters.empty()) {
        Matrix raw = read_vectors_csv(val_in.voters);
        auto rep = validate_rows(raw, "voter");
        for (auto& v : rep.violations) problems.push_back("voters: " + v);
        if (rep.ok() || val_in.renormalize) voters = VoterSet(raw, mode(val_in));
      }
      std::optional<Profile> profile;
      if (!val_in.profile.empty()) {
        try {
          profile = read_profile_jsonl(val_in.profile, c ? std::optional<std::size_t>(c->size()) : std::nullopt);
        } catch (const ValidationError& e) {
          problems.push_back(std::string("profile: ") + e.what());
        }
      }
      if (c && voters) {
        if (voters->dim() != c->dim()) problems.push_back("voters and candidates have different dimensions");
        else if (val_hull) {
          for (auto& v : check_expressiveness(*voters, *c).violations) problems.push_back("expressiveness: " + v);
        }
      }
      if (!val_in.utilities.empty()) {
        try {
          UtilityProfile u(read_utilities_csv(val_in.utilities));
          if (profile && !consistent_with(u, *profile)) problems.push_back("utilities disagree with the profile");
          if (c && voters && voters->dim() == c->dim() &&
              (compute_utilities(*voters, *c).matrix() - u.matrix()).cwiseAbs().maxCoeff() > 1e-9) {
            problems.push_back("utilities are not the voter/candidate inner products");
          }
        } catch (const ValidationError& e) {
          problems.push_back(std::string("utilities: ") + e.what());
        }
      }
      j["ok"] = problems.empty();
      j["violations"] = problems;
      print(j);
      return problems.empty() ? 0 : 1;
    }

    if (*elect) {
      auto c = load_candidates(el_in);
      if (el_rule == "mcp" && !c) throw UsageError("--rule mcp requires --candidates");
      Profile p = load_profile(el_in, c);
      const std::size_t w = el_rule == "mcp" ? max_coordinate_plurality(p, *c) : plurality(p);
      print(json{{"rule", el_rule}, {"winner", w}, {"label", c ? c->label(w) : "c" + std::to_string(w)}});
      return 0;
    }

    if (*lottery) {
      auto c = load_candidates(lo_in);
      if (rule_needs_embeddings(lo_rule) && !c) throw UsageError("--rule " + lo_rule + " requires --candidates");
      if (lo_rule == "uproj") {
        ProjectionOptions opt;
        opt.tolerance = lo_tol;
        auto r = uproj(*c, opt);
        print(json{{"rule", "uproj"},
                   {"lottery", lottery_json(r.lottery)},
                   {"point", std::vector<double>(r.point.data(), r.point.data() + r.point.size())},
                   {"kl", r.kl},
                   {"gap", r.fw_gap},
                   {"converged", r.converged}});
        return 0;
      }
      Profile p = load_profile(lo_in, c);
      RuleOptions opt;
      opt.d = lo_d;
      opt.stable.k_override = lo_k;
      opt.stable.projection.tolerance = lo_tol;
      if (lo_rule == "pslr" && !c && !lo_d) throw UsageError("--rule pslr requires --d or --candidates");
      RuleOutput out = apply_rule(lo_rule, p, c ? &*c : nullptr, nullptr, opt);
      print(json{{"rule", lo_rule}, {"lottery", lottery_json(out.lottery)}});
      return 0;
    }

    if (*distortion) {
      CandidateSet c = require_candidates(di_in, "for distortion");
      Profile p = load_profile(di_in, c);
      FeasibleRegion region(p, c, RegionOptions{di_hull});
      DistortionOptions opt;
      opt.epsilon = di_eps;
      json j;
      DistortionReport rep;
      if (di_winner) {
        rep = instance_distortion_candidate(*di_winner, c, region, opt);
        j["winner"] = *di_winner;
      } else if (!di_lottery.empty()) {
        rep = instance_distortion_lottery(read_lottery_json(di_lottery), c, region, opt);
      } else if (!di_rule.empty()) {
        RuleOptions ro;
        ro.distortion = opt;
        RuleOutput out = apply_rule(di_rule, p, &c, &region, ro);
        rep = out.report ? *out.report : instance_distortion_lottery(out.lottery, c, region, opt);
        j["rule"] = di_rule;
        j["lottery"] = lottery_json(out.lottery);
      } else {
        throw UsageError("one of --winner, --lottery, --rule is required");
      }
      j["report"] = report_json(rep, c);
      print(j);
      return 0;
    }

    if (*optimal) {
      CandidateSet c = require_candidates(op_in, "for optimal");
      Profile p = load_profile(op_in, c);
      FeasibleRegion region(p, c, RegionOptions{op_hull});
      DistortionOptions opt;
      opt.epsilon = op_eps;
      if (op_mode == "det") {
        auto r = optimal_deterministic(c, region, opt);
        print(json{{"mode", "det"}, {"winner", r.winner}, {"label", c.label(r.winner)}, {"report", report_json(r.report, c)}});
      } else {
        auto r = optimal_randomized(c, region, opt);
        print(json{{"mode", "rand"}, {"lottery", lottery_json(r.lottery)}, {"report", report_json(r.report, c)}});
      }
      return 0;
    }

    if (*empirical) {
      if (em_in.utilities.empty()) throw UsageError("--utilities is required");
      UtilityProfile u(read_utilities_csv(em_in.utilities));
      const std::size_t m = u.num_candidates();
      Lottery l;
      if (em_winner) {
        if (*em_winner >= m) throw ValidationError("winner index out of range");
        l = Lottery::point_mass(m, *em_winner);
      } else if (!em_lottery.empty()) {
        l = read_lottery_json(em_lottery);
      } else if (!em_rule.empty()) {
        auto c = load_candidates(em_in);
        Profile p = load_profile(em_in, c);
        std::optional<FeasibleRegion> region;
        if (em_rule == "optimal-det" || em_rule == "optimal-rand") {
          if (!c) throw UsageError("--rule " + em_rule + " requires --candidates");
          region.emplace(p, *c);
        }
        if (rule_needs_embeddings(em_rule) && !c) throw UsageError("--rule " + em_rule + " requires --candidates");
        l = apply_rule(em_rule, p, c ? &*c : nullptr, region ? &*region : nullptr).lottery;
      } else {
        throw UsageError("one of --winner, --lottery, --rule is required");
      }
      const double value = empirical_distortion(l, u);
      json j{{"value", number_json(value)}, {"expected_welfare", expected_welfare(u, l)}};
      if (std::isinf(value)) j["note"] = "the lottery has zero expected welfare while some candidate has positive welfare";
      print(j);
      return 0;
    }

    if (*gen) {
      Instance inst = generate(gen_spec);
      json meta{{"generator", gen_spec.family}, {"seed", gen_spec.seed}, {"dirichlet_alpha", gen_spec.dirichlet_alpha},
                {"epsilon_tiebreak", gen_spec.epsilon_tiebreak}, {"k_star", gen_spec.k_star},
                {"literal_center", gen_spec.literal_center}};
      write_instance(gen_out, inst, meta);
      print(json{{"out", gen_out}, {"n", inst.profile.num_voters()}, {"m", inst.candidates.size()}, {"d", inst.candidates.dim()}});
      return 0;
    }

    if (*ingest) {
      IngestResult r = ingest_ratings(read_ratings_csv(in_ratings), in_opt);
      json meta{{"source", in_ratings}, {"iterations", in_opt.iterations},
                {"final_error", r.error_history.empty() ? 0.0 : r.error_history.back()},
                {"voters_outside_hull", r.outside_hull}};
      write_instance(in_out, r.instance, meta);
      print(meta);
      return 0;
    }

    if (*bench) {
      bc.values.clear();
      for (const auto& v : split_list(bench_values)) {
        try {
          bc.values.push_back(static_cast<std::size_t>(std::stoul(v)));
        } catch (const std::exception&) {
          throw UsageError("--values must be comma-separated integers");
        }
      }
      if (bench_rules != "all") bc.rules = split_list(bench_rules);
      bc.timeout = std::chrono::milliseconds(static_cast<long long>(bench_timeout_s * 1000));
      bc.timing = !no_timing;
      const auto rows = run_bench(bc);
      if (bench_out.empty()) {
        write_bench_csv(std::cout, rows);
      } else {
        std::ofstream out(bench_out);
        if (!out) throw IoError("cannot write '" + bench_out + "'");
        write_bench_csv(out, rows);
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RealizabilityError& e) {
    std::cerr << "realizability error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
