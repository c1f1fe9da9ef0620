// Generates one random instance and prints each rule's lottery support,
// instance distortion, and empirical distortion side by side.

#include "linchoice/bench.hpp"

#include <cstdio>
#include <cstdlib>

using namespace linchoice;

int main(int argc, char** argv) {
  GeneratorSpec spec;
  spec.n = 40;
  spec.m = 8;
  spec.d = argc > 1 ? static_cast<std::size_t>(std::atoi(argv[1])) : 4;
  spec.seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
  try {
    Instance inst = generate(spec);
    FeasibleRegion region(inst.profile, inst.candidates);
    std::printf("random instance: n=%zu m=%zu d=%zu seed=%llu\n\n", spec.n, spec.m, spec.d,
                static_cast<unsigned long long>(spec.seed));
    std::printf("%-13s %8s %10s %10s\n", "rule", "support", "instance", "empirical");
    for (const auto& rule : all_rules()) {
      RuleOutput out = apply_rule(rule, inst.profile, &inst.candidates, &region);
      const double inst_d = out.report ? out.report->value
                                       : instance_distortion_lottery(out.lottery, inst.candidates, region).value;
      std::size_t support = 0;
      for (std::size_t c = 0; c < out.lottery.size(); ++c) support += out.lottery[c] > 1e-9;
      std::printf("%-13s %8zu %10.4f %10.4f\n", rule.c_str(), support, inst_d,
                  empirical_distortion(out.lottery, *inst.utilities));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
