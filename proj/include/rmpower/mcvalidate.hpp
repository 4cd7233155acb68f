#pragma once

// Monte Carlo check of the analytic power engine.
//
// Each replicate draws a compound-symmetric dataset (unit variance,
// correlation rho) whose fixed-effect pattern has root-mean-square f for the
// tested effect, runs the matching ANOVA F test, and records a rejection when
// p < alpha.
//
// Random streams: replicate r uses a std::mt19937_64 seeded with
// splitmix64(seed ^ splitmix64(r)), and normal variates come from the
// Box-Muller transform of 53-bit uniforms in (0, 1]. Replicates therefore
// do not depend on scheduling, and results are bit-identical for a given
// SimSpec whatever the thread count.

#include <cstdint>
#include <vector>

#include "rmpower/power.hpp"
#include "rmpower/rmanova.hpp"

namespace rmpower::mc {

struct SimSpec {
  TestKind kind = TestKind::WithinTime;
  StudyDesign design;
  EffectSpec eff;
  long replications = 10000;
  std::uint64_t seed = 0x5eed;
};

struct MCPowerEstimate {
  double rejection_rate = 0.0;
  double std_error = 0.0;
  double analytic_power = 0.0;
  double z_discrepancy = 0.0;
  long replications = 0;
  long rejections = 0;
};

/// Cell means mu_kj (g x t) realizing effect size f for `kind`.
std::vector<std::vector<double>> mean_pattern(TestKind kind, const StudyDesign& design, double f);

RMDataset simulate_dataset(const SimSpec& spec, std::uint64_t replicate_index);

/// `threads` = 0 uses the hardware concurrency.
MCPowerEstimate estimate_power_mc(const SimSpec& spec, unsigned threads = 0);

/// Throws Error{InvalidDesign} when the spec cannot be simulated.
void validate_spec(const SimSpec& spec);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rmpower::mc
