#pragma once

// Randomized soundness check of theorem3_bound against dense-grid sups.
// Polynomial trials are 1D on B_1(0); trig-exponential trials are 2D mode
// sums on B_1(c). Each trial draws its own stream from the master seed.

#include "nullctl/analytic_smallness.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nullctl::smallness {

enum class Family { polynomial, trig_exponential };

std::string family_name(Family f);

struct HarnessOptions {
  int trials = 1000;
  double trig_fraction = 0.3;  // trial i is trig when (i mod 10) < 10 * fraction
  int max_degree = 12;
  int max_modes = 3;
  std::uint64_t seed = 1;
  int sup_points_1d = 20001;  // true sup on [-1/2, 1/2]
  int sup_points_2d = 201;    // per axis, true sup on the disk of radius 1/2
  Theorem3Options theorem3;
};

struct TrialRecord {
  int trial = 0;
  Family family = Family::polynomial;
  double measE = 0.0;
  double epsE = 0.0;  // sampled sup of |f| on E
  double bound = 0.0;
  double true_sup = 0.0;
  double margin = 0.0;  // bound - true_sup
};

Family trial_family(const HarnessOptions& options, int trial);

TrialRecord run_trial(const HarnessOptions& options, int trial);

/// All trials in parallel; records are ordered by trial index.
std::vector<TrialRecord> falsification_harness(const HarnessOptions& options);

/// Header trial,family,measE,epsE,bound,true_sup,margin.
void write_harness_csv(std::ostream& out, const std::vector<TrialRecord>& records);

}  // namespace nullctl::smallness
