#pragma once
// Verification suites. Each returns a SuiteReport of named checks; the CLI
// and the acceptance runner both build on these.

#include <cstdint>
#include <string>
#include <vector>

#include "klab/report.hpp"

namespace klab {

struct SuiteOptions {
  std::uint64_t seed = 42;
  int psd_trials = 10000;
  int quadratic_trials = 1000;
  int flow_grid = 2048;
  int harnack_m = 1;
  int harnack_grid = 129;
  int harnack_trials = 100;  // random trials, and trials per seed set of the ratio probe
  double lambda = 1.0;
  double Lambda = 4.0;
  double R = 1.0;
};

SuiteReport suite_hermitian(const SuiteOptions& o);
SuiteReport suite_density(const SuiteOptions& o);
SuiteReport suite_mean_convexity(const SuiteOptions& o);
SuiteReport suite_harmonic_map(const SuiteOptions& o);
SuiteReport suite_heatflow(const SuiteOptions& o);
SuiteReport suite_krflow(const SuiteOptions& o);
SuiteReport suite_lichnerowicz(const SuiteOptions& o);
SuiteReport suite_hermitian_einstein(const SuiteOptions& o);
SuiteReport suite_lyh(const SuiteOptions& o);
SuiteReport suite_soliton(const SuiteOptions& o);
SuiteReport suite_parabolic(const SuiteOptions& o);
SuiteReport suite_harnack(const SuiteOptions& o);

// Suite names in run order; run_suite throws InputError for unknown names.
const std::vector<std::string>& suite_names();
SuiteReport run_suite(const std::string& name, const SuiteOptions& o);

// Single runs used by the subcommands.

// Theta(x, r) of a curve tag at the given radii, with a (r, theta, err) series
// and the monotonicity check.
SuiteReport density_run(const std::string& curve, const std::vector<double>& center, const std::vector<double>& radii,
                        double tol);

// Scan of one LYH kind on a named fixture, with a (t, min) series.
//   heat-kernel-equality, flat, cigar, cigar-ancient, cigar-bump, cigar-real,
//   line-kernel, two-kernels, torus, expanding-soliton
SuiteReport lyh_run(const std::string& kind, const std::string& fixture, double tol);
const std::vector<std::string>& lyh_fixtures();

// Harnack ratio probe with a (trial, ratio) series.
SuiteReport harnack_probe_run(int m, int n, double lambda, double Lambda, double R, int trials, std::uint64_t seed);

}  // namespace klab
