#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gecko/engine.hpp"
#include "gecko/pulse_model.hpp"

namespace gecko {

/// Protocol settings for the multi-seed smoothing comparison: solve at a
/// coarse segment count, refine by 2^rounds, then smooth once per method
/// (level-set smoothing vs. Gaussian baselines of several widths).
struct StudyConfig {
  int seeds = 10;                 // number of random initializations
  std::uint64_t first_seed = 1;   // seeds are first_seed, first_seed+1, ...
  Eigen::Index segments = 10;     // coarse segment count L
  double dt = 1.0;                // coarse segment duration
  int rounds = 5;                 // refinement doublings (final L = L*2^rounds)
  double amplitude = 3.0;         // random-start amplitude scale
  std::vector<double> sigmas = {2.0, 4.0, 8.0};  // Gaussian widths (samples)
  int pad = 32;                   // zero padding for the Gaussian baseline
  GeckoConfig gecko;              // per-round smoothing settings
  RestoreConfig restorer;         // restoration budget (epsilon comes
                                  // from gecko.epsilon in every stage)
};

/// Per-mode power quartiles across seeds for one method and channel.
struct StudyRow {
  std::string method;
  int channel = 0;
  int mode = 0;
  double freq = 0.0;
  double power_p25 = 0.0;
  double power_median = 0.0;
  double power_p75 = 0.0;
};

/// Quartile rows plus bookkeeping of how many seeds survived the pipeline.
struct StudyResult {
  std::vector<StudyRow> rows;
  int requested = 0;
  int succeeded = 0;
  std::vector<std::string> failures;  // one message per skipped seed
};

/// Runs the full study: per seed solve -> refine -> smooth with every
/// method, then aggregates the spectral power per mode into quartiles.
/// Seeds run concurrently; failed seeds are skipped and reported.
StudyResult run_smoothing_study(const HamiltonianSpec& spec,
                                const GateTarget& target,
                                const StudyConfig& cfg);

/// Summary CSV with header
/// method,channel,mode_n,freq_per_time,power_p25,power_median,power_p75.
void write_study_csv(const std::string& path, const StudyResult& result);

}  // namespace gecko
