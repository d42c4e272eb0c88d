#include "gecko/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include "gecko/detail/format.hpp"
#include "gecko/errors.hpp"
#include "gecko/quality.hpp"
#include "gecko/restorer.hpp"

namespace gecko {

namespace {

void check_study_config(const StudyConfig& cfg) {
  if (cfg.seeds < 1) throw InputError("the study needs at least one seed");
  if (cfg.segments < 1)
    throw InputError("the coarse pulse needs at least one segment");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
    throw InputError("segment duration must be positive and finite");
  if (cfg.rounds < 0)
    throw InputError("the number of refinement rounds must be non-negative");
  if (!(cfg.amplitude >= 0.0) || !std::isfinite(cfg.amplitude))
    throw InputError("the start amplitude must be non-negative and finite");
  for (double sigma : cfg.sigmas)
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw InputError("Gaussian widths must be positive and finite");
  if (cfg.pad < 0) throw InputError("padding must be non-negative");
}

std::vector<std::string> method_names(const StudyConfig& cfg) {
  std::vector<std::string> names = {"gecko"};
  for (double sigma : cfg.sigmas)
    names.push_back("gauss_sigma" + detail::fmt_real(sigma));
  return names;
}

// Squared sine-transform coefficients per channel: column k holds the
// spectral power of channel k over modes 1..L.
Eigen::MatrixXd power_spectrum(const PulseParams& pulse) {
  Eigen::MatrixXd power(pulse.segments(), pulse.channels());
  for (Eigen::Index k = 0; k < pulse.channels(); ++k)
    power.col(k) = dst1_forward(pulse.phi.col(k)).array().square();
  return power;
}

struct SeedOutcome {
  bool ok = false;
  std::string error;
  std::vector<Eigen::MatrixXd> powers;  // one spectrum per method
};

SeedOutcome run_one_seed(const HamiltonianSpec& spec, const GateTarget& target,
                         const StudyConfig& cfg, std::uint64_t seed) {
  SeedOutcome out;
  // One epsilon governs the fidelity constraint in every stage.
  RestoreConfig restorer = cfg.restorer;
  restorer.epsilon = cfg.gecko.epsilon;
  try {
    const PulseParams start = random_pulse(
        spec, static_cast<int>(cfg.segments), cfg.dt, cfg.amplitude, seed);
    const PulseParams solved = restore(spec, start, target, restorer);

    const GeckoTrace smoothed = refine_and_smooth(
        spec, solved, target, cfg.rounds, cfg.gecko, cfg.restorer);
    out.powers.push_back(power_spectrum(smoothed.pulse));

    const int factor = 1 << cfg.rounds;
    const PulseParams refined =
        factor > 1 ? refine_pulse(solved, factor) : solved;
    for (double sigma : cfg.sigmas) {
      const PulseParams blurred = gaussian_baseline(refined, sigma, cfg.pad);
      const PulseParams back = restore(spec, blurred, target, restorer);
      out.powers.push_back(power_spectrum(back));
    }
    out.ok = true;
  } catch (const Error& err) {
    out.error = err.what();
  }
  return out;
}

// Linearly interpolated quantile of an unsorted sample.
double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

StudyResult run_smoothing_study(const HamiltonianSpec& spec,
                                const GateTarget& target,
                                const StudyConfig& cfg) {
  check_study_config(cfg);
  const std::vector<std::string> methods = method_names(cfg);

  std::vector<std::future<SeedOutcome>> futures;
  futures.reserve(static_cast<std::size_t>(cfg.seeds));
  for (int i = 0; i < cfg.seeds; ++i)
    futures.push_back(std::async(std::launch::async, run_one_seed,
                                 std::cref(spec), std::cref(target),
                                 std::cref(cfg), cfg.first_seed + i));

  StudyResult result;
  result.requested = cfg.seeds;
  std::vector<SeedOutcome> kept;
  for (int i = 0; i < cfg.seeds; ++i) {
    SeedOutcome outcome = futures[static_cast<std::size_t>(i)].get();
    if (outcome.ok) {
      kept.push_back(std::move(outcome));
    } else {
      result.failures.push_back("seed " +
                                std::to_string(cfg.first_seed + i) +
                                " skipped: " + outcome.error);
    }
  }
  result.succeeded = static_cast<int>(kept.size());
  if (kept.empty()) return result;

  const Eigen::Index length = kept.front().powers.front().rows();
  const Eigen::Index channels = kept.front().powers.front().cols();
  const double dt_fine = cfg.dt / static_cast<double>(1 << cfg.rounds);
  std::vector<double> sample(kept.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (Eigen::Index k = 0; k < channels; ++k) {
      for (Eigen::Index n = 0; n < length; ++n) {
        for (std::size_t s = 0; s < kept.size(); ++s)
          sample[s] = kept[s].powers[m](n, k);
        StudyRow row;
        row.method = methods[m];
        row.channel = static_cast<int>(k);
        row.mode = static_cast<int>(n) + 1;
        row.freq = dst1_frequency(n + 1, length, dt_fine);
        row.power_p25 = quantile(sample, 0.25);
        row.power_median = quantile(sample, 0.5);
        row.power_p75 = quantile(sample, 0.75);
        result.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

void write_study_csv(const std::string& path, const StudyResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out << "method,channel,mode_n,freq_per_time,power_p25,power_median,"
         "power_p75\n";
  for (const StudyRow& row : result.rows) {
    out << row.method << ',' << row.channel << ',' << row.mode << ','
        << detail::fmt_real(row.freq) << ',' << detail::fmt_real(row.power_p25)
        << ',' << detail::fmt_real(row.power_median) << ','
        << detail::fmt_real(row.power_p75) << '\n';
  }
  if (!out.flush()) throw FormatError("failed writing '" + path + "'");
}

}  // namespace gecko
