#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "gecko/detail/format.hpp"
#include "gecko/engine.hpp"
#include "gecko/errors.hpp"
#include "gecko/pulse_io.hpp"
#include "gecko/pulse_model.hpp"
#include "gecko/quality.hpp"
#include "gecko/restorer.hpp"
#include "gecko/study.hpp"

namespace {

using gecko::BudgetError;
using gecko::Error;
using gecko::FormatError;
using gecko::InputError;
using gecko::RestoreFailedError;
using gecko::detail::fmt_real;
using nlohmann::json;

constexpr const char* kKnownKeys[] = {
    "amplitude", "before",       "center",        "channels", "cutoff",
    "delta",     "dt",           "eps",           "filter_kind",
    "g",         "grid",         "in",            "iters",    "mode",
    "model",     "optimize_dt",  "out",           "pad",      "q_aim",
    "quality",   "refine_rounds","restore_every", "restore_iters",
    "rounds",    "seed",         "seeds",         "segments", "sigma",
    "sigmas",    "steepness",    "step",          "subdivide","target",
    "terms",     "tol_rel",      "trace",         "weights",  "width",
};

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read config file '" + path + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& err) {
    throw FormatError("config file '" + path +
                      "' is not valid JSON: " + std::string(err.what()));
  }
  if (!cfg.is_object())
    throw FormatError("config file '" + path + "' must hold a JSON object");
  for (const auto& item : cfg.items()) {
    bool known = false;
    for (const char* key : kKnownKeys) known = known || item.key() == key;
    if (!known) throw InputError("unknown config key '" + item.key() + "'");
  }
  return cfg;
}

// Resolution order for every setting: explicit flag, then config file
// entry, then built-in default.
struct ConfigBag {
  json data = json::object();

  template <typename T>
  void fill(const CLI::Option* opt, const char* key, T& var) const {
    if (opt != nullptr && opt->count() > 0) return;
    if (!data.contains(key)) return;
    try {
      var = data.at(key).get<T>();
    } catch (const json::exception&) {
      throw InputError(std::string("config key '") + key +
                       "' has the wrong type");
    }
  }
};

ConfigBag read_config(const std::string& path) {
  ConfigBag bag;
  if (!path.empty()) bag.data = load_config_file(path);
  return bag;
}

gecko::StepMode parse_mode(const std::string& mode) {
  if (mode == "project") return gecko::StepMode::ProjectGradient;
  if (mode == "direct") return gecko::StepMode::DirectSolve;
  throw InputError("unknown step mode '" + mode +
                   "' (choose project or direct)");
}

// ---- quality flags ---------------------------------------------------------

struct QualityFlags {
  std::string quality = "smooth";
  std::string filter_kind;  // empty = infer from which flags are set
  double cutoff = 0.0;
  double center = 0.0;
  double width = 0.0;
  double steepness = 4.0;
  double delta = 0.05;
  int grid = 5;
  std::vector<int> channels = {0};
  std::vector<double> weights;

  CLI::Option* o_quality = nullptr;
  CLI::Option* o_filter_kind = nullptr;
  CLI::Option* o_cutoff = nullptr;
  CLI::Option* o_center = nullptr;
  CLI::Option* o_width = nullptr;
  CLI::Option* o_steepness = nullptr;
  CLI::Option* o_delta = nullptr;
  CLI::Option* o_grid = nullptr;
  CLI::Option* o_channels = nullptr;
  CLI::Option* o_weights = nullptr;
};

void register_filter_flags(CLI::App* sub, QualityFlags& qf) {
  qf.o_filter_kind =
      sub->add_option("--filter-kind", qf.filter_kind,
                      "Filter shape: lowpass, highpass, or bandstop "
                      "(default: bandstop when --center is set, else "
                      "lowpass)");
  qf.o_cutoff = sub->add_option(
      "--cutoff", qf.cutoff, "Lowpass/highpass corner frequency per unit time");
  qf.o_center = sub->add_option("--center", qf.center,
                                "Bandstop center frequency per unit time");
  qf.o_width = sub->add_option("--width", qf.width,
                               "Bandstop Gaussian width in frequency units");
  qf.o_steepness = sub->add_option("--steepness", qf.steepness,
                                   "Lowpass/highpass edge order")
                       ->capture_default_str();
}

void register_quality_flags(CLI::App* sub, QualityFlags& qf) {
  qf.o_quality = sub->add_option("--quality", qf.quality,
                                 "Objective: filter, smooth, robust, path, "
                                 "drift, or composite")
                     ->capture_default_str();
  register_filter_flags(sub, qf);
  qf.o_delta = sub->add_option("--delta", qf.delta,
                               "Robust offset half-range")
                   ->capture_default_str();
  qf.o_grid = sub->add_option("--grid", qf.grid,
                              "Robust offsets per channel")
                  ->capture_default_str();
  qf.o_channels = sub->add_option("--channels", qf.channels,
                                  "Robust channel indices")
                      ->delimiter(',')
                      ->capture_default_str();
  qf.o_weights = sub->add_option("--weights", qf.weights,
                                 "Composite term weights, one per config "
                                 "term, in order")
                     ->delimiter(',');
}

void fill_quality_flags(const ConfigBag& bag, QualityFlags& qf) {
  bag.fill(qf.o_quality, "quality", qf.quality);
  bag.fill(qf.o_filter_kind, "filter_kind", qf.filter_kind);
  bag.fill(qf.o_cutoff, "cutoff", qf.cutoff);
  bag.fill(qf.o_center, "center", qf.center);
  bag.fill(qf.o_width, "width", qf.width);
  bag.fill(qf.o_steepness, "steepness", qf.steepness);
  bag.fill(qf.o_delta, "delta", qf.delta);
  bag.fill(qf.o_grid, "grid", qf.grid);
  bag.fill(qf.o_channels, "channels", qf.channels);
  bag.fill(qf.o_weights, "weights", qf.weights);
}

gecko::QualitySpec build_single_quality(
    const std::string& name, const std::string& filter_kind, double cutoff,
    double center, double width, double steepness, double delta, int grid,
    const std::vector<int>& channels, Eigen::Index length, double dt) {
  if (name == "smooth") return gecko::QualitySpec::smooth();
  if (name == "path") return gecko::QualitySpec::path();
  if (name == "drift") return gecko::QualitySpec::drift();
  if (name == "filter") {
    std::string kind = filter_kind;
    if (kind.empty()) kind = center > 0.0 ? "bandstop" : "lowpass";
    gecko::FilterParams params;
    params.cutoff = cutoff;
    params.center = center;
    params.width = width;
    params.steepness = steepness;
    return gecko::QualitySpec::filter(
        gecko::make_filter(kind, params, length, dt));
  }
  if (name == "robust") {
    gecko::RobustSpec spec;
    spec.channels = channels;
    spec.delta = delta;
    spec.grid_points = grid;
    return gecko::QualitySpec::robust(spec);
  }
  throw InputError("unknown quality '" + name +
                   "' (choose filter, smooth, robust, path, drift, or "
                   "composite)");
}

gecko::QualitySpec build_quality(const QualityFlags& qf, const ConfigBag& bag,
                                 Eigen::Index length, double dt) {
  if (qf.quality != "composite")
    return build_single_quality(qf.quality, qf.filter_kind, qf.cutoff,
                                qf.center, qf.width, qf.steepness, qf.delta,
                                qf.grid, qf.channels, length, dt);
  if (!bag.data.contains("terms") || !bag.data.at("terms").is_array() ||
      bag.data.at("terms").empty())
    throw InputError(
        "the composite quality needs a non-empty 'terms' array in the "
        "config file");
  std::vector<std::pair<double, gecko::QualitySpec>> terms;
  try {
    for (const json& term : bag.data.at("terms")) {
      if (!term.is_object() || !term.contains("quality"))
        throw InputError("every composite term needs a 'quality' name");
      const std::string name = term.at("quality").get<std::string>();
      if (name == "composite") throw InputError("composite terms cannot nest");
      auto num = [&term](const char* key, double fallback) {
        return term.contains(key) ? term.at(key).get<double>() : fallback;
      };
      const std::vector<int> channels =
          term.contains("channels")
              ? term.at("channels").get<std::vector<int>>()
              : std::vector<int>{0};
      terms.emplace_back(
          num("weight", 1.0),
          build_single_quality(
              name, term.value("filter_kind", std::string{}),
              num("cutoff", 0.0), num("center", 0.0), num("width", 0.0),
              num("steepness", 4.0), num("delta", 0.05),
              term.value("grid", 5), channels, length, dt));
    }
  } catch (const json::exception& err) {
    throw InputError("malformed composite term: " + std::string(err.what()));
  }
  if (!qf.weights.empty()) {
    if (qf.weights.size() != terms.size())
      throw InputError("--weights needs exactly one value per composite term");
    for (std::size_t i = 0; i < terms.size(); ++i)
      terms[i].first = qf.weights[i];
  }
  return gecko::QualitySpec::composite(std::move(terms));
}

Eigen::VectorXd spectrum_weights(const QualityFlags& qf, Eigen::Index length,
                                 double dt) {
  if (qf.cutoff > 0.0 || qf.center > 0.0 || !qf.filter_kind.empty()) {
    std::string kind = qf.filter_kind;
    if (kind.empty()) kind = qf.center > 0.0 ? "bandstop" : "lowpass";
    gecko::FilterParams params;
    params.cutoff = qf.cutoff;
    params.center = qf.center;
    params.width = qf.width;
    params.steepness = qf.steepness;
    return gecko::make_filter(kind, params, length, dt).weights;
  }
  return Eigen::VectorXd::Ones(length);
}

// ---- engine flags ----------------------------------------------------------

struct EngineFlags {
  double step = gecko::GeckoConfig{}.step_size;
  int iters = gecko::GeckoConfig{}.max_iters;
  double q_aim = 0.0;
  double eps = 1e-7;
  int restore_every = 0;
  double tol_rel = gecko::GeckoConfig{}.tol_rel;
  std::string mode = "project";
  int restore_iters = gecko::RestoreConfig{}.max_iters;

  CLI::Option* o_step = nullptr;
  CLI::Option* o_iters = nullptr;
  CLI::Option* o_q_aim = nullptr;
  CLI::Option* o_eps = nullptr;
  CLI::Option* o_restore_every = nullptr;
  CLI::Option* o_tol_rel = nullptr;
  CLI::Option* o_mode = nullptr;
  CLI::Option* o_restore_iters = nullptr;
};

void register_engine_flags(CLI::App* sub, EngineFlags& ef) {
  ef.o_step = sub->add_option("--step", ef.step,
                              "In-kernel update norm per iteration")
                  ->capture_default_str();
  ef.o_iters = sub->add_option("--iters", ef.iters, "Iteration budget")
                   ->capture_default_str();
  ef.o_q_aim = sub->add_option("--q-aim", ef.q_aim,
                               "Stop once the quality reaches this value")
                   ->capture_default_str();
  ef.o_eps = sub->add_option("--eps", ef.eps,
                             "Fidelity constraint: keep F > 1 - eps")
                 ->capture_default_str();
  ef.o_restore_every =
      sub->add_option("--restore-every", ef.restore_every,
                      "Restore on a fixed schedule of this many iterations "
                      "(0 = restore whenever the constraint is violated)")
          ->capture_default_str();
  ef.o_tol_rel = sub->add_option("--tol-rel", ef.tol_rel,
                                 "Relative singular-value cutoff for the "
                                 "kernel basis")
                     ->capture_default_str();
  ef.o_mode = sub->add_option("--mode", ef.mode,
                              "In-kernel update rule: project or direct")
                  ->capture_default_str();
  ef.o_restore_iters = sub->add_option("--restore-iters", ef.restore_iters,
                                       "Fidelity maximizer iteration budget")
                           ->capture_default_str();
}

void fill_engine_flags(const ConfigBag& bag, EngineFlags& ef) {
  bag.fill(ef.o_step, "step", ef.step);
  bag.fill(ef.o_iters, "iters", ef.iters);
  bag.fill(ef.o_q_aim, "q_aim", ef.q_aim);
  bag.fill(ef.o_eps, "eps", ef.eps);
  bag.fill(ef.o_restore_every, "restore_every", ef.restore_every);
  bag.fill(ef.o_tol_rel, "tol_rel", ef.tol_rel);
  bag.fill(ef.o_mode, "mode", ef.mode);
  bag.fill(ef.o_restore_iters, "restore_iters", ef.restore_iters);
}

gecko::GeckoConfig to_engine_config(const EngineFlags& ef) {
  gecko::GeckoConfig cfg;
  cfg.step_size = ef.step;
  cfg.max_iters = ef.iters;
  cfg.q_aim = ef.q_aim;
  cfg.epsilon = ef.eps;
  cfg.restore_every = ef.restore_every;
  cfg.tol_rel = ef.tol_rel;
  cfg.mode = parse_mode(ef.mode);
  return cfg;
}

gecko::RestoreConfig to_restore_config(const EngineFlags& ef,
                                       std::uint64_t seed) {
  gecko::RestoreConfig cfg;
  cfg.epsilon = ef.eps;
  cfg.max_iters = ef.restore_iters;
  cfg.seed = seed;
  return cfg;
}

std::string derive_trace_path(std::string out) {
  const std::string suffix = ".json";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
    out.resize(out.size() - suffix.size());
  return out + ".trace.csv";
}

void require_path(const std::string& value, const char* what) {
  if (value.empty())
    throw InputError(std::string("missing ") + what +
                     " (give it as a flag or config entry)");
}

// ---- solve -------------------------------------------------------------------

struct SolveOpts {
  std::string config_path;
  std::string model = "tfim1_h2zero";
  std::string target = "CZ";
  std::string out;
  double g = 1.0;
  double dt = 1.0;
  double eps = 1e-7;
  double amplitude = 3.0;
  int segments = 4;
  int restore_iters = gecko::RestoreConfig{}.max_iters;
  std::uint64_t seed = 1;

  CLI::Option* o_model = nullptr;
  CLI::Option* o_target = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_g = nullptr;
  CLI::Option* o_dt = nullptr;
  CLI::Option* o_eps = nullptr;
  CLI::Option* o_amplitude = nullptr;
  CLI::Option* o_segments = nullptr;
  CLI::Option* o_restore_iters = nullptr;
  CLI::Option* o_seed = nullptr;
};

int cmd_solve(SolveOpts& o) {
  const ConfigBag bag = read_config(o.config_path);
  bag.fill(o.o_model, "model", o.model);
  bag.fill(o.o_target, "target", o.target);
  bag.fill(o.o_out, "out", o.out);
  bag.fill(o.o_g, "g", o.g);
  bag.fill(o.o_dt, "dt", o.dt);
  bag.fill(o.o_eps, "eps", o.eps);
  bag.fill(o.o_amplitude, "amplitude", o.amplitude);
  bag.fill(o.o_segments, "segments", o.segments);
  bag.fill(o.o_restore_iters, "restore_iters", o.restore_iters);
  bag.fill(o.o_seed, "seed", o.seed);
  require_path(o.out, "--out");

  const gecko::HamiltonianSpec spec = gecko::model_preset(o.model, o.g);
  const gecko::GateTarget target = gecko::gate_target(o.target);
  gecko::RestoreConfig restorer;
  restorer.epsilon = o.eps;
  restorer.max_iters = o.restore_iters;
  restorer.seed = o.seed;
  const gecko::PulseParams start =
      gecko::random_pulse(spec, o.segments, o.dt, o.amplitude, o.seed);
  const gecko::PulseParams solved =
      gecko::restore(spec, start, target, restorer);
  const double f = gecko::fidelity(spec, solved, target);

  gecko::PulseFile file{spec, solved, target, {}};
  file.metadata.fidelity = f;
  file.metadata.seed = o.seed;
  gecko::save_pulse(o.out, file);
  std::cout << "fidelity " << fmt_real(f) << "\n";
  std::cout << "wrote " << o.out << "\n";
  return 0;
}

// ---- gecko -------------------------------------------------------------------

struct RunOpts {
  std::string config_path;
  std::string in;
  std::string out;
  std::string trace;
  QualityFlags qf;
  EngineFlags ef;
  bool optimize_dt = false;
  int refine_rounds = 0;
  std::uint64_t seed = 0;

  CLI::Option* o_in = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_trace = nullptr;
  CLI::Option* o_optimize_dt = nullptr;
  CLI::Option* o_refine_rounds = nullptr;
  CLI::Option* o_seed = nullptr;
};

int cmd_run(RunOpts& o) {
  const ConfigBag bag = read_config(o.config_path);
  bag.fill(o.o_in, "in", o.in);
  bag.fill(o.o_out, "out", o.out);
  bag.fill(o.o_trace, "trace", o.trace);
  bag.fill(o.o_optimize_dt, "optimize_dt", o.optimize_dt);
  bag.fill(o.o_refine_rounds, "refine_rounds", o.refine_rounds);
  bag.fill(o.o_seed, "seed", o.seed);
  fill_quality_flags(bag, o.qf);
  fill_engine_flags(bag, o.ef);
  require_path(o.in, "input pulse file");
  require_path(o.out, "--out");

  gecko::PulseFile file = gecko::load_pulse(o.in);
  if (o.optimize_dt || o.qf.quality == "path" || o.qf.quality == "drift")
    file.pulse.optimize_dt = true;
  const gecko::QualitySpec quality =
      build_quality(o.qf, bag, file.pulse.segments(), file.pulse.dt);
  const gecko::GeckoConfig cfg = to_engine_config(o.ef);
  const gecko::RestoreConfig restorer = to_restore_config(o.ef, o.seed);

  const double f_in = gecko::fidelity(file.spec, file.pulse, file.target);
  if (!(f_in > 1.0 - cfg.epsilon)) {
    std::cerr << "error: input fidelity " << fmt_real(f_in)
              << " violates F > 1 - eps (eps = " << fmt_real(cfg.epsilon)
              << "); solve for a high-fidelity pulse first\n";
    return 3;
  }

  gecko::GeckoTrace trace;
  if (o.refine_rounds > 0) {
    if (o.qf.quality != "smooth")
      throw InputError("--refine-rounds applies only to the smooth quality");
    trace = gecko::refine_and_smooth(file.spec, file.pulse, file.target,
                                     o.refine_rounds, cfg, restorer);
  } else {
    trace = gecko::gecko_run(file.spec, file.pulse, file.target, quality, cfg,
                             restorer);
  }

  file.pulse = trace.pulse;
  const double f_out = gecko::fidelity(file.spec, file.pulse, file.target);
  const double q_out =
      gecko::quality_value(file.spec, file.pulse, file.target, quality);
  file.metadata.fidelity = f_out;
  file.metadata.quality_name = quality.name();
  file.metadata.quality_value = q_out;
  gecko::save_pulse(o.out, file);
  const std::string trace_path =
      o.trace.empty() ? derive_trace_path(o.out) : o.trace;
  gecko::write_trace_csv(trace_path, trace);

  std::cout << "status " << gecko::status_name(trace.status) << "\n";
  std::cout << "iterations " << trace.records.size() << "\n";
  std::cout << "fidelity " << fmt_real(f_out) << "\n";
  std::cout << "quality " << fmt_real(q_out) << "\n";
  std::cout << "duration " << fmt_real(file.pulse.duration()) << "\n";
  std::cout << "wrote " << o.out << "\n";
  std::cout << "wrote " << trace_path << "\n";
  return 0;
}

// ---- spectrum ------------------------------------------------------------------

struct SpectrumOpts {
  std::string config_path;
  std::string in;
  std::string before;
  std::string out;
  QualityFlags qf;

  CLI::Option* o_in = nullptr;
  CLI::Option* o_before = nullptr;
  CLI::Option* o_out = nullptr;
};

int cmd_spectrum(SpectrumOpts& o) {
  const ConfigBag bag = read_config(o.config_path);
  bag.fill(o.o_in, "in", o.in);
  bag.fill(o.o_before, "before", o.before);
  bag.fill(o.o_out, "out", o.out);
  fill_quality_flags(bag, o.qf);
  require_path(o.in, "input pulse file");
  require_path(o.out, "--out");

  const gecko::PulseFile file = gecko::load_pulse(o.in);
  const gecko::PulseParams before =
      o.before.empty() ? file.pulse : gecko::load_pulse(o.before).pulse;
  const Eigen::VectorXd weights =
      spectrum_weights(o.qf, file.pulse.segments(), file.pulse.dt);
  gecko::write_spectrum_csv(o.out, before, file.pulse, weights);
  std::cout << "wrote " << o.out << "\n";
  return 0;
}

// ---- robust-sweep ---------------------------------------------------------------

struct SweepOpts {
  std::string config_path;
  std::string in;
  std::string out;
  double delta = 0.05;
  int grid = 101;
  std::vector<int> channels = {0};

  CLI::Option* o_in = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_delta = nullptr;
  CLI::Option* o_grid = nullptr;
  CLI::Option* o_channels = nullptr;
};

int cmd_robust_sweep(SweepOpts& o) {
  const ConfigBag bag = read_config(o.config_path);
  bag.fill(o.o_in, "in", o.in);
  bag.fill(o.o_out, "out", o.out);
  bag.fill(o.o_delta, "delta", o.delta);
  bag.fill(o.o_grid, "grid", o.grid);
  bag.fill(o.o_channels, "channels", o.channels);
  require_path(o.in, "input pulse file");
  require_path(o.out, "--out");
  if (!(o.delta > 0.0) || !std::isfinite(o.delta))
    throw InputError("--delta must be positive and finite");
  if (o.grid < 3) throw InputError("--grid needs at least 3 sweep points");
  if (o.channels.empty()) throw InputError("--channels must not be empty");

  const gecko::PulseFile file = gecko::load_pulse(o.in);
  for (int k : o.channels)
    if (k < 0 || k >= file.pulse.channels())
      throw InputError("sweep channel index out of range");

  const Eigen::VectorXd offsets =
      Eigen::VectorXd::LinSpaced(o.grid, -o.delta, o.delta);
  Eigen::VectorXd fidelities(o.grid);
  for (int i = 0; i < o.grid; ++i) {
    gecko::PulseParams shifted = file.pulse;
    for (int k : o.channels) shifted.phi.col(k).array() += offsets[i];
    fidelities[i] = gecko::fidelity(file.spec, shifted, file.target);
  }
  gecko::write_robust_sweep_csv(o.out, offsets, fidelities);
  std::cout << "wrote " << o.out << "\n";
  return 0;
}

// ---- baseline-gauss -------------------------------------------------------------

struct BaselineOpts {
  std::string config_path;
  std::string in;
  std::string out;
  double sigma = 8.0;
  int subdivide = 1;
  int pad = 32;
  double eps = 1e-7;
  int restore_iters = gecko::RestoreConfig{}.max_iters;
  std::uint64_t seed = 0;

  CLI::Option* o_in = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_sigma = nullptr;
  CLI::Option* o_subdivide = nullptr;
  CLI::Option* o_pad = nullptr;
  CLI::Option* o_eps = nullptr;
  CLI::Option* o_restore_iters = nullptr;
  CLI::Option* o_seed = nullptr;
};

int cmd_baseline_gauss(BaselineOpts& o) {
  const ConfigBag bag = read_config(o.config_path);
  bag.fill(o.o_in, "in", o.in);
  bag.fill(o.o_out, "out", o.out);
  bag.fill(o.o_sigma, "sigma", o.sigma);
  bag.fill(o.o_subdivide, "subdivide", o.subdivide);
  bag.fill(o.o_pad, "pad", o.pad);
  bag.fill(o.o_eps, "eps", o.eps);
  bag.fill(o.o_restore_iters, "restore_iters", o.restore_iters);
  bag.fill(o.o_seed, "seed", o.seed);
  require_path(o.in, "input pulse file");
  require_path(o.out, "--out");
  if (o.subdivide < 1)
    throw InputError("--subdivide must be at least 1");

  gecko::PulseFile file = gecko::load_pulse(o.in);
  gecko::PulseParams pulse = o.subdivide > 1
                                 ? gecko::refine_pulse(file.pulse, o.subdivide)
                                 : file.pulse;
  pulse = gecko::gaussian_baseline(pulse, o.sigma, o.pad);
  gecko::RestoreConfig restorer;
  restorer.epsilon = o.eps;
  restorer.max_iters = o.restore_iters;
  restorer.seed = o.seed;
  file.pulse = gecko::restore(file.spec, pulse, file.target, restorer);
  const double f = gecko::fidelity(file.spec, file.pulse, file.target);
  file.metadata.fidelity = f;
  file.metadata.quality_name.reset();
  file.metadata.quality_value.reset();
  gecko::save_pulse(o.out, file);
  std::cout << "fidelity " << fmt_real(f) << "\n";
  std::cout << "wrote " << o.out << "\n";
  return 0;
}

// ---- fig4-study -----------------------------------------------------------------

struct StudyOpts {
  std::string config_path;
  std::string model = "tfim2";
  std::string target = "CNOT";
  std::string out;
  double g = 1.0;
  double dt = 1.0;
  double amplitude = 3.0;
  std::vector<double> sigmas = {2.0, 4.0, 8.0};
  int segments = 10;
  int rounds = 5;
  int seeds = 10;
  int pad = 32;
  std::uint64_t seed = 1;
  EngineFlags ef;

  CLI::Option* o_model = nullptr;
  CLI::Option* o_target = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_g = nullptr;
  CLI::Option* o_dt = nullptr;
  CLI::Option* o_amplitude = nullptr;
  CLI::Option* o_sigmas = nullptr;
  CLI::Option* o_segments = nullptr;
  CLI::Option* o_rounds = nullptr;
  CLI::Option* o_seeds = nullptr;
  CLI::Option* o_pad = nullptr;
  CLI::Option* o_seed = nullptr;
};

int cmd_study(StudyOpts& o) {
  const ConfigBag bag = read_config(o.config_path);
  bag.fill(o.o_model, "model", o.model);
  bag.fill(o.o_target, "target", o.target);
  bag.fill(o.o_out, "out", o.out);
  bag.fill(o.o_g, "g", o.g);
  bag.fill(o.o_dt, "dt", o.dt);
  bag.fill(o.o_amplitude, "amplitude", o.amplitude);
  bag.fill(o.o_sigmas, "sigmas", o.sigmas);
  bag.fill(o.o_segments, "segments", o.segments);
  bag.fill(o.o_rounds, "rounds", o.rounds);
  bag.fill(o.o_seeds, "seeds", o.seeds);
  bag.fill(o.o_pad, "pad", o.pad);
  bag.fill(o.o_seed, "seed", o.seed);
  fill_engine_flags(bag, o.ef);
  require_path(o.out, "--out");

  const gecko::HamiltonianSpec spec = gecko::model_preset(o.model, o.g);
  const gecko::GateTarget target = gecko::gate_target(o.target);
  gecko::StudyConfig cfg;
  cfg.seeds = o.seeds;
  cfg.first_seed = o.seed;
  cfg.segments = o.segments;
  cfg.dt = o.dt;
  cfg.rounds = o.rounds;
  cfg.amplitude = o.amplitude;
  cfg.sigmas = o.sigmas;
  cfg.pad = o.pad;
  cfg.gecko = to_engine_config(o.ef);
  cfg.restorer = to_restore_config(o.ef, o.seed);

  const gecko::StudyResult result = gecko::run_smoothing_study(spec, target, cfg);
  for (const std::string& failure : result.failures)
    std::cerr << failure << "\n";
  gecko::write_study_csv(o.out, result);
  std::cout << "seeds requested " << result.requested << "\n";
  std::cout << "seeds succeeded " << result.succeeded << "\n";
  std::cout << "wrote " << o.out << "\n";
  if (result.succeeded == 0) {
    std::cerr << "error: every seed failed\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "GECKO: post-hoc optimization of quantum control pulses along "
      "fidelity level sets"};
  app.require_subcommand(1);
  std::function<int()> runner;

  SolveOpts so;
  CLI::App* solve = app.add_subcommand(
      "solve", "Find a pulse implementing the target gate from a random start");
  solve->add_option("--config", so.config_path, "JSON config file (flags win)");
  so.o_model = solve->add_option("--model", so.model,
                                 "System preset: tfim1, tfim1_h2zero, tfim2")
                   ->capture_default_str();
  so.o_target = solve->add_option("--target", so.target,
                                  "Target gate: CZ or CNOT")
                    ->capture_default_str();
  so.o_out = solve->add_option("--out", so.out, "Output pulse file");
  so.o_g = solve->add_option("--g", so.g, "Drift coupling strength")
               ->capture_default_str();
  so.o_dt = solve->add_option("--dt", so.dt, "Segment duration")
                ->capture_default_str();
  so.o_eps = solve->add_option("--eps", so.eps,
                               "Solve until the fidelity exceeds 1 - eps")
                 ->capture_default_str();
  so.o_amplitude = solve->add_option("--amplitude", so.amplitude,
                                     "Random start amplitude scale")
                       ->capture_default_str();
  so.o_segments = solve->add_option("--segments", so.segments,
                                    "Number of pulse segments")
                      ->capture_default_str();
  so.o_restore_iters = solve->add_option("--restore-iters", so.restore_iters,
                                         "Fidelity maximizer iteration budget")
                           ->capture_default_str();
  so.o_seed = solve->add_option("--seed", so.seed, "Random seed")
                  ->capture_default_str();
  solve->callback([&]() { runner = [&so]() { return cmd_solve(so); }; });

  RunOpts ro;
  CLI::App* run = app.add_subcommand(
      "gecko", "Optimize a quality function along the fidelity level set");
  run->add_option("--config", ro.config_path, "JSON config file (flags win)");
  ro.o_in = run->add_option("input", ro.in, "Input pulse file");
  ro.o_out = run->add_option("--out", ro.out, "Output pulse file");
  ro.o_trace = run->add_option("--trace", ro.trace,
                               "Trace CSV path (default: derived from --out)");
  register_quality_flags(run, ro.qf);
  register_engine_flags(run, ro.ef);
  ro.o_optimize_dt = run->add_flag("--optimize-dt", ro.optimize_dt,
                                   "Treat the segment duration as a free "
                                   "parameter (implied by path and drift)");
  ro.o_refine_rounds =
      run->add_option("--refine-rounds", ro.refine_rounds,
                      "Double the segment count and smooth this many times "
                      "(smooth quality only)")
          ->capture_default_str();
  ro.o_seed = run->add_option("--seed", ro.seed,
                              "Seed for the fidelity maximizer's kick")
                 ->capture_default_str();
  run->callback([&]() { runner = [&ro]() { return cmd_run(ro); }; });

  SpectrumOpts po;
  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "Emit the per-mode spectral power of a pulse");
  spectrum->add_option("--config", po.config_path,
                       "JSON config file (flags win)");
  po.o_in = spectrum->add_option("input", po.in, "Input pulse file");
  po.o_before = spectrum->add_option(
      "--before", po.before,
      "Reference pulse file for the power_before column (default: input)");
  po.o_out = spectrum->add_option("--out", po.out, "Output CSV file");
  register_filter_flags(spectrum, po.qf);
  spectrum->callback([&]() { runner = [&po]() { return cmd_spectrum(po); }; });

  SweepOpts wo;
  CLI::App* sweep = app.add_subcommand(
      "robust-sweep", "Sweep constant control offsets and record the fidelity");
  sweep->add_option("--config", wo.config_path, "JSON config file (flags win)");
  wo.o_in = sweep->add_option("input", wo.in, "Input pulse file");
  wo.o_out = sweep->add_option("--out", wo.out, "Output CSV file");
  wo.o_delta = sweep->add_option("--delta", wo.delta,
                                 "Sweep offsets span [-delta, delta]")
                   ->capture_default_str();
  wo.o_grid = sweep->add_option("--grid", wo.grid, "Number of sweep points")
                  ->capture_default_str();
  wo.o_channels = sweep->add_option("--channels", wo.channels,
                                    "Channels that receive the offset")
                      ->delimiter(',')
                      ->capture_default_str();
  sweep->callback([&]() { runner = [&wo]() { return cmd_robust_sweep(wo); }; });

  BaselineOpts bo;
  CLI::App* baseline = app.add_subcommand(
      "baseline-gauss",
      "Smooth a pulse with a Gaussian kernel, then restore its fidelity");
  baseline->add_option("--config", bo.config_path,
                       "JSON config file (flags win)");
  bo.o_in = baseline->add_option("input", bo.in, "Input pulse file");
  bo.o_out = baseline->add_option("--out", bo.out, "Output pulse file");
  bo.o_sigma = baseline->add_option("--sigma", bo.sigma,
                                    "Gaussian width in samples")
                   ->capture_default_str();
  bo.o_subdivide = baseline->add_option("--subdivide", bo.subdivide,
                                        "Refine each segment into this many "
                                        "pieces first")
                       ->capture_default_str();
  bo.o_pad = baseline->add_option("--pad", bo.pad,
                                  "Zero padding per side, in samples")
                 ->capture_default_str();
  bo.o_eps = baseline->add_option("--eps", bo.eps,
                                  "Restore until the fidelity exceeds 1 - eps")
                 ->capture_default_str();
  bo.o_restore_iters =
      baseline->add_option("--restore-iters", bo.restore_iters,
                           "Fidelity maximizer iteration budget")
          ->capture_default_str();
  bo.o_seed = baseline->add_option("--seed", bo.seed,
                                   "Seed for the fidelity maximizer's kick")
                  ->capture_default_str();
  baseline->callback(
      [&]() { runner = [&bo]() { return cmd_baseline_gauss(bo); }; });

  StudyOpts to;
  CLI::App* study = app.add_subcommand(
      "fig4-study",
      "Multi-seed comparison of level-set smoothing against Gaussian "
      "baselines");
  study->add_option("--config", to.config_path, "JSON config file (flags win)");
  to.o_model = study->add_option("--model", to.model,
                                 "System preset: tfim1, tfim1_h2zero, tfim2")
                   ->capture_default_str();
  to.o_target = study->add_option("--target", to.target,
                                  "Target gate: CZ or CNOT")
                    ->capture_default_str();
  to.o_out = study->add_option("--out", to.out, "Output summary CSV file");
  to.o_g = study->add_option("--g", to.g, "Drift coupling strength")
               ->capture_default_str();
  to.o_dt = study->add_option("--dt", to.dt, "Coarse segment duration")
                ->capture_default_str();
  to.o_amplitude = study->add_option("--amplitude", to.amplitude,
                                     "Random start amplitude scale")
                       ->capture_default_str();
  to.o_sigmas = study->add_option("--sigmas", to.sigmas,
                                  "Gaussian baseline widths, in samples")
                    ->delimiter(',')
                    ->capture_default_str();
  to.o_segments = study->add_option("--segments", to.segments,
                                    "Coarse segment count")
                      ->capture_default_str();
  to.o_rounds = study->add_option("--rounds", to.rounds,
                                  "Refinement doublings per seed")
                    ->capture_default_str();
  to.o_seeds = study->add_option("--seeds", to.seeds,
                                 "Number of random initializations")
                   ->capture_default_str();
  to.o_pad = study->add_option("--pad", to.pad,
                               "Gaussian baseline zero padding, in samples")
                 ->capture_default_str();
  to.o_seed = study->add_option("--seed", to.seed, "First random seed")
                  ->capture_default_str();
  to.ef.eps = 1e-4;  // desk-scale study default
  register_engine_flags(study, to.ef);
  study->callback([&]() { runner = [&to]() { return cmd_study(to); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    return runner();
  } catch (const RestoreFailedError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const InputError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const FormatError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const BudgetError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 4;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 4;
  }
}
