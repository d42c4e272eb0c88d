#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gecko/pulse_model.hpp"

namespace gecko {

/// Optional annotations stored alongside a pulse.
struct PulseMetadata {
  std::optional<double> fidelity;
  std::optional<std::string> quality_name;
  std::optional<double> quality_value;
  std::optional<std::uint64_t> seed;
  std::string tool_version = "gecko 0.1.0";
};

/// Everything a pulse file holds: the system, the pulse, the target gate,
/// and metadata. Round-trips losslessly (reals are written with 17
/// significant digits, enough to reproduce any double bit-exactly).
struct PulseFile {
  HamiltonianSpec spec;
  PulseParams pulse;
  GateTarget target;
  PulseMetadata metadata;
};

/// Serializes to the versioned JSON pulse format (format_version "1").
std::string pulse_to_json(const PulseFile& file);

/// Parses the JSON pulse format; malformed input raises FormatError naming
/// the offending field.
PulseFile pulse_from_json(const std::string& text);

/// File variants of the above; I/O failures raise FormatError.
void save_pulse(const std::string& path, const PulseFile& file);
PulseFile load_pulse(const std::string& path);

}  // namespace gecko
