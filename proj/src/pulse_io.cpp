#include "gecko/pulse_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "gecko/errors.hpp"

namespace gecko {
namespace {

using nlohmann::json;

constexpr const char* kFormatVersion = "1";

/// 17 significant digits: the shortest fixed precision that reproduces any
/// IEEE double bit-exactly on parse.
std::string fmt_real(double x) {
  if (!std::isfinite(x)) throw InputError("cannot serialize non-finite real");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void append_term_list(
    std::string& out,
    const std::vector<std::pair<PauliString, double>>& terms,
    const char* value_key) {
  out += '[';
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += ", ";
    out += "{\"pauli\": \"" + terms[i].first.label() + "\", \"" + value_key +
           "\": " + fmt_real(terms[i].second) + "}";
  }
  out += ']';
}

void append_complex_matrix(std::string& out, const Eigen::MatrixXcd& m) {
  out += '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += ", ";
    out += '[';
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ", ";
      out += '[' + fmt_real(m(r, c).real()) + ", " + fmt_real(m(r, c).imag()) +
             ']';
    }
    out += ']';
  }
  out += ']';
}

// ---- loader helpers ----------------------------------------------------

[[noreturn]] void bad_field(const std::string& field, const char* what) {
  throw FormatError("field \"" + field + "\": " + what);
}

const json& require(const json& obj, const std::string& field) {
  if (!obj.is_object()) throw FormatError("expected object around \"" + field + '"');
  const auto it = obj.find(field);
  if (it == obj.end()) throw FormatError("missing field \"" + field + '"');
  return *it;
}

double as_real(const json& v, const std::string& field) {
  if (!v.is_number()) bad_field(field, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) bad_field(field, "expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) bad_field(field, "expected a string");
  return v.get<std::string>();
}

PauliString parse_pauli(const json& v, const std::string& field) {
  const std::string label = as_string(v, field);
  try {
    return pauli_operator(label);
  } catch (const InputError& e) {
    throw FormatError("field \"" + field + "\": " + e.what());
  }
}

Eigen::MatrixXcd parse_complex_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) bad_field(field, "expected a matrix");
  const std::size_t rows = v.size();
  Eigen::MatrixXcd m;
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = v[r];
    if (!row.is_array()) bad_field(field, "expected rows of [re, im] pairs");
    if (r == 0) m.resize(rows, row.size());
    if (row.size() != static_cast<std::size_t>(m.cols()))
      bad_field(field, "ragged matrix rows");
    for (std::size_t c = 0; c < row.size(); ++c) {
      const json& cell = row[c];
      if (!cell.is_array() || cell.size() != 2)
        bad_field(field, "each entry must be an [re, im] pair");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = {
          as_real(cell[0], field), as_real(cell[1], field)};
    }
  }
  return m;
}

}  // namespace

std::string pulse_to_json(const PulseFile& file) {
  validate_pulse(file.spec, file.pulse);
  std::string out;
  out.reserve(4096);
  out += "{\n";
  out += "  \"format_version\": \"" + std::string(kFormatVersion) + "\",\n";
  out += "  \"n\": " + std::to_string(file.spec.qubits()) + ",\n";

  out += "  \"drift\": [";
  const auto& drift = file.spec.drift();
  for (std::size_t i = 0; i < drift.size(); ++i) {
    if (i) out += ", ";
    out += "{\"pauli\": \"" + drift[i].op.label() +
           "\", \"g\": " + fmt_real(drift[i].strength) + "}";
  }
  out += "],\n";

  out += "  \"controls\": [";
  const auto& controls = file.spec.controls();
  for (std::size_t k = 0; k < controls.size(); ++k) {
    if (k) out += ", ";
    append_term_list(out, controls[k].terms(), "coeff");
  }
  out += "],\n";

  out += "  \"L\": " + std::to_string(file.pulse.segments()) + ",\n";
  out += "  \"dt\": " + fmt_real(file.pulse.dt) + ",\n";

  out += "  \"phi\": [\n";
  for (Eigen::Index l = 0; l < file.pulse.segments(); ++l) {
    out += "    [";
    for (Eigen::Index k = 0; k < file.pulse.channels(); ++k) {
      if (k) out += ", ";
      out += fmt_real(file.pulse.phi(l, k));
    }
    out += l + 1 < file.pulse.segments() ? "],\n" : "]\n";
  }
  out += "  ],\n";

  out += "  \"target\": {\"name\": \"" + file.target.name + "\"";
  if (file.target.name == "custom") {
    out += ", \"matrix\": ";
    append_complex_matrix(out, file.target.matrix);
  }
  out += "},\n";

  out += "  \"metadata\": {";
  std::string sep;
  const auto field = [&](const std::string& text) {
    out += sep + text;
    sep = ", ";
  };
  if (file.metadata.fidelity)
    field("\"fidelity\": " + fmt_real(*file.metadata.fidelity));
  if (file.metadata.quality_name && file.metadata.quality_value)
    field("\"quality\": {\"name\": \"" + *file.metadata.quality_name +
          "\", \"value\": " + fmt_real(*file.metadata.quality_value) + "}");
  if (file.metadata.seed) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%llu",
                  static_cast<unsigned long long>(*file.metadata.seed));
    field("\"seed\": " + std::string(buf));
  }
  field("\"tool_version\": \"" + file.metadata.tool_version + "\"");
  out += "}\n";
  out += "}\n";
  return out;
}

PulseFile pulse_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("top-level value must be an object");

  const std::string version = as_string(require(doc, "format_version"),
                                        "format_version");
  if (version != kFormatVersion)
    throw FormatError("unsupported format_version \"" + version +
                      "\" (expected \"" + kFormatVersion + "\")");

  const int n = as_int(require(doc, "n"), "n");

  const json& drift_json = require(doc, "drift");
  if (!drift_json.is_array()) bad_field("drift", "expected an array");
  std::vector<DriftTerm> drift;
  for (const json& term : drift_json) {
    drift.push_back(DriftTerm{parse_pauli(require(term, "pauli"), "drift.pauli"),
                              as_real(require(term, "g"), "drift.g")});
  }

  const json& controls_json = require(doc, "controls");
  if (!controls_json.is_array()) bad_field("controls", "expected an array");
  std::vector<ControlChannel> controls;
  for (const json& channel : controls_json) {
    if (!channel.is_array() || channel.empty())
      bad_field("controls", "each channel must be a non-empty array of terms");
    std::vector<std::pair<PauliString, double>> terms;
    for (const json& term : channel) {
      terms.emplace_back(parse_pauli(require(term, "pauli"), "controls.pauli"),
                         as_real(require(term, "coeff"), "controls.coeff"));
    }
    try {
      controls.emplace_back(std::move(terms));
    } catch (const InputError& e) {
      throw FormatError(std::string("field \"controls\": ") + e.what());
    }
  }

  const int segments = as_int(require(doc, "L"), "L");
  if (segments < 1) bad_field("L", "must be at least 1");
  const double dt = as_real(require(doc, "dt"), "dt");

  const json& phi_json = require(doc, "phi");
  if (!phi_json.is_array() ||
      phi_json.size() != static_cast<std::size_t>(segments))
    bad_field("phi", "expected L rows");
  Eigen::MatrixXd phi(segments, static_cast<Eigen::Index>(controls.size()));
  for (int l = 0; l < segments; ++l) {
    const json& row = phi_json[static_cast<std::size_t>(l)];
    if (!row.is_array() || row.size() != controls.size())
      bad_field("phi", "each row needs one amplitude per control channel");
    for (std::size_t k = 0; k < controls.size(); ++k)
      phi(l, static_cast<Eigen::Index>(k)) =
          as_real(row[k], "phi");
  }

  const json& target_json = require(doc, "target");
  const std::string target_name =
      as_string(require(target_json, "name"), "target.name");
  GateTarget target{"", {}};
  try {
    if (target_name == "custom")
      target = gate_target(
          parse_complex_matrix(require(target_json, "matrix"), "target.matrix"));
    else
      target = gate_target(target_name);
  } catch (const InputError& e) {
    throw FormatError(std::string("field \"target\": ") + e.what());
  }

  PulseMetadata metadata;
  if (doc.contains("metadata")) {
    const json& md = doc.at("metadata");
    if (!md.is_object()) bad_field("metadata", "expected an object");
    if (md.contains("fidelity"))
      metadata.fidelity = as_real(md.at("fidelity"), "metadata.fidelity");
    if (md.contains("quality")) {
      const json& q = md.at("quality");
      metadata.quality_name =
          as_string(require(q, "name"), "metadata.quality.name");
      metadata.quality_value =
          as_real(require(q, "value"), "metadata.quality.value");
    }
    if (md.contains("seed")) {
      const json& s = md.at("seed");
      if (!s.is_number_unsigned()) bad_field("metadata.seed", "expected a non-negative integer");
      metadata.seed = s.get<std::uint64_t>();
    }
    if (md.contains("tool_version"))
      metadata.tool_version =
          as_string(md.at("tool_version"), "metadata.tool_version");
  }

  try {
    HamiltonianSpec spec(n, std::move(drift), std::move(controls));
    PulseParams pulse{std::move(phi), dt, false};
    validate_pulse(spec, pulse);
    if (target.matrix.rows() != spec.dim())
      throw FormatError("field \"target\": dimension does not match n");
    return PulseFile{std::move(spec), std::move(pulse), std::move(target),
                     std::move(metadata)};
  } catch (const InputError& e) {
    throw FormatError(std::string("inconsistent pulse file: ") + e.what());
  }
}

void save_pulse(const std::string& path, const PulseFile& file) {
  const std::string text = pulse_to_json(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out << text;
  if (!out.good()) throw FormatError("failed writing '" + path + "'");
}

PulseFile load_pulse(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return pulse_from_json(buffer.str());
}

}  // namespace gecko
