#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cepp/cep.hpp"
#include "cepp/equilibria.hpp"
#include "cepp/lyapunov.hpp"
#include "cepp/model.hpp"
#include "cepp/ode.hpp"

namespace cepp {

/// Reproducibility header embedded in every emitted artifact. No timestamps:
/// identical inputs and seeds must produce byte-identical outputs.
struct RunManifest {
  std::string command;
  std::string model_path;
  std::string model_hash;  ///< FNV-1a 64 of the model file bytes, hex
  std::uint64_t seed = 0;
  std::string version = CEPP_VERSION;
  std::map<std::string, std::string> parameters;

  nlohmann::json json() const;
  /// '#'-prefixed comment lines for CSV headers.
  std::vector<std::string> csv_lines() const;
};

std::string fnv1a_hex_of_file(const std::string& path);

/// Fixed shortest-roundtrip formatting so outputs are byte-stable.
std::string format_double(double v);

nlohmann::json equilibrium_json(const MultiStrainModel& model, const FaceEquilibrium& eq);
nlohmann::json cep_report_json(const MultiStrainModel& model, const CepReport& report);
nlohmann::json vdot_report_json(const VdotReport& report);

/// Scan CSV columns: sampleIndex, state components, V, Vdot, T1..T4.
std::string scan_csv_header(const MultiStrainModel& model, bool with_terms);
std::string scan_csv_row(const SampleRecord& record, bool with_terms);

/// Orbit CSV columns: t, state components, V when a candidate is attached.
std::string orbit_csv(const RunManifest& manifest, const MultiStrainModel& model,
                      const OrbitResult& orbit);

std::string sweep_csv(const RunManifest& manifest, const std::vector<ParamRange>& vary,
                      const std::vector<SweepRow>& rows);

}  // namespace cepp
