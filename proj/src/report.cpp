#include "cepp/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cepp {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fnv1a_hex_of_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open file for hashing: " + path);
  std::uint64_t hash = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
  return buf;
}

nlohmann::json RunManifest::json() const {
  nlohmann::json j;
  j["command"] = command;
  j["model"] = model_path;
  j["model_hash"] = model_hash;
  j["seed"] = seed;
  j["version"] = version;
  j["parameters"] = parameters;
  return j;
}

std::vector<std::string> RunManifest::csv_lines() const {
  std::vector<std::string> lines;
  lines.push_back("# command: " + command);
  lines.push_back("# model: " + model_path);
  lines.push_back("# model_hash: " + model_hash);
  lines.push_back("# seed: " + std::to_string(seed));
  lines.push_back("# version: " + version);
  for (const auto& [key, value] : parameters) lines.push_back("# " + key + ": " + value);
  return lines;
}

namespace {

nlohmann::json state_json(const ModelState& state) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index k = 0; k < state.size(); ++k) arr.push_back(state(k));
  return arr;
}

nlohmann::json inequalities_json(const std::vector<InequalityRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json j;
    j["quantity"] = rec.quantity;
    j["value"] = rec.value;
    j["threshold"] = rec.threshold;
    j["direction"] = std::string(1, rec.direction);
    j["satisfied"] = rec.satisfied();
    j["margin"] = rec.margin();
    arr.push_back(j);
  }
  return arr;
}

std::string status_string(FaceStatus status) {
  switch (status) {
    case FaceStatus::Exists:
      return "exists";
    case FaceStatus::NotExisting:
      return "not_existing";
    case FaceStatus::Degenerate:
      return "degenerate_continuum";
    case FaceStatus::Unsupported:
      return "unsupported";
  }
  return "?";
}

}  // namespace

nlohmann::json equilibrium_json(const MultiStrainModel& model, const FaceEquilibrium& eq) {
  nlohmann::json j;
  j["node"] = node_label(model, eq.absent);
  nlohmann::json absent = nlohmann::json::array();
  for (int a : eq.absent) absent.push_back(model.strain_name(a));
  j["absent"] = absent;
  j["status"] = status_string(eq.status);
  j["exists"] = eq.exists();
  j["near_nonhyperbolic"] = eq.near_nonhyperbolic;
  if (eq.exists()) {
    j["state"] = state_json(eq.state);
    j["residual"] = eq.residual;
  }
  j["existence_conditions"] = inequalities_json(eq.existence_conditions);
  return j;
}

nlohmann::json cep_report_json(const MultiStrainModel& model, const CepReport& report) {
  nlohmann::json j;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& step : report.trace) {
    nlohmann::json sj;
    sj["node"] = node_label(model, step.absent);
    sj["s"] = step.s_level;
    if (step.removed_invader >= 0) {
      sj["removed_invader"] = model.strain_name(step.removed_invader);
      sj["invasion_number"] = step.invasion_number;
    }
    trace.push_back(sj);
  }
  j["trace"] = trace;
  j["attractor"] = report.attractor_label;
  j["terminal"] = equilibrium_json(model, report.terminal.equilibrium);
  nlohmann::json invasion = nlohmann::json::object();
  for (const auto& [strain, value] : report.terminal.invasion)
    invasion[model.strain_name(strain)] = value;
  j["terminal_invasion_numbers"] = invasion;
  j["region_inequalities"] = inequalities_json(report.region_inequalities);
  j["certificate"] = to_string(report.certificate);
  j["near_threshold"] = report.near_threshold;
  j["alignment_rank"] = report.alignment_rank;
  if (!report.branches.empty()) {
    nlohmann::json branches = nlohmann::json::array();
    for (const auto& branch : report.branches) branches.push_back(cep_report_json(model, branch));
    j["branches"] = branches;
  }
  return j;
}

nlohmann::json vdot_report_json(const VdotReport& report) {
  nlohmann::json j;
  j["sample_count"] = report.sample_count;
  j["max_vdot"] = report.max_vdot;
  j["violation_count"] = report.violation_count;
  j["violation_tolerance"] = report.violation_tolerance;
  j["seed"] = report.seed;
  j["entropy_clamp_fraction"] = report.clamp_note;
  if (report.argmax.size() > 0) j["argmax_state"] = state_json(report.argmax);
  if (report.terms_at_argmax.valid) {
    j["terms_at_argmax"] = {{"T1", report.terms_at_argmax.t1},
                            {"T2", report.terms_at_argmax.t2},
                            {"T3", report.terms_at_argmax.t3},
                            {"T4", report.terms_at_argmax.t4}};
  }
  return j;
}

std::string scan_csv_header(const MultiStrainModel& model, bool with_terms) {
  std::ostringstream os;
  os << "sampleIndex";
  os << ",s";
  for (int j = 0; j < model.strain_count(); ++j) {
    if (model.is_scalar(j)) {
      os << ",i_" << model.strain_name(j);
    } else {
      for (int k = 0; k < model.strain_dim(j); ++k)
        os << ",z_" << model.strain_name(j) << k + 1;
    }
  }
  os << ",V,Vdot";
  if (with_terms) os << ",T1,T2,T3,T4";
  return os.str();
}

std::string scan_csv_row(const SampleRecord& record, bool with_terms) {
  std::ostringstream os;
  os << record.index;
  for (Eigen::Index k = 0; k < record.state.size(); ++k) os << "," << format_double(record.state(k));
  os << "," << format_double(record.value) << "," << format_double(record.vdot);
  if (with_terms) {
    os << "," << format_double(record.terms.t1) << "," << format_double(record.terms.t2) << ","
       << format_double(record.terms.t3) << "," << format_double(record.terms.t4);
  }
  return os.str();
}

std::string orbit_csv(const RunManifest& manifest, const MultiStrainModel& model,
                      const OrbitResult& orbit) {
  std::ostringstream os;
  for (const auto& line : manifest.csv_lines()) os << line << "\n";
  os << "t,s";
  for (int j = 0; j < model.strain_count(); ++j) {
    if (model.is_scalar(j)) {
      os << ",i_" << model.strain_name(j);
    } else {
      for (int k = 0; k < model.strain_dim(j); ++k) os << ",z_" << model.strain_name(j) << k + 1;
    }
  }
  const bool with_v = !orbit.lyapunov_values.empty();
  if (with_v) os << ",V";
  os << "\n";
  for (std::size_t row = 0; row < orbit.times.size(); ++row) {
    os << format_double(orbit.times[row]);
    for (Eigen::Index k = 0; k < orbit.states[row].size(); ++k)
      os << "," << format_double(orbit.states[row](k));
    if (with_v) os << "," << format_double(orbit.lyapunov_values[row]);
    os << "\n";
  }
  return os.str();
}

std::string sweep_csv(const RunManifest& manifest, const std::vector<ParamRange>& vary,
                      const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  for (const auto& line : manifest.csv_lines()) os << line << "\n";
  for (const auto& range : vary) os << range.name << ",";
  os << "regionLabel,attractorNode,marginToThreshold,certificate\n";
  for (const auto& row : rows) {
    for (double v : row.values) os << format_double(v) << ",";
    os << row.region_label << "," << row.attractor << "," << format_double(row.margin) << ","
       << to_string(row.certificate) << "\n";
  }
  return os.str();
}

}  // namespace cepp
