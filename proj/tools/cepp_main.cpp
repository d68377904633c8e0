#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cepp/cep.hpp"
#include "cepp/equilibria.hpp"
#include "cepp/lyapunov.hpp"
#include "cepp/model.hpp"
#include "cepp/ode.hpp"
#include "cepp/report.hpp"
#include "cepp/stoichiometry.hpp"

namespace {

using namespace cepp;

constexpr int kExitValidation = 2;
constexpr int kExitInternal = 1;

struct CommonArgs {
  std::string model_path;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string format = "json";
};

MultiStrainModel load_model(const CommonArgs& args) {
  return MultiStrainModel::from_file(args.model_path);
}

RunManifest make_manifest(const std::string& command, const CommonArgs& args) {
  RunManifest manifest;
  manifest.command = command;
  manifest.model_path = args.model_path;
  manifest.model_hash = fnv1a_hex_of_file(args.model_path);
  manifest.seed = args.seed;
  return manifest;
}

void write_or_print(const CommonArgs& args, const std::string& filename, const std::string& body) {
  if (args.out_dir.empty()) {
    std::cout << body;
    return;
  }
  std::filesystem::create_directories(args.out_dir);
  const auto path = std::filesystem::path(args.out_dir) / filename;
  std::ofstream out(path, std::ios::binary);
  out << body;
  std::cout << "wrote " << path.string() << "\n";
}

std::vector<int> parse_node(const MultiStrainModel& model, const std::string& node) {
  std::vector<int> absent;
  if (node == "dfe" || node == "DFE") {
    for (int j = 0; j < model.strain_count(); ++j) absent.push_back(j);
    return absent;
  }
  if (node == "interior") return absent;
  std::vector<bool> present(model.strain_count(), false);
  std::stringstream ss(node);
  std::string token;
  while (std::getline(ss, token, ',')) {
    int found = -1;
    for (int j = 0; j < model.strain_count(); ++j)
      if (model.strain_name(j) == token) found = j;
    if (found < 0) {
      try {
        const int idx = std::stoi(token);
        if (idx >= 1 && idx <= model.strain_count()) found = idx - 1;
      } catch (...) {
      }
    }
    if (found < 0) throw InvalidArgument("unknown strain '" + token + "' in --node");
    present[found] = true;
  }
  for (int j = 0; j < model.strain_count(); ++j)
    if (!present[j]) absent.push_back(j);
  return absent;
}

int cmd_analyze(const CommonArgs& args) {
  const MultiStrainModel model = load_model(args);
  const ValidationReport validation = validate_assumptions(model);

  ClassifyOptions options;
  options.seed = args.seed;
  const CepReport report = classify_region(model, options);

  nlohmann::json j;
  RunManifest manifest = make_manifest("analyze", args);
  j["manifest"] = manifest.json();
  j["model"] = model.to_json();

  nlohmann::json checks = nlohmann::json::array();
  for (const auto& check : validation.checks)
    checks.push_back({{"name", check.name},
                      {"strain", check.strain + 1},
                      {"passed", check.passed},
                      {"witness", check.witness}});
  j["assumptions"] = checks;

  const Lattice lattice = build_lattice(model);
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : lattice.nodes) {
    nlohmann::json nj = equilibrium_json(model, node.equilibrium);
    nlohmann::json invasion = nlohmann::json::object();
    for (const auto& [strain, value] : node.invasion) invasion[model.strain_name(strain)] = value;
    nj["invasion_numbers"] = invasion;
    nodes.push_back(nj);
  }
  j["lattice"] = nodes;

  const FaceEquilibrium disease_free = dfe(model);
  const ReproductionData basic = reproduction_numbers(model, disease_free);
  nlohmann::json r0 = nlohmann::json::object();
  for (int k = 0; k < model.strain_count(); ++k) r0[model.strain_name(k)] = basic.at_state[k];
  j["basic_reproduction_numbers"] = r0;

  j["cep"] = cep_report_json(model, report);

  // human-readable summary on stdout, structured report per --format/--out
  std::ostringstream summary;
  summary << "model: " << args.model_path << " (" << model.strain_count() << " strains)\n";
  summary << "assumptions: " << (validation.all_passed() ? "all passed" : "FAILURES") << "\n";
  for (const auto& failure : validation.failures()) summary << "  ! " << failure << "\n";
  summary << "basic reproduction numbers:";
  for (int k = 0; k < model.strain_count(); ++k)
    summary << " R_" << model.strain_name(k) << " = " << format_double(basic.at_state[k]);
  summary << "\nwalk:";
  for (const auto& step : report.trace) {
    summary << " " << node_label(model, step.absent);
    if (step.removed_invader >= 0) summary << " ->";
  }
  summary << "\nattractor: " << report.attractor_label
          << "\ncertificate: " << to_string(report.certificate)
          << "\nalignment rank: " << report.alignment_rank << "\n";
  if (report.near_threshold) summary << "warning: near a threshold surface\n";

  if (args.format == "json" && args.out_dir.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << summary.str();
    if (!args.out_dir.empty()) {
      std::filesystem::create_directories(args.out_dir);
      const auto path = std::filesystem::path(args.out_dir) / "analyze.json";
      std::ofstream out(path, std::ios::binary);
      out << j.dump(2) << "\n";
      std::cout << "wrote " << path.string() << "\n";
    }
  }
  return validation.all_passed() ? 0 : kExitValidation;
}

int cmd_partition(const CommonArgs& args, const std::vector<std::string>& vary_specs) {
  const MultiStrainModel model = load_model(args);
  std::vector<ParamRange> vary;
  for (const auto& spec : vary_specs) {
    const auto eq_pos = spec.find('=');
    if (eq_pos == std::string::npos) throw InvalidArgument("--vary expects NAME=LO:HI:STEPS");
    ParamRange range;
    range.name = spec.substr(0, eq_pos);
    const std::string rest = spec.substr(eq_pos + 1);
    std::stringstream ss(rest);
    std::string lo, hi, steps;
    if (!std::getline(ss, lo, ':') || !std::getline(ss, hi, ':') || !std::getline(ss, steps))
      throw InvalidArgument("--vary expects NAME=LO:HI:STEPS");
    range.lo = parse_number_string(lo);
    range.hi = parse_number_string(hi);
    range.steps = std::stoi(steps);
    vary.push_back(range);
  }

  const auto rows = partition_sweep(model, vary);
  RunManifest manifest = make_manifest("partition", args);
  for (const auto& range : vary)
    manifest.parameters["vary_" + range.name] = format_double(range.lo) + ":" +
                                                format_double(range.hi) + ":" +
                                                std::to_string(range.steps);
  write_or_print(args, "partition.csv", sweep_csv(manifest, vary, rows));
  return 0;
}

int cmd_verify_lyap(const CommonArgs& args, const std::string& node, double delta,
                    std::size_t samples, const std::vector<std::string>& box_specs) {
  const MultiStrainModel model = load_model(args);
  const auto absent = parse_node(model, node);
  const FaceEquilibrium eq = face_equilibrium(model, absent);
  if (!eq.exists())
    throw InvalidArgument("face equilibrium at node '" + node + "' does not exist");
  const LyapunovCandidate candidate = build_candidate(model, eq, delta);

  ScanOptions options;
  options.samples = samples;
  options.seed = args.seed;
  if (!box_specs.empty()) {
    options.region.use_invariant_region = false;
    for (const auto& spec : box_specs) {
      const auto colon = spec.find(':');
      if (colon == std::string::npos) throw InvalidArgument("--box expects LO:HI per component");
      options.region.box.emplace_back(parse_number_string(spec.substr(0, colon)),
                                      parse_number_string(spec.substr(colon + 1)));
    }
  }

  RunManifest manifest = make_manifest("verify-lyap", args);
  manifest.parameters["node"] = node;
  manifest.parameters["delta"] = format_double(delta);
  manifest.parameters["samples"] = std::to_string(samples);

  VdotReport report;
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    const auto path = std::filesystem::path(args.out_dir) / "verify_samples.csv";
    std::ofstream csv(path, std::ios::binary);
    for (const auto& line : manifest.csv_lines()) csv << line << "\n";
    const bool with_terms = model.strain_count() == 2 && model.is_block(0) && model.is_block(1);
    csv << scan_csv_header(model, with_terms) << "\n";
    report = verify_nonpositivity(candidate, model, options, [&](const SampleRecord& record) {
      csv << scan_csv_row(record, with_terms) << "\n";
    });
    std::cout << "wrote " << path.string() << "\n";
  } else {
    report = verify_nonpositivity(candidate, model, options);
  }

  nlohmann::json j;
  j["manifest"] = manifest.json();
  j["node"] = node_label(model, absent);
  j["delta"] = delta;
  j["report"] = vdot_report_json(report);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& initial_spec, double horizon,
                 const std::string& node) {
  const MultiStrainModel model = load_model(args);
  ModelState initial(model.state_dim());
  if (initial_spec.empty()) throw InvalidArgument("--initial is required");
  std::stringstream ss(initial_spec);
  std::string token;
  int k = 0;
  while (std::getline(ss, token, ',')) {
    if (k >= model.state_dim()) throw InvalidArgument("--initial has too many components");
    initial(k++) = parse_number_string(token);
  }
  if (k != model.state_dim()) throw InvalidArgument("--initial has too few components");

  std::optional<LyapunovCandidate> candidate;
  IntegrateOptions options;
  if (!node.empty()) {
    const FaceEquilibrium eq = face_equilibrium(model, parse_node(model, node));
    if (!eq.exists()) throw InvalidArgument("candidate node '" + node + "' has no equilibrium");
    candidate = build_candidate(model, eq, 0.0);
    options.candidate = &*candidate;
  }

  const OrbitResult orbit = integrate(model, initial, horizon, options);
  RunManifest manifest = make_manifest("simulate", args);
  manifest.parameters["T"] = format_double(horizon);
  manifest.parameters["initial"] = initial_spec;
  if (!node.empty()) manifest.parameters["node"] = node;
  write_or_print(args, "orbit.csv", orbit_csv(manifest, model, orbit));
  return 0;
}

int cmd_siphons(const CommonArgs& args) {
  const MultiStrainModel model = load_model(args);
  const StoichiometricNetwork net = to_stoichiometric(model);
  const auto siphons = minimal_siphons(net);

  nlohmann::json j;
  RunManifest manifest = make_manifest("siphons", args);
  j["manifest"] = manifest.json();
  nlohmann::json species = nlohmann::json::array();
  for (const auto& name : net.species) species.push_back(name);
  j["species"] = species;
  j["chemical_condition"] = net.chemical_condition_holds();
  nlohmann::json list = nlohmann::json::array();
  for (const auto& siphon : siphons) {
    nlohmann::json names = nlohmann::json::array();
    for (int sp : siphon.species) names.push_back(net.species[sp]);
    list.push_back(names);
  }
  j["minimal_siphons"] = list;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov certificates and competitive-exclusion partitions for multi-strain "
               "compartmental models"};
  app.require_subcommand(1);

  CommonArgs args;
  std::vector<std::string> vary_specs;
  std::vector<std::string> box_specs;
  std::string node = "dfe";
  std::string sim_node;
  std::string initial_spec;
  double delta = 0.0;
  double horizon = 100.0;
  std::size_t samples = 100000;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--model", args.model_path, "model definition file (JSON)")->required();
    cmd->add_option("--seed", args.seed, "RNG seed");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--format", args.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  };

  auto* analyze = app.add_subcommand("analyze", "equilibria, thresholds, walk, certificates");
  add_common(analyze);

  auto* partition = app.add_subcommand("partition", "parameter-space partition sweep");
  add_common(partition);
  partition->add_option("--vary", vary_specs, "NAME=LO:HI:STEPS (repeatable, max 2)")
      ->required()
      ->expected(1, 2);

  auto* verify = app.add_subcommand("verify-lyap", "sampling scan of a Lyapunov candidate");
  add_common(verify);
  verify->add_option("--node", node, "dfe | interior | comma list of present strains");
  verify->add_option("--delta", delta, "cross-equilibrium augmentation weight");
  verify->add_option("--samples", samples, "scan size");
  verify->add_option("--box", box_specs, "LO:HI per state component (overrides the invariant region)");

  auto* simulate = app.add_subcommand("simulate", "integrate an orbit");
  add_common(simulate);
  simulate->add_option("--initial", initial_spec, "comma-separated initial state")->required();
  simulate->add_option("--T", horizon, "horizon");
  simulate->add_option("--node", sim_node, "attach the candidate at this node (V column)");

  auto* siphons = app.add_subcommand("siphons", "minimal siphons of the stoichiometric network");
  add_common(siphons);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(args);
    if (partition->parsed()) return cmd_partition(args, vary_specs);
    if (verify->parsed()) return cmd_verify_lyap(args, node, delta, samples, box_specs);
    if (simulate->parsed()) return cmd_simulate(args, initial_spec, horizon, sim_node);
    if (siphons->parsed()) return cmd_siphons(args);
  } catch (const cepp::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const cepp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
