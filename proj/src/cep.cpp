#include "cepp/cep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace cepp {

namespace {

std::vector<int> mask_to_absent(unsigned mask, int n) {
  std::vector<int> absent;
  for (int j = 0; j < n; ++j)
    if (mask & (1u << j)) absent.push_back(j);
  return absent;
}

std::vector<std::pair<int, double>> invasion_numbers(const MultiStrainModel& model,
                                                     const FaceEquilibrium& eq) {
  std::vector<std::pair<int, double>> out;
  if (!eq.exists()) return out;
  const double s = eq.state(0);
  for (int j : eq.absent) out.emplace_back(j, s * model.reproduction_slope(j));
  return out;
}

int block_count(const MultiStrainModel& model) {
  int n = 0;
  for (int j = 0; j < model.strain_count(); ++j)
    if (model.is_block(j)) ++n;
  return n;
}

struct WalkOutcome {
  std::vector<WalkStep> trace;
  LatticeNode terminal;
  std::vector<CepReport> branches;
  bool tie_seen = false;
};

WalkOutcome walk_from(const MultiStrainModel& model, std::vector<int> absent,
                      std::vector<WalkStep> trace);

CepReport report_from_outcome(const MultiStrainModel& model, WalkOutcome outcome) {
  CepReport report;
  report.trace = std::move(outcome.trace);
  report.terminal = std::move(outcome.terminal);
  report.branches = std::move(outcome.branches);
  report.attractor_label = node_label(model, report.terminal.absent);
  return report;
}

WalkOutcome walk_from(const MultiStrainModel& model, std::vector<int> absent,
                      std::vector<WalkStep> trace) {
  FaceEquilibrium eq = face_equilibrium(model, absent);
  if (!eq.exists()) {
    std::ostringstream os;
    os << "walk reached a node without a computable face equilibrium (absent = {";
    for (std::size_t k = 0; k < absent.size(); ++k)
      os << (k ? "," : "") << model.strain_name(absent[k]);
    os << "}, status = " << static_cast<int>(eq.status) << "); trace so far:";
    for (const auto& step : trace)
      os << " -> remove " << (step.removed_invader >= 0 ? model.strain_name(step.removed_invader) : "-");
    throw Error(os.str());
  }

  auto invasions = invasion_numbers(model, eq);
  WalkStep here;
  here.absent = absent;
  here.s_level = eq.state(0);

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [j, r] : invasions) best = std::max(best, r);
  if (invasions.empty() || best <= 1.0 + kWalkTieTolerance) {
    here.removed_invader = -1;
    trace.push_back(here);
    WalkOutcome outcome;
    outcome.trace = std::move(trace);
    outcome.terminal = LatticeNode{absent, std::move(eq), std::move(invasions)};
    return outcome;
  }

  std::vector<std::pair<int, double>> dominant;
  for (const auto& [j, r] : invasions)
    if (best - r < kWalkTieTolerance) dominant.emplace_back(j, r);

  auto descend = [&](int strain, double number) {
    WalkStep step = here;
    step.removed_invader = strain;
    step.invasion_number = number;
    std::vector<int> next;
    for (int a : absent)
      if (a != strain) next.push_back(a);
    auto next_trace = trace;
    next_trace.push_back(step);
    return walk_from(model, std::move(next), std::move(next_trace));
  };

  WalkOutcome outcome = descend(dominant.front().first, dominant.front().second);
  if (dominant.size() > 1) {
    outcome.tie_seen = true;
    for (std::size_t k = 1; k < dominant.size(); ++k)
      outcome.branches.push_back(
          report_from_outcome(model, descend(dominant[k].first, dominant[k].second)));
  }
  return outcome;
}

}  // namespace

std::string to_string(Certificate c) {
  switch (c) {
    case Certificate::GlobalProved:
      return "GlobalProved";
    case Certificate::LocalOnly:
      return "LocalOnly";
    case Certificate::Obstructed:
      return "Obstructed";
  }
  return "?";
}

std::string node_label(const MultiStrainModel& model, const std::vector<int>& absent) {
  std::vector<int> present;
  for (int j = 0; j < model.strain_count(); ++j)
    if (std::find(absent.begin(), absent.end(), j) == absent.end()) present.push_back(j);
  if (present.empty()) return "DFE";
  std::string label = "E_";
  for (std::size_t k = 0; k < present.size(); ++k) {
    if (k) label += "+";
    label += model.strain_name(present[k]);
  }
  return label;
}

Lattice build_lattice(const MultiStrainModel& model) {
  const int n = model.strain_count();
  if (n > 12) throw InvalidArgument("lattice construction capped at 12 strains");
  Lattice lattice;
  lattice.strain_count = n;
  lattice.nodes.resize(1u << n);
  for (unsigned mask = 0; mask < lattice.nodes.size(); ++mask) {
    auto absent = mask_to_absent(mask, n);
    FaceEquilibrium eq = face_equilibrium(model, absent);
    auto invasions = invasion_numbers(model, eq);
    lattice.nodes[mask] = LatticeNode{std::move(absent), std::move(eq), std::move(invasions)};
  }
  return lattice;
}

CepReport cep_walk(const MultiStrainModel& model) {
  std::vector<int> all;
  for (int j = 0; j < model.strain_count(); ++j) all.push_back(j);
  WalkOutcome outcome = walk_from(model, std::move(all), {});
  const bool tie = outcome.tie_seen;
  CepReport report = report_from_outcome(model, std::move(outcome));
  report.near_threshold = tie;

  // region inequalities: each removal crossed threshold 1 upward, the
  // terminal node sits below threshold on every absent strain
  for (const auto& step : report.trace) {
    if (step.removed_invader < 0) continue;
    report.region_inequalities.push_back({"R_" + model.strain_name(step.removed_invader) + "(" +
                                              node_label(model, step.absent) + ")",
                                          step.invasion_number, 1.0, '>'});
  }
  for (const auto& [j, r] : report.terminal.invasion)
    report.region_inequalities.push_back({"R_" + model.strain_name(j) + "(" +
                                              node_label(model, report.terminal.absent) + ")",
                                          r, 1.0, '<'});
  for (const auto& rec : report.region_inequalities)
    if (rec.margin() < kThresholdBand) report.near_threshold = true;
  if (report.terminal.equilibrium.near_nonhyperbolic) report.near_threshold = true;
  return report;
}

CepReport classify_region(const MultiStrainModel& model, const ClassifyOptions& options) {
  CepReport report = cep_walk(model);
  report.seed = options.seed;

  const auto alignment = perron_alignment(model, report.terminal.equilibrium, 32, options.seed);
  report.alignment_rank = alignment.numerical_rank;

  // theorem coverage: concave scalar families of any size, and at most one
  // rank-one block alongside scalar strains
  const bool covered = block_count(model) <= 1;
  if (report.near_threshold) {
    report.certificate = Certificate::LocalOnly;
  } else if (covered) {
    report.certificate = Certificate::GlobalProved;
  } else if (options.run_verification) {
    const LyapunovCandidate candidate = build_candidate(model, report.terminal.equilibrium, 0.0);
    ScanOptions scan;
    scan.samples = options.verify_samples;
    scan.seed = options.seed;
    const VdotReport verdict = verify_nonpositivity(candidate, model, scan);
    report.certificate =
        verdict.violation_count > 0 ? Certificate::Obstructed : Certificate::LocalOnly;
  } else {
    report.certificate = Certificate::LocalOnly;
  }
  return report;
}

MultiStrainModel with_parameter(const MultiStrainModel& base, const std::string& name,
                                double value) {
  double lambda = base.lambda();
  double mu = base.mu();
  std::vector<StrainSpec> strains;
  std::vector<std::string> names;
  for (int j = 0; j < base.strain_count(); ++j) {
    strains.push_back(base.strain(j));
    names.push_back(base.strain_name(j));
  }

  if (name == "lambda") {
    lambda = value;
  } else if (name == "mu") {
    mu = value;
  } else {
    static const std::vector<std::string> kPrefixes = {"beta", "v", "alpha"};
    std::string prefix;
    int index = -1;
    for (const auto& p : kPrefixes)
      if (name.rfind(p, 0) == 0 && name.size() > p.size()) {
        bool digits = true;
        for (std::size_t k = p.size(); k < name.size(); ++k)
          if (!std::isdigit(static_cast<unsigned char>(name[k]))) digits = false;
        if (digits) {
          prefix = p;
          index = std::stoi(name.substr(p.size())) - 1;
        }
      }
    if (index < 0 || index >= base.strain_count())
      throw InvalidArgument("unknown sweep parameter '" + name + "'");
    if (!base.is_scalar(index))
      throw InvalidArgument("sweep parameter '" + name + "' addresses a non-scalar strain");
    ScalarStrain strain = base.scalar(index);
    if (prefix == "beta") {
      strain.beta = value;
    } else if (prefix == "v") {
      strain.v = value;
    } else {
      if (strain.incidence.kind() != IncidenceKind::MichaelisMenten)
        throw InvalidArgument("alpha sweep needs Michaelis-Menten incidence on strain " +
                              std::to_string(index + 1));
      strain.incidence = IncidenceFunction::michaelis_menten(value);
    }
    strains[index] = strain;
  }
  return MultiStrainModel(lambda, mu, std::move(strains), std::move(names));
}

std::vector<SweepRow> partition_sweep(const MultiStrainModel& base,
                                      const std::vector<ParamRange>& vary, int threads) {
  if (vary.empty() || vary.size() > 2)
    throw InvalidArgument("partition sweep varies one or two parameters");
  for (const auto& range : vary)
    if (range.steps < 1) throw InvalidArgument("sweep steps must be >= 1");

  std::size_t total = 1;
  for (const auto& range : vary) total *= static_cast<std::size_t>(range.steps);
  if (total > 1000000) throw InvalidArgument("sweep grid capped at 1e6 points");

  auto value_at = [](const ParamRange& range, int k) {
    if (range.steps == 1) return range.lo;
    return range.lo + (range.hi - range.lo) * k / static_cast<double>(range.steps - 1);
  };

  std::vector<SweepRow> rows(total);
  auto run_point = [&](std::size_t flat) {
    std::vector<double> values;
    MultiStrainModel model = base;
    std::size_t rest = flat;
    for (const auto& range : vary) {
      const int k = static_cast<int>(rest % range.steps);
      rest /= range.steps;
      const double value = value_at(range, k);
      values.push_back(value);
      model = with_parameter(model, range.name, value);
    }
    CepReport report = cep_walk(model);

    double margin = std::numeric_limits<double>::infinity();
    for (const auto& rec : report.region_inequalities)
      margin = std::min(margin, rec.margin() / std::max(1.0, std::abs(rec.threshold)));

    SweepRow row;
    row.values = std::move(values);
    row.attractor = report.attractor_label;
    row.margin = margin;
    const bool threshold_cell = margin < kSweepThresholdMargin || !report.branches.empty();
    row.region_label = threshold_cell ? "threshold" : report.attractor_label;
    row.certificate = (block_count(model) <= 1 && !threshold_cell) ? Certificate::GlobalProved
                                                                   : Certificate::LocalOnly;
    row.walk_length = static_cast<int>(report.trace.size()) - 1;
    row.terminal_ok = true;
    for (const auto& [j, r] : report.terminal.invasion)
      if (r > 1.0 + kWalkTieTolerance) row.terminal_ok = false;
    row.s_strictly_decreasing = true;
    for (std::size_t k = 1; k < report.trace.size(); ++k)
      if (!(report.trace[k].s_level < report.trace[k - 1].s_level)) row.s_strictly_decreasing = false;
    rows[flat] = std::move(row);
  };

  const int workers = threads > 0 ? threads : worker_count();
  if (workers <= 1 || total < 64) {
    for (std::size_t flat = 0; flat < total; ++flat) run_point(flat);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(total, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        for (std::size_t flat = begin; flat < end; ++flat) run_point(flat);
      });
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace cepp
