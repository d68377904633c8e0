#include "cepp/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cepp {

namespace {

double json_number(const nlohmann::json& j, const std::string& context) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_number_string(j.get<std::string>());
  throw InvalidArgument("expected a number or \"p/q\" string for " + context);
}

Vector json_vector(const nlohmann::json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(context + " must be a nonempty array");
  Vector v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) v(k) = json_number(j[k], context);
  return v;
}

}  // namespace

MultiStrainModel::MultiStrainModel(double lambda, double mu, std::vector<StrainSpec> strains,
                                   std::vector<std::string> strain_names)
    : lambda_(lambda), mu_(mu), strains_(std::move(strains)), names_(std::move(strain_names)) {
  if (!(lambda_ > 0.0)) throw InvalidArgument("model requires lambda > 0");
  if (!(mu_ > 0.0)) throw InvalidArgument("model requires mu > 0");
  if (names_.empty())
    for (std::size_t j = 0; j < strains_.size(); ++j) names_.push_back(std::to_string(j + 1));
  if (names_.size() != strains_.size())
    throw InvalidArgument("strain_names size mismatch");

  int offset = 1;  // s occupies index 0
  for (std::size_t j = 0; j < strains_.size(); ++j) {
    offsets_.push_back(offset);
    if (const auto* sc = std::get_if<ScalarStrain>(&strains_[j])) {
      if (!(sc->beta > 0.0) || !(sc->v > 0.0))
        throw InvalidArgument("scalar strain rates must be strictly positive");
      offset += 1;
    } else {
      const auto& blk = std::get<RankOneBlockStrain>(strains_[j]);
      const auto n = blk.w.size();
      if (n == 0 || blk.ell.size() != n || blk.vdiag.size() != n)
        throw InvalidArgument("rank-one block vectors must share a positive dimension");
      if (!(blk.w.minCoeff() > 0.0) || !(blk.ell.minCoeff() > 0.0) || !(blk.vdiag.minCoeff() > 0.0))
        throw InvalidArgument("rank-one block vectors must be strictly positive");
      if (std::abs(blk.w.sum() - 1.0) > 1e-9)
        throw InvalidArgument("rank-one block weights w must sum to 1");
      offset += static_cast<int>(n);
    }
  }
  state_dim_ = offset;
}

bool MultiStrainModel::is_scalar(int j) const {
  return std::holds_alternative<ScalarStrain>(strains_.at(j));
}

bool MultiStrainModel::is_block(int j) const {
  return std::holds_alternative<RankOneBlockStrain>(strains_.at(j));
}

const ScalarStrain& MultiStrainModel::scalar(int j) const {
  if (!is_scalar(j)) throw InvalidArgument("strain " + std::to_string(j) + " is not scalar");
  return std::get<ScalarStrain>(strains_[j]);
}

const RankOneBlockStrain& MultiStrainModel::block(int j) const {
  if (!is_block(j)) throw InvalidArgument("strain " + std::to_string(j) + " is not a block");
  return std::get<RankOneBlockStrain>(strains_[j]);
}

int MultiStrainModel::strain_dim(int j) const {
  return is_scalar(j) ? 1 : static_cast<int>(block(j).w.size());
}

double MultiStrainModel::removal_rate_min(int j) const {
  return is_scalar(j) ? scalar(j).v : block(j).vdiag.minCoeff();
}

bool MultiStrainModel::a2_holds() const {
  for (int j = 0; j < strain_count(); ++j)
    if (mu_ > removal_rate_min(j) + 1e-15) return false;
  return true;
}

double MultiStrainModel::reproduction_slope(int j) const {
  if (is_scalar(j)) return scalar(j).beta / scalar(j).v;
  const auto& blk = block(j);
  return blk.ell.cwiseQuotient(blk.vdiag).dot(blk.w);
}

MultiStrainModel MultiStrainModel::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("model file must contain a JSON object");
  for (const auto& key : {"lambda", "mu", "strains"})
    if (!j.contains(key)) throw InvalidArgument(std::string("model file missing field '") + key + "'");
  const double lambda = json_number(j.at("lambda"), "lambda");
  const double mu = json_number(j.at("mu"), "mu");
  std::vector<StrainSpec> strains;
  std::vector<std::string> names;
  if (!j.at("strains").is_array()) throw InvalidArgument("'strains' must be an array");
  int index = 0;
  for (const auto& sj : j.at("strains")) {
    ++index;
    const std::string where = "strains[" + std::to_string(index - 1) + "]";
    if (!sj.is_object() || !sj.contains("type"))
      throw InvalidArgument(where + " must be an object with a 'type'");
    const std::string type = sj.at("type").get<std::string>();
    names.push_back(sj.contains("name") ? sj.at("name").get<std::string>() : std::to_string(index));
    if (type == "scalar") {
      IncidenceFunction inc = IncidenceFunction::linear();
      if (sj.contains("incidence")) {
        const auto& ij = sj.at("incidence");
        const std::string kind = ij.at("kind").get<std::string>();
        if (kind == "linear") {
          inc = IncidenceFunction::linear();
        } else if (kind == "michaelis_menten") {
          inc = IncidenceFunction::michaelis_menten(json_number(ij.at("alpha"), where + ".alpha"));
        } else if (kind == "tabulated") {
          std::vector<std::pair<double, double>> pts;
          for (const auto& p : ij.at("points"))
            pts.emplace_back(json_number(p.at(0), "point"), json_number(p.at(1), "point"));
          inc = IncidenceFunction::tabulated(std::move(pts));
        } else {
          throw InvalidArgument(where + ": unknown incidence kind '" + kind + "'");
        }
      }
      strains.push_back(ScalarStrain{json_number(sj.at("beta"), where + ".beta"),
                                     json_number(sj.at("v"), where + ".v"), inc});
    } else if (type == "rank1") {
      strains.push_back(RankOneBlockStrain{json_vector(sj.at("w"), where + ".w"),
                                           json_vector(sj.at("ell"), where + ".ell"),
                                           json_vector(sj.at("vdiag"), where + ".vdiag")});
    } else {
      throw InvalidArgument(where + ": unknown strain type '" + type + "'");
    }
  }
  return MultiStrainModel(lambda, mu, std::move(strains), std::move(names));
}

MultiStrainModel MultiStrainModel::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("model file parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json MultiStrainModel::to_json() const {
  nlohmann::json j;
  j["lambda"] = lambda_;
  j["mu"] = mu_;
  j["strains"] = nlohmann::json::array();
  for (int k = 0; k < strain_count(); ++k) {
    nlohmann::json sj;
    sj["name"] = names_[k];
    if (is_scalar(k)) {
      const auto& sc = scalar(k);
      sj["type"] = "scalar";
      sj["beta"] = sc.beta;
      sj["v"] = sc.v;
      switch (sc.incidence.kind()) {
        case IncidenceKind::Linear:
          sj["incidence"] = {{"kind", "linear"}};
          break;
        case IncidenceKind::MichaelisMenten:
          sj["incidence"] = {{"kind", "michaelis_menten"}, {"alpha", sc.incidence.alpha()}};
          break;
        case IncidenceKind::TabulatedConcave: {
          nlohmann::json pts = nlohmann::json::array();
          for (const auto& p : sc.incidence.points()) pts.push_back({p.first, p.second});
          sj["incidence"] = {{"kind", "tabulated"}, {"points", pts}};
          break;
        }
      }
    } else {
      const auto& blk = block(k);
      sj["type"] = "rank1";
      sj["w"] = std::vector<double>(blk.w.data(), blk.w.data() + blk.w.size());
      sj["ell"] = std::vector<double>(blk.ell.data(), blk.ell.data() + blk.ell.size());
      sj["vdiag"] = std::vector<double>(blk.vdiag.data(), blk.vdiag.data() + blk.vdiag.size());
    }
    j["strains"].push_back(sj);
  }
  return j;
}

Vector vector_field(const MultiStrainModel& model, const ModelState& state) {
  const int dim = model.state_dim();
  if (state.size() != dim) throw InvalidArgument("state dimension mismatch");
  const double s = state(0);
  Vector out = Vector::Zero(dim);
  double infection_drain = 0.0;
  for (int j = 0; j < model.strain_count(); ++j) {
    const int off = model.strain_offset(j);
    if (model.is_scalar(j)) {
      const auto& sc = model.scalar(j);
      const double inflow = sc.beta * s * sc.incidence.value(state(off));
      out(off) = inflow - sc.v * state(off);
      infection_drain += inflow;
    } else {
      const auto& blk = model.block(j);
      const int n = static_cast<int>(blk.w.size());
      const auto z = state.segment(off, n);
      const double phi = blk.ell.dot(z);
      for (int k = 0; k < n; ++k) out(off + k) = s * blk.w(k) * phi - blk.vdiag(k) * z(k);
      infection_drain += s * phi;
    }
  }
  out(0) = model.lambda() - model.mu() * s - infection_drain;
  return out;
}

Matrix model_jacobian(const MultiStrainModel& model, const ModelState& state) {
  const int dim = model.state_dim();
  Matrix jac = Matrix::Zero(dim, dim);
  const double s = state(0);
  jac(0, 0) = -model.mu();
  for (int j = 0; j < model.strain_count(); ++j) {
    const int off = model.strain_offset(j);
    if (model.is_scalar(j)) {
      const auto& sc = model.scalar(j);
      const double i = state(off);
      // derivative of the incidence by a central difference scaled to i
      const double h = std::max(1e-8, 1e-8 * std::abs(i));
      const double fp = (sc.incidence.value(i + h) - sc.incidence.value(std::max(0.0, i - h))) /
                        (h + std::min(i, h));
      const double f = sc.incidence.value(i);
      jac(0, 0) -= sc.beta * f;
      jac(0, off) = -sc.beta * s * fp;
      jac(off, 0) = sc.beta * f;
      jac(off, off) = sc.beta * s * fp - sc.v;
    } else {
      const auto& blk = model.block(j);
      const int n = static_cast<int>(blk.w.size());
      const auto z = state.segment(off, n);
      const double phi = blk.ell.dot(z);
      jac(0, 0) -= phi;
      for (int k = 0; k < n; ++k) {
        jac(0, off + k) = -s * blk.ell(k);
        jac(off + k, 0) = blk.w(k) * phi;
        for (int m = 0; m < n; ++m) jac(off + k, off + m) = s * blk.w(k) * blk.ell(m);
        jac(off + k, off + k) -= blk.vdiag(k);
      }
    }
  }
  return jac;
}

bool ValidationReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::vector<std::string> ValidationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(c.name + (c.strain >= 0 ? " (strain " + std::to_string(c.strain + 1) + ")" : "") +
                                 ": " + c.witness);
  return out;
}

ValidationReport validate_assumptions(const MultiStrainModel& model) {
  ValidationReport report;
  const double hi = 10.0 * model.carrying_level();
  constexpr int kGrid = 200;

  // (A2) exact
  {
    AssumptionCheck c{"A2: mu <= min removal rate", -1, model.a2_holds(), ""};
    if (!c.passed) {
      std::ostringstream os;
      os << "mu = " << model.mu() << " exceeds a removal rate";
      c.witness = os.str();
    }
    report.checks.push_back(c);
  }

  for (int j = 0; j < model.strain_count(); ++j) {
    if (!model.is_scalar(j)) continue;  // block incidence is bilinear, (A1)/(A3)/(A4) hold structurally
    const auto& inc = model.scalar(j).incidence;

    auto grid_point = [&](int k) {
      const double lo = std::log(hi) - std::log(1e6);
      return std::exp(lo + (std::log(hi) - lo) * (k + 1) / static_cast<double>(kGrid));
    };

    // (A1): f(0) = 0 and forward-difference slope 1 at 0
    {
      const double h = 1e-7;
      const double slope = (inc.value(h) - inc.value(0.0)) / h;
      AssumptionCheck c{"A1: f(0)=0, f'(0)=1", j, true, ""};
      if (inc.value(0.0) != 0.0 || std::abs(slope - 1.0) > 1e-5) {
        c.passed = false;
        std::ostringstream os;
        os << "f(0) = " << inc.value(0.0) << ", forward slope at 0 = " << slope;
        c.witness = os.str();
      }
      report.checks.push_back(c);
    }

    // (A3): f(i) <= i on the grid
    {
      AssumptionCheck c{"A3: f(i) <= i", j, true, ""};
      for (int k = 0; k < kGrid; ++k) {
        const double i = grid_point(k);
        if (inc.value(i) > i + 1e-12 * (1.0 + i)) {
          c.passed = false;
          std::ostringstream os;
          os << "f(" << i << ") = " << inc.value(i) << " > i";
          c.witness = os.str();
          break;
        }
      }
      report.checks.push_back(c);
    }

    // (A4): increasing and concave on the grid
    {
      AssumptionCheck c{"A4: f increasing and concave", j, true, ""};
      double prev_i = 0.0, prev_f = 0.0;
      double prev_slope = std::numeric_limits<double>::infinity();
      for (int k = 0; k < kGrid; ++k) {
        const double i = grid_point(k);
        const double f = inc.value(i);
        const double slope = (f - prev_f) / (i - prev_i);
        if (f < prev_f - 1e-12 || slope > prev_slope + 1e-9) {
          c.passed = false;
          std::ostringstream os;
          os << "violation near i = " << i;
          c.witness = os.str();
          break;
        }
        prev_i = i;
        prev_f = f;
        prev_slope = slope;
      }
      report.checks.push_back(c);
    }

    // g nonincreasing; the linear case (g == 1) is flagged, not failed
    {
      AssumptionCheck c{"g = f(i)/i nonincreasing", j, true, ""};
      bool constant_one = true;
      double prev_g = 1.0;
      for (int k = 0; k < kGrid; ++k) {
        const double i = grid_point(k);
        const double g = inc.slope_ratio(i);
        if (std::abs(g - 1.0) > 1e-12) constant_one = false;
        if (g > prev_g + 1e-10) {
          c.passed = false;
          std::ostringstream os;
          os << "g increases near i = " << i;
          c.witness = os.str();
          break;
        }
        prev_g = g;
      }
      if (c.passed && constant_one) c.witness = "linear case: g == 1";
      report.checks.push_back(c);
    }
  }
  return report;
}

InvariantRegion invariant_region(const MultiStrainModel& model) {
  return InvariantRegion{model.carrying_level(), model.a2_holds(), model.state_dim()};
}

bool InvariantRegion::contains(const ModelState& state, double tol) const {
  if ((state.array() < -tol).any()) return false;
  return state.sum() <= bound + tol;
}

ModelState InvariantRegion::sample_at(const CounterRng& rng, std::uint64_t index) const {
  // d+1 exponentials normalized onto the solid simplex of total mass <= bound
  ModelState out(dim);
  const std::uint64_t base = index * static_cast<std::uint64_t>(dim + 1);
  double total = 0.0;
  for (int k = 0; k <= dim; ++k) total += -std::log(rng.uniform_at(base + k));
  double partial = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double e = -std::log(rng.uniform_at(base + k));
    out(k) = bound * e / total;
    partial += out(k);
  }
  (void)partial;
  return out;
}

}  // namespace cepp
