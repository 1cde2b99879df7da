#include "sls/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sls/errors.hpp"
#include "sls/forward.hpp"
#include "sls/stats.hpp"

namespace sls::model {

using nlohmann::json;
using stats::neg_inf;

void MwHypothesis::validate() const {
  switch (variant) {
    case MwVariant::FixedMultiple:
      if (multiple < 1) throw ConfigError("FixedMultiple requires x >= 1");
      break;
    case MwVariant::UniformContinuous:
      if (!(lo_mult < hi_mult) || !(lo_mult > 0.0))
        throw ConfigError("UniformContinuous requires 0 < lo < hi");
      break;
    case MwVariant::BernoulliDimer:
    case MwVariant::HierarchicalNormal:
      break;
  }
}

std::string MwHypothesis::label() const {
  switch (variant) {
    case MwVariant::FixedMultiple:
      return "fixed_multiple_" + std::to_string(multiple);
    case MwVariant::BernoulliDimer:
      return "bernoulli_dimer";
    case MwVariant::UniformContinuous:
      return "uniform_continuous";
    case MwVariant::HierarchicalNormal:
      return "hierarchical_normal";
  }
  return "unknown";
}

void PriorConfig::validate() const {
  if (!(dndc_sd > 0.0) || !(a2_sd > 0.0))
    throw ConfigError("prior sds must be > 0");
  if (!(a_R > 0.0 && b_R > 0.0 && a_dn > 0.0 && b_dn > 0.0 && a_u > 0.0 &&
        b_u > 0.0))
    throw ConfigError("inverse-gamma shapes and rates must be > 0");
}

PriorConfig default_priors(Protein protein, bool loose_u) {
  (void)protein;  // lysozyme and gammaS share hyperparameters
  PriorConfig p;
  p.dndc_mean = 0.1970;
  p.dndc_sd = 0.005;
  p.a2_mean = 0.0;
  p.a2_sd = 1.0;
  p.a_R = 1.0;
  p.b_R = 1e-10;
  p.a_dn = 1.0;
  p.b_dn = 1e-8;
  p.a_u = 1.0;
  const double pct = loose_u ? 0.25 : 0.05;
  const double s = std::log(1.0 + pct) / 1.96;
  p.b_u = s * s;
  return p;
}

void ModelSpec::validate() const {
  priors.validate();
  hypothesis.validate();
  constants.validate();
}

std::string model_spec_to_json(const ModelSpec& spec) {
  json j;
  j["schema_version"] = 1;
  j["label"] = spec.label;
  j["adjust_concentration"] = spec.adjust_concentration;
  j["constants"] = {{"lambda", spec.constants.lambda},
                    {"n0", spec.constants.n0},
                    {"avogadro", spec.constants.avogadro},
                    {"monomer_mass", spec.constants.monomer_mass}};
  j["priors"] = {{"dndc_mean", spec.priors.dndc_mean},
                 {"dndc_sd", spec.priors.dndc_sd},
                 {"a2_mean", spec.priors.a2_mean},
                 {"a2_sd", spec.priors.a2_sd},
                 {"a_R", spec.priors.a_R},
                 {"b_R", spec.priors.b_R},
                 {"a_dn", spec.priors.a_dn},
                 {"b_dn", spec.priors.b_dn},
                 {"a_u", spec.priors.a_u},
                 {"b_u", spec.priors.b_u}};
  json h;
  switch (spec.hypothesis.variant) {
    case MwVariant::FixedMultiple:
      h = {{"variant", "fixed_multiple"}, {"x", spec.hypothesis.multiple}};
      break;
    case MwVariant::BernoulliDimer:
      h = {{"variant", "bernoulli_dimer"}};
      break;
    case MwVariant::UniformContinuous:
      h = {{"variant", "uniform_continuous"},
           {"lo_mult", spec.hypothesis.lo_mult},
           {"hi_mult", spec.hypothesis.hi_mult}};
      break;
    case MwVariant::HierarchicalNormal:
      h = {{"variant", "hierarchical_normal"}};
      break;
  }
  j["hypothesis"] = h;
  return j.dump(2) + "\n";
}

ModelSpec model_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config JSON: ") + e.what());
  }
  ModelSpec spec;
  try {
    if (j.contains("label")) spec.label = j["label"].get<std::string>();
    if (j.contains("adjust_concentration"))
      spec.adjust_concentration = j["adjust_concentration"].get<bool>();
    const auto& c = j.at("constants");
    spec.constants.lambda = c.at("lambda").get<double>();
    spec.constants.n0 = c.at("n0").get<double>();
    if (c.contains("avogadro")) spec.constants.avogadro = c.at("avogadro").get<double>();
    spec.constants.monomer_mass = c.at("monomer_mass").get<double>();
    const auto& p = j.at("priors");
    spec.priors.dndc_mean = p.at("dndc_mean").get<double>();
    spec.priors.dndc_sd = p.at("dndc_sd").get<double>();
    spec.priors.a2_mean = p.at("a2_mean").get<double>();
    spec.priors.a2_sd = p.at("a2_sd").get<double>();
    spec.priors.a_R = p.at("a_R").get<double>();
    spec.priors.b_R = p.at("b_R").get<double>();
    spec.priors.a_dn = p.at("a_dn").get<double>();
    spec.priors.b_dn = p.at("b_dn").get<double>();
    spec.priors.a_u = p.at("a_u").get<double>();
    spec.priors.b_u = p.at("b_u").get<double>();
    const auto& h = j.at("hypothesis");
    const std::string variant = h.at("variant").get<std::string>();
    if (variant == "fixed_multiple")
      spec.hypothesis = MwHypothesis::fixed(h.at("x").get<int>());
    else if (variant == "bernoulli_dimer")
      spec.hypothesis = MwHypothesis::bernoulli_dimer();
    else if (variant == "uniform_continuous")
      spec.hypothesis = MwHypothesis::uniform(h.at("lo_mult").get<double>(),
                                              h.at("hi_mult").get<double>());
    else if (variant == "hierarchical_normal")
      spec.hypothesis = MwHypothesis::hierarchical();
    else
      throw ConfigError("unknown hypothesis variant `" + variant + "`");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config JSON: ") + e.what());
  }
  spec.validate();
  return spec;
}

ModelSpec read_model_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_spec_from_json(buf.str());
}

LatentState make_state_shape(const CleanDataset& data, const ModelSpec& spec) {
  LatentState s;
  const std::size_t L = data.n_conditions();
  s.a2.assign(L, 0.0);
  s.u.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    s.u[l].resize(data.conditions[l].runs.size());
    for (std::size_t r = 0; r < data.conditions[l].runs.size(); ++r)
      s.u[l][r].assign(data.conditions[l].runs[r].levels.size(), 1.0);
  }
  switch (spec.hypothesis.variant) {
    case MwVariant::FixedMultiple:
      break;
    case MwVariant::BernoulliDimer:
      s.k.assign(L, 0);
      break;
    case MwVariant::UniformContinuous:
      s.mw.assign(L, spec.hypothesis.lo_mult * spec.constants.monomer_mass);
      break;
    case MwVariant::HierarchicalNormal:
      s.mw.assign(L, spec.constants.monomer_mass);
      s.mu_mw = spec.constants.monomer_mass;
      s.sigma2_mw = 1.0;
      break;
  }
  return s;
}

double mw_of(const LatentState& s, const MwHypothesis& hyp, double monomer_mass,
             std::size_t l) {
  switch (hyp.variant) {
    case MwVariant::FixedMultiple:
      return hyp.multiple * monomer_mass;
    case MwVariant::BernoulliDimer:
      return (s.k[l] + 1) * monomer_mass;
    case MwVariant::UniformContinuous:
    case MwVariant::HierarchicalNormal:
      return s.mw[l];
  }
  return monomer_mass;
}

namespace {

bool state_supported(const LatentState& s, const ModelSpec& spec) {
  if (!(s.dndc > 0.0)) return false;
  if (!(s.sigma2_R > 0.0) || !(s.sigma2_dn > 0.0)) return false;
  if (spec.adjust_concentration && !(s.sigma2_u > 0.0)) return false;
  if (spec.adjust_concentration)
    for (const auto& lc : s.u)
      for (const auto& rc : lc)
        for (double u : rc)
          if (!(u > 0.0)) return false;
  for (std::size_t l = 0; l < s.a2.size(); ++l)
    if (!(mw_of(s, spec.hypothesis, spec.constants.monomer_mass, l) > 0.0))
      return false;
  if (spec.hypothesis.variant == MwVariant::HierarchicalNormal &&
      !(s.sigma2_mw > 0.0))
    return false;
  return true;
}

double guard(double lp) { return std::isfinite(lp) ? lp : neg_inf; }

}  // namespace

double log_likelihood_cell(const LatentState& s, const CleanDataset& data,
                           const ModelSpec& spec, std::size_t l, std::size_t r,
                           std::size_t i) {
  const LevelObs& obs = data.conditions[l].runs[r].levels[i];
  if (!obs.ls_included && !obs.ri_included) return 0.0;

  const double u = spec.adjust_concentration ? s.u[l][r][i] : 1.0;
  const double c = obs.c_meas * u;
  double ll = 0.0;
  if (obs.ls_included) {
    const OpticalParams optics{s.dndc, spec.constants};
    const double mw = mw_of(s, spec.hypothesis, spec.constants.monomer_mass, l);
    const double mean = rayleigh(c, mw, s.a2[l], optics);
    ll += stats::log_pdf_normal(obs.rayleigh, mean, s.sigma2_R);
  }
  if (obs.ri_included)
    ll += stats::log_pdf_truncnorm_pos(*obs.delta_n, c * s.dndc, s.sigma2_dn);
  return ll;
}

double log_likelihood(const LatentState& s, const CleanDataset& data,
                      const ModelSpec& spec) {
  if (!state_supported(s, spec)) return neg_inf;
  double ll = 0.0;
  for (std::size_t l = 0; l < data.conditions.size(); ++l)
    for (std::size_t r = 0; r < data.conditions[l].runs.size(); ++r)
      for (std::size_t i = 0; i < data.conditions[l].runs[r].levels.size(); ++i)
        ll += log_likelihood_cell(s, data, spec, l, r, i);
  return guard(ll);
}

double log_prior(const LatentState& s, const ModelSpec& spec) {
  if (!state_supported(s, spec)) return neg_inf;
  const PriorConfig& pr = spec.priors;
  const double M = spec.constants.monomer_mass;
  double lp = 0.0;

  if (spec.adjust_concentration) {
    for (const auto& lc : s.u)
      for (const auto& rc : lc)
        for (double u : rc)
          lp += stats::log_pdf_lognormal(u, 0.0, s.sigma2_u);
    lp += stats::log_pdf_inv_gamma(s.sigma2_u, pr.a_u, pr.b_u);
  }

  lp += stats::log_pdf_truncnorm_pos(s.dndc, pr.dndc_mean,
                                     pr.dndc_sd * pr.dndc_sd);
  for (double a2 : s.a2)
    lp += stats::log_pdf_normal(a2, pr.a2_mean, pr.a2_sd * pr.a2_sd);
  lp += stats::log_pdf_inv_gamma(s.sigma2_R, pr.a_R, pr.b_R);
  lp += stats::log_pdf_inv_gamma(s.sigma2_dn, pr.a_dn, pr.b_dn);

  switch (spec.hypothesis.variant) {
    case MwVariant::FixedMultiple:
      break;
    case MwVariant::BernoulliDimer:
      lp += static_cast<double>(s.k.size()) * std::log(0.5);
      break;
    case MwVariant::UniformContinuous: {
      const double lo = spec.hypothesis.lo_mult * M;
      const double hi = spec.hypothesis.hi_mult * M;
      for (double mw : s.mw) {
        if (!(mw > lo && mw < hi)) return neg_inf;
        lp -= std::log(hi - lo);
      }
      break;
    }
    case MwVariant::HierarchicalNormal: {
      if (!(s.mu_mw > M && s.mu_mw < 20.0 * M)) return neg_inf;
      lp -= std::log(19.0 * M);
      lp += stats::log_pdf_inv_gamma(s.sigma2_mw, 1.0, (M / 3.0) * (M / 3.0));
      for (double mw : s.mw)
        lp += stats::log_pdf_normal(mw, s.mu_mw, s.sigma2_mw);
      break;
    }
  }
  return guard(lp);
}

double log_posterior(const LatentState& s, const CleanDataset& data,
                     const ModelSpec& spec) {
  const double lp = log_prior(s, spec);
  if (!std::isfinite(lp)) return neg_inf;
  const double ll = log_likelihood(s, data, spec);
  if (!std::isfinite(ll)) return neg_inf;
  return lp + ll;
}

// ---------------------------------------------------------------------------

ParameterLayout ParameterLayout::build(const CleanDataset& data,
                                       const ModelSpec& spec) {
  ParameterLayout lay;
  lay.shape_ = make_state_shape(data, spec);
  const std::size_t L = data.n_conditions();
  const double M = spec.constants.monomer_mass;

  if (spec.adjust_concentration) {
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t r = 0; r < data.conditions[l].runs.size(); ++r)
        for (std::size_t i = 0; i < data.conditions[l].runs[r].levels.size(); ++i) {
          Coord c;
          c.name = "u_c" + std::to_string(l + 1) + "_r" + std::to_string(r + 1) +
                   "_i" + std::to_string(data.conditions[l].runs[r].levels[i].level);
          c.field = Coord::Field::U;
          c.l = l; c.r = r; c.i = i;
          c.tf = Transform::Log;
          c.init_scale = 0.05;
          lay.coords_.push_back(std::move(c));
        }
  }

  {
    Coord c;
    c.name = "dndc";
    c.field = Coord::Field::Dndc;
    c.tf = Transform::Log;
    c.init_scale = 0.02;
    lay.coords_.push_back(std::move(c));
  }
  for (std::size_t l = 0; l < L; ++l) {
    Coord c;
    c.name = "A2_c" + std::to_string(l + 1);
    c.field = Coord::Field::A2;
    c.l = l;
    c.tf = Transform::Identity;
    c.init_scale = 1e-3;  // physical magnitudes are at most ~1e-2
    lay.coords_.push_back(std::move(c));
  }
  if (spec.adjust_concentration) {
    Coord c;
    c.name = "sigma2_u";
    c.field = Coord::Field::Sigma2U;
    c.tf = Transform::Log;
    c.init_scale = 0.5;
    lay.coords_.push_back(std::move(c));
  }
  {
    Coord c;
    c.name = "sigma2_R";
    c.field = Coord::Field::Sigma2R;
    c.tf = Transform::Log;
    c.init_scale = 0.5;
    lay.coords_.push_back(std::move(c));
  }
  {
    Coord c;
    c.name = "sigma2_dn";
    c.field = Coord::Field::Sigma2Dn;
    c.tf = Transform::Log;
    c.init_scale = 0.5;
    lay.coords_.push_back(std::move(c));
  }

  switch (spec.hypothesis.variant) {
    case MwVariant::FixedMultiple:
      break;
    case MwVariant::BernoulliDimer:
      for (std::size_t l = 0; l < L; ++l)
        lay.flips_.push_back({"k_c" + std::to_string(l + 1), l});
      break;
    case MwVariant::UniformContinuous:
      for (std::size_t l = 0; l < L; ++l) {
        Coord c;
        c.name = "Mw_c" + std::to_string(l + 1);
        c.field = Coord::Field::Mw;
        c.l = l;
        c.tf = Transform::LogitRange;
        c.lo = spec.hypothesis.lo_mult * M;
        c.hi = spec.hypothesis.hi_mult * M;
        c.init_scale = 0.3;
        lay.coords_.push_back(std::move(c));
      }
      break;
    case MwVariant::HierarchicalNormal: {
      for (std::size_t l = 0; l < L; ++l) {
        Coord c;
        c.name = "Mw_c" + std::to_string(l + 1);
        c.field = Coord::Field::Mw;
        c.l = l;
        c.tf = Transform::Log;
        c.init_scale = 0.1;
        lay.coords_.push_back(std::move(c));
      }
      Coord mu;
      mu.name = "mu_Mw";
      mu.field = Coord::Field::MuMw;
      mu.tf = Transform::LogitRange;
      mu.lo = M;
      mu.hi = 20.0 * M;
      mu.init_scale = 0.3;
      lay.coords_.push_back(std::move(mu));
      Coord s2;
      s2.name = "sigma2_Mw";
      s2.field = Coord::Field::Sigma2Mw;
      s2.tf = Transform::Log;
      s2.init_scale = 0.5;
      lay.coords_.push_back(std::move(s2));
      break;
    }
  }
  return lay;
}

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> out;
  out.reserve(n_params());
  for (const auto& c : coords_) out.push_back(c.name);
  for (const auto& f : flips_) out.push_back(f.name);
  return out;
}

double ParameterLayout::get_natural(const LatentState& s, const Coord& c) const {
  switch (c.field) {
    case Coord::Field::U: return s.u[c.l][c.r][c.i];
    case Coord::Field::Dndc: return s.dndc;
    case Coord::Field::A2: return s.a2[c.l];
    case Coord::Field::Sigma2U: return s.sigma2_u;
    case Coord::Field::Sigma2R: return s.sigma2_R;
    case Coord::Field::Sigma2Dn: return s.sigma2_dn;
    case Coord::Field::Mw: return s.mw[c.l];
    case Coord::Field::MuMw: return s.mu_mw;
    case Coord::Field::Sigma2Mw: return s.sigma2_mw;
  }
  return 0.0;
}

void ParameterLayout::set_natural(LatentState& s, const Coord& c, double v) const {
  switch (c.field) {
    case Coord::Field::U: s.u[c.l][c.r][c.i] = v; return;
    case Coord::Field::Dndc: s.dndc = v; return;
    case Coord::Field::A2: s.a2[c.l] = v; return;
    case Coord::Field::Sigma2U: s.sigma2_u = v; return;
    case Coord::Field::Sigma2R: s.sigma2_R = v; return;
    case Coord::Field::Sigma2Dn: s.sigma2_dn = v; return;
    case Coord::Field::Mw: s.mw[c.l] = v; return;
    case Coord::Field::MuMw: s.mu_mw = v; return;
    case Coord::Field::Sigma2Mw: s.sigma2_mw = v; return;
  }
}

double ParameterLayout::to_natural(const Coord& c, double t) const {
  switch (c.tf) {
    case Transform::Identity: return t;
    case Transform::Log: return std::exp(t);
    case Transform::LogitRange: {
      const double sig = 1.0 / (1.0 + std::exp(-t));
      return c.lo + (c.hi - c.lo) * sig;
    }
  }
  return t;
}

double ParameterLayout::to_transformed(const Coord& c, double v) const {
  switch (c.tf) {
    case Transform::Identity: return v;
    case Transform::Log: return std::log(v);
    case Transform::LogitRange: {
      const double p = (v - c.lo) / (c.hi - c.lo);
      return std::log(p / (1.0 - p));
    }
  }
  return v;
}

double ParameterLayout::log_jacobian(const Coord& c, double t) const {
  switch (c.tf) {
    case Transform::Identity: return 0.0;
    case Transform::Log: return t;
    case Transform::LogitRange: {
      // d natural / dt = (hi-lo) sig (1-sig)
      const double sig = 1.0 / (1.0 + std::exp(-t));
      return std::log(c.hi - c.lo) + std::log(sig) + std::log1p(-sig);
    }
  }
  return 0.0;
}

std::vector<double> ParameterLayout::pack(const LatentState& s) const {
  std::vector<double> x(coords_.size());
  for (std::size_t j = 0; j < coords_.size(); ++j)
    x[j] = to_transformed(coords_[j], get_natural(s, coords_[j]));
  return x;
}

void ParameterLayout::unpack_into(std::span<const double> x,
                                  LatentState& s) const {
  for (std::size_t j = 0; j < coords_.size(); ++j)
    set_natural(s, coords_[j], to_natural(coords_[j], x[j]));
}

std::vector<double> ParameterLayout::natural_row(const LatentState& s) const {
  std::vector<double> row;
  row.reserve(n_params());
  for (const auto& c : coords_) row.push_back(get_natural(s, c));
  for (const auto& f : flips_) row.push_back(static_cast<double>(s.k[f.l]));
  return row;
}

LatentState ParameterLayout::state_from_row(std::span<const double> row) const {
  if (row.size() != n_params())
    throw DimensionMismatch("parameter row has " + std::to_string(row.size()) +
                            " entries, layout expects " +
                            std::to_string(n_params()));
  LatentState s = shape_;
  for (std::size_t j = 0; j < coords_.size(); ++j)
    set_natural(s, coords_[j], row[j]);
  if (!flips_.empty() && s.k.size() < shape_.a2.size())
    s.k.assign(shape_.a2.size(), 0);
  for (std::size_t f = 0; f < flips_.size(); ++f)
    s.k[flips_[f].l] = row[coords_.size() + f] >= 0.5 ? 1 : 0;
  return s;
}

}  // namespace sls::model
