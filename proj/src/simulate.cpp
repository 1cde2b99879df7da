#include "sls/simulate.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "sls/constants.hpp"
#include "sls/errors.hpp"
#include "sls/forward.hpp"
#include "sls/inference.hpp"
#include "sls/stats.hpp"

namespace sls::sim {

using model::ModelSpec;
using nlohmann::json;

std::string regime_name(PriorRegime r) {
  switch (r) {
    case PriorRegime::Informative: return "informative";
    case PriorRegime::Intermediate: return "intermediate";
    case PriorRegime::Weakly: return "weakly";
    case PriorRegime::NoAdjustment: return "no_adjustment";
  }
  return "unknown";
}

PriorRegime regime_from_name(const std::string& name) {
  if (name == "informative") return PriorRegime::Informative;
  if (name == "intermediate") return PriorRegime::Intermediate;
  if (name == "weakly") return PriorRegime::Weakly;
  if (name == "no_adjustment") return PriorRegime::NoAdjustment;
  throw ConfigError("unknown prior regime `" + name + "`");
}

void SimDesign::validate() const {
  if (a2_values.empty() || error_pct.empty() || regimes.empty() ||
      replicate_counts.empty())
    throw ConfigError("simulation design: all factor lists must be non-empty");
  if (n_monte_carlo < 1)
    throw ConfigError("simulation design: n_monte_carlo must be >= 1");
  for (double a2 : a2_values)
    if (a2 == 0.0) throw ConfigError("simulation design: a2 must be nonzero");
  for (double p : error_pct)
    if (!(p > 0.0)) throw ConfigError("simulation design: error pct must be > 0");
  for (int r : replicate_counts)
    if (r < 1) throw ConfigError("simulation design: replicates must be >= 1");
  if (truth.concentrations_mg_ml.empty())
    throw ConfigError("simulation design: concentration grid is empty");
}

double sigma_u_from_pct(double pct) {
  return std::log(1.0 + pct / 100.0) / 1.96;
}

SimDesign design_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("design JSON: ") + e.what());
  }
  SimDesign d;
  try {
    d.a2_values = j.at("a2_values").get<std::vector<double>>();
    d.error_pct = j.at("error_pct").get<std::vector<double>>();
    for (const auto& name : j.at("regimes"))
      d.regimes.push_back(regime_from_name(name.get<std::string>()));
    d.replicate_counts = j.at("replicate_counts").get<std::vector<int>>();
    if (j.contains("n_monte_carlo"))
      d.n_monte_carlo = j.at("n_monte_carlo").get<int>();
    if (j.contains("truth")) {
      const auto& t = j.at("truth");
      if (t.contains("sigma2_R")) d.truth.sigma2_R = t["sigma2_R"].get<double>();
      if (t.contains("sigma2_dn")) d.truth.sigma2_dn = t["sigma2_dn"].get<double>();
      if (t.contains("dndc")) d.truth.dndc = t["dndc"].get<double>();
      if (t.contains("n0")) d.truth.n0 = t["n0"].get<double>();
      if (t.contains("lambda")) d.truth.lambda = t["lambda"].get<double>();
      if (t.contains("monomer_mass"))
        d.truth.monomer_mass = t["monomer_mass"].get<double>();
      if (t.contains("concentrations_mg_ml"))
        d.truth.concentrations_mg_ml =
            t["concentrations_mg_ml"].get<std::vector<double>>();
      if (t.contains("ri_levels")) d.truth.ri_levels = t["ri_levels"].get<int>();
      if (t.contains("prior_dndc_mean"))
        d.truth.prior_dndc_mean = t["prior_dndc_mean"].get<double>();
      if (t.contains("prior_dndc_sd"))
        d.truth.prior_dndc_sd = t["prior_dndc_sd"].get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("design JSON: ") + e.what());
  }
  d.validate();
  return d;
}

std::string design_to_json(const SimDesign& d) {
  json j;
  j["schema_version"] = 1;
  j["a2_values"] = d.a2_values;
  j["error_pct"] = d.error_pct;
  json regs = json::array();
  for (auto r : d.regimes) regs.push_back(regime_name(r));
  j["regimes"] = regs;
  j["replicate_counts"] = d.replicate_counts;
  j["n_monte_carlo"] = d.n_monte_carlo;
  j["truth"] = {{"sigma2_R", d.truth.sigma2_R},
                {"sigma2_dn", d.truth.sigma2_dn},
                {"dndc", d.truth.dndc},
                {"n0", d.truth.n0},
                {"lambda", d.truth.lambda},
                {"monomer_mass", d.truth.monomer_mass},
                {"concentrations_mg_ml", d.truth.concentrations_mg_ml},
                {"ri_levels", d.truth.ri_levels},
                {"prior_dndc_mean", d.truth.prior_dndc_mean},
                {"prior_dndc_sd", d.truth.prior_dndc_sd}};
  return j.dump(2) + "\n";
}

std::vector<SimCell> enumerate_cells(const SimDesign& d) {
  std::vector<SimCell> cells;
  std::size_t idx = 0;
  for (double a2 : d.a2_values)
    for (double pct : d.error_pct)
      for (PriorRegime regime : d.regimes)
        for (int reps : d.replicate_counts)
          cells.push_back({idx++, a2, pct, regime, reps});
  return cells;
}

CleanDataset generate_dataset(const SimTruth& truth, double a2, double sigma_u,
                              int n_replicates, Rng& rng) {
  PhysicalConstants consts;
  consts.lambda = truth.lambda;
  consts.n0 = truth.n0;
  consts.monomer_mass = truth.monomer_mass;
  const OpticalParams optics{truth.dndc, consts};
  const double sd_R = std::sqrt(truth.sigma2_R);
  const double sd_dn = std::sqrt(truth.sigma2_dn);

  CleanDataset ds;
  ConditionData cond;
  cond.condition_id = "c1";
  for (int r = 0; r < n_replicates; ++r) {
    RunData run;
    run.run_id = "rep" + std::to_string(r + 1);
    for (std::size_t i = 0; i < truth.concentrations_mg_ml.size(); ++i) {
      LevelObs lv;
      lv.level = static_cast<int>(i + 1);
      const double c_meas = convert_concentration(truth.concentrations_mg_ml[i]);
      lv.c_meas = c_meas;
      const double u = sigma_u > 0.0 ? rng.lognormal(0.0, sigma_u) : 1.0;
      const double c_true = c_meas * u;
      const double mean_R = rayleigh(c_true, truth.monomer_mass, a2, optics);
      lv.rayleigh = sd_R > 0.0 ? rng.normal(mean_R, sd_R) : mean_R;
      lv.ls_included = true;
      if (static_cast<int>(i) < truth.ri_levels) {
        const double mean_dn = c_true * truth.dndc;
        lv.delta_n = sd_dn > 0.0 ? rng.truncated_normal_pos(mean_dn, sd_dn)
                                 : mean_dn;
        lv.ri_included = true;
      }
      run.levels.push_back(lv);
    }
    cond.runs.push_back(std::move(run));
  }
  ds.conditions.push_back(std::move(cond));
  ds.validate();
  return ds;
}

std::pair<double, double> prior_for_regime(PriorRegime regime,
                                           double true_sigma2_u) {
  switch (regime) {
    case PriorRegime::Informative:
      return {1.0 + 1.0 / (2.0 + 2.0 * true_sigma2_u), 0.5};
    case PriorRegime::Intermediate:
      return {1.0, true_sigma2_u};
    case PriorRegime::Weakly: {
      const double s = std::log(1.4) / 1.96;
      return {1.0, s * s};
    }
    case PriorRegime::NoAdjustment:
      return {1.0, 1.0};  // unused; u is pinned at 1
  }
  return {1.0, 1.0};
}

ModelSpec spec_for_cell(const SimTruth& truth, PriorRegime regime,
                        double true_sigma2_u) {
  ModelSpec spec;
  spec.label = "M1";
  spec.hypothesis = model::MwHypothesis::fixed(1);
  spec.constants.lambda = truth.lambda;
  spec.constants.n0 = truth.n0;
  spec.constants.monomer_mass = truth.monomer_mass;
  spec.priors.dndc_mean = truth.prior_dndc_mean;
  spec.priors.dndc_sd = truth.prior_dndc_sd;
  spec.priors.a2_mean = 0.0;
  spec.priors.a2_sd = 1.0;
  spec.priors.a_R = 1.0;
  spec.priors.b_R = 1e-10;
  spec.priors.a_dn = 1.0;
  spec.priors.b_dn = 1e-8;
  const auto [a_u, b_u] = prior_for_regime(regime, true_sigma2_u);
  spec.priors.a_u = a_u;
  spec.priors.b_u = b_u;
  spec.adjust_concentration = regime != PriorRegime::NoAdjustment;
  return spec;
}

RepResult run_rep(const SimTruth& truth, const SimCell& cell,
                  const mcmc::ChainConfig& chain_cfg, std::uint64_t seed,
                  int rep_index) {
  RepResult out;
  const double sigma_u = sigma_u_from_pct(cell.error_pct);
  Rng data_rng(derive_seed(seed, cell.index, static_cast<std::uint64_t>(rep_index), 1));
  try {
    const CleanDataset data =
        generate_dataset(truth, cell.a2, sigma_u, cell.replicates, data_rng);
    const ModelSpec spec = spec_for_cell(truth, cell.regime, sigma_u * sigma_u);
    mcmc::ChainConfig cfg = chain_cfg;
    cfg.seed = derive_seed(seed, cell.index, static_cast<std::uint64_t>(rep_index), 2);
    const mcmc::PosteriorDraws draws = mcmc::run_chains(data, spec, cfg);

    if (draws.n_chains() >= 2 && draws.n_retained() >= 10) {
      const double rhat = mcmc::gelman_rubin(draws, "A2_c1");
      if (!(rhat <= 1.2)) {
        out.rhat_failed = true;
        return out;
      }
    }
    const std::vector<double> a2 = draws.pooled("A2_c1");
    out.post_mean = stats::mean(a2);
    out.q025 = stats::quantile(a2, 0.025);
    out.q975 = stats::quantile(a2, 0.975);
    out.completed = true;
  } catch (const InitializationFailure&) {
    out.completed = false;
  }
  return out;
}

SimCellResult metrics(const SimCell& cell, const std::vector<RepResult>& reps) {
  SimCellResult res;
  res.cell = cell;
  const double abs_a2 = std::abs(cell.a2);
  double bias_sum = 0, width_sum = 0;
  int covered = 0;
  for (const auto& rep : reps) {
    if (!rep.completed) {
      res.rhat_failures += rep.rhat_failed ? 1 : 0;
      continue;
    }
    ++res.n_completed;
    bias_sum += (rep.post_mean - cell.a2) / abs_a2;
    width_sum += (rep.q975 - rep.q025) / abs_a2;
    if (rep.q025 <= cell.a2 && cell.a2 <= rep.q975) ++covered;
  }
  if (res.n_completed == 0)
    throw NoCompletedReps("cell " + std::to_string(cell.index) +
                          ": no completed repetitions");
  res.relative_bias = bias_sum / res.n_completed;
  res.relative_width = width_sum / res.n_completed;
  res.coverage_95 = static_cast<double>(covered) / res.n_completed;
  return res;
}

SimCellResult run_cell(const SimTruth& truth, const SimCell& cell,
                       const mcmc::ChainConfig& chain_cfg, std::uint64_t seed,
                       int n_monte_carlo) {
  std::vector<RepResult> reps;
  reps.reserve(static_cast<std::size_t>(n_monte_carlo));
  for (int rep = 0; rep < n_monte_carlo; ++rep)
    reps.push_back(run_rep(truth, cell, chain_cfg, seed, rep));
  return metrics(cell, reps);
}

std::vector<SimCellResult> run_design(
    const SimDesign& design, const mcmc::ChainConfig& chain_cfg, int workers,
    std::uint64_t seed, const std::vector<std::size_t>& cell_filter,
    const std::function<void(const SimCellResult&)>& on_cell) {
  design.validate();
  std::vector<SimCell> cells = enumerate_cells(design);
  if (!cell_filter.empty()) {
    std::vector<SimCell> filtered;
    for (std::size_t idx : cell_filter) {
      if (idx >= cells.size())
        throw ConfigError("cell index " + std::to_string(idx) + " out of range");
      filtered.push_back(cells[idx]);
    }
    cells = std::move(filtered);
  }

  const int n_mc = design.n_monte_carlo;
  std::vector<std::vector<RepResult>> results(cells.size());
  for (auto& v : results) v.resize(static_cast<std::size_t>(n_mc));

  struct Task {
    std::size_t cell_slot;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int rep = 0; rep < n_mc; ++rep) tasks.push_back({c, rep});

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) break;
      const Task& task = tasks[t];
      results[task.cell_slot][static_cast<std::size_t>(task.rep)] =
          run_rep(design.truth, cells[task.cell_slot], chain_cfg, seed, task.rep);
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<SimCellResult> out;
  out.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out.push_back(metrics(cells[c], results[c]));
    if (on_cell) on_cell(out.back());
  }
  return out;
}

}  // namespace sls::sim
