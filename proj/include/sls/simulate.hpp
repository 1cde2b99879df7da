#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sls/dataset.hpp"
#include "sls/model.hpp"
#include "sls/rng.hpp"
#include "sls/sampler.hpp"

namespace sls::sim {

// Ground truth shared across all factorial cells, with the default values
// of the small-particle case study (concentrations in injection order;
// the RI detector covers only the first `ri_levels` of them).
struct SimTruth {
  double sigma2_R = 1e-11;
  double sigma2_dn = 2e-9;
  double dndc = 0.20;
  double n0 = 1.33;
  double lambda = 657e-7;
  double monomer_mass = 14307;
  std::vector<double> concentrations_mg_ml = {2.5, 5,  7.5, 10, 12.5, 15, 17.5,
                                              20,  25, 30,  35, 40,   45, 50};
  int ri_levels = 8;
  double prior_dndc_mean = 0.195;
  double prior_dndc_sd = 0.005;
};

enum class PriorRegime { Informative, Intermediate, Weakly, NoAdjustment };

std::string regime_name(PriorRegime r);
PriorRegime regime_from_name(const std::string& name);

struct SimDesign {
  std::vector<double> a2_values;
  std::vector<double> error_pct;         // percentage concentration errors
  std::vector<PriorRegime> regimes;
  std::vector<int> replicate_counts;
  int n_monte_carlo = 20;
  SimTruth truth;

  std::size_t n_cells() const {
    return a2_values.size() * error_pct.size() * regimes.size() *
           replicate_counts.size();
  }
  void validate() const;
};

SimDesign design_from_json(const std::string& text);
std::string design_to_json(const SimDesign& design);

// sigma_u for a p% concentration error: log(1 + p/100)/1.96.
double sigma_u_from_pct(double pct);

struct SimCell {
  std::size_t index = 0;
  double a2 = 0;
  double error_pct = 0;
  PriorRegime regime = PriorRegime::Informative;
  int replicates = 1;
};

std::vector<SimCell> enumerate_cells(const SimDesign& design);

// Draws one dataset from the generative model: u ~ LN(0, sigma_u^2),
// R^m ~ N(rayleigh(c^m u, ...), sigma2_R), dn^m ~ TN(0,inf)(c^m u dndc,
// sigma2_dn), with RI present only on the first `ri_levels` levels.
CleanDataset generate_dataset(const SimTruth& truth, double a2, double sigma_u,
                              int n_replicates, Rng& rng);

// The (a_u, b_u) hyperparameters of each adjustment regime, exactly as
// specified; NoAdjustment has no variance prior (u is pinned at 1).
std::pair<double, double> prior_for_regime(PriorRegime regime,
                                           double true_sigma2_u);

// Model specification used to fit one cell's replicate datasets.
model::ModelSpec spec_for_cell(const SimTruth& truth, PriorRegime regime,
                               double true_sigma2_u);

struct RepResult {
  bool completed = false;
  bool rhat_failed = false;
  double post_mean = 0, q025 = 0, q975 = 0;
};

struct SimCellResult {
  SimCell cell;
  double relative_bias = 0;
  double coverage_95 = 0;
  double relative_width = 0;
  int n_completed = 0;
  int rhat_failures = 0;
};

// Aggregates per-repetition fits: relative bias of posterior means,
// frequentist coverage of the central 95% interval, and relative width.
SimCellResult metrics(const SimCell& cell, const std::vector<RepResult>& reps);

// Fit failures (initialization or R-hat above 1.2 on A2) are excluded and
// counted rather than aborting the cell.
SimCellResult run_cell(const SimTruth& truth, const SimCell& cell,
                       const mcmc::ChainConfig& chain_cfg, std::uint64_t seed,
                       int n_monte_carlo = 20);

RepResult run_rep(const SimTruth& truth, const SimCell& cell,
                  const mcmc::ChainConfig& chain_cfg, std::uint64_t seed,
                  int rep_index);

// Runs all cells (optionally a subset by index) over a worker pool; results
// are reduced by (cell, rep) index so scheduling cannot change the output.
std::vector<SimCellResult> run_design(
    const SimDesign& design, const mcmc::ChainConfig& chain_cfg, int workers,
    std::uint64_t seed, const std::vector<std::size_t>& cell_filter = {},
    const std::function<void(const SimCellResult&)>& on_cell = nullptr);

}  // namespace sls::sim
