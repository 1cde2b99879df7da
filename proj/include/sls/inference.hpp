#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sls/dataset.hpp"
#include "sls/model.hpp"
#include "sls/rng.hpp"
#include "sls/sampler.hpp"

namespace sls::infer {

struct ParamSummary {
  std::string name;
  double mean = 0, sd = 0, q025 = 0, q50 = 0, q975 = 0;
};

struct PosteriorSummary {
  std::vector<ParamSummary> params;
  // P(A2 > 0 | data) per condition, keyed by the A2 parameter name.
  std::vector<std::pair<std::string, double>> prob_positive;
};

// Pooled-across-chains empirical moments and quantiles. Requires at least
// 100 pooled retained draws.
PosteriorSummary summarize(const mcmc::PosteriorDraws& draws);

struct DicReport {
  double dbar = 0;       // mean deviance over retained draws
  double d_at_mean = 0;  // deviance at the plug-in state
  double p_d = 0;        // dbar - d_at_mean
  double dic = 0;        // dbar + p_d
};

// Conditional DIC with deviance -2 log likelihood; the plug-in uses pooled
// posterior means for continuous parameters and the mode for the discrete
// occupation flags.
DicReport dic(const mcmc::PosteriorDraws& draws, const CleanDataset& data,
              const model::ModelSpec& spec);

struct PpcEntry {
  std::size_t condition = 0, run = 0;
  int level = 0;
  double pvalue = 0;
};

struct PpcResult {
  std::vector<PpcEntry> rayleigh;
  std::vector<PpcEntry> delta_n;
};

// Posterior predictive p-values p = P(y_rep <= y_obs), replicating each
// included observation once per retained draw.
PpcResult ppc_pvalues(const mcmc::PosteriorDraws& draws, const CleanDataset& data,
                      const model::ModelSpec& spec, Rng& rng);

struct RatioSummary {
  std::size_t condition = 0, run = 0;
  int level = 0;
  double mean = 0, sd = 0, q025 = 0, q975 = 0;
};

// Posterior of the inferred-to-measured concentration ratio, which is the
// latent u itself. Empty for the no-adjustment model.
std::vector<RatioSummary> concentration_ratios(const mcmc::PosteriorDraws& draws,
                                               const CleanDataset& data,
                                               const model::ModelSpec& spec);

}  // namespace sls::infer
