#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sls/dataset.hpp"
#include "sls/model.hpp"
#include "sls/rng.hpp"

namespace sls::mcmc {

struct ChainConfig {
  std::int64_t n_iter = 300000;
  std::int64_t burn_in = 200000;
  std::int64_t thin = 250;
  int n_chains = 5;
  std::uint64_t seed = 1;
  int adapt_window = 50;
  double target_accept = 0.44;

  void validate() const;
  std::int64_t retained_per_chain() const { return (n_iter - burn_in) / thin; }
};

std::string chain_config_to_json(const ChainConfig& cfg);
ChainConfig chain_config_from_json_obj(const void* json_obj);

// Coordinate-wise view of a log target density. The kernel proposes one
// scalar move at a time; implementations may cache partial sums and answer
// from the cheapest sufficient recomputation. Exactly one proposal is
// outstanding between propose() and accept()/reject().
class CoordinateTarget {
 public:
  virtual ~CoordinateTarget() = default;
  virtual std::size_t dim() const = 0;
  virtual std::size_t n_flips() const { return 0; }
  // Full evaluation at x; resets caches. Returns the log target.
  virtual double init(const std::vector<double>& x) = 0;
  // Log target with coordinate j moved to v, everything else current.
  virtual double propose(std::size_t j, double v) = 0;
  virtual void accept(std::size_t j, double v) = 0;
  virtual void reject(std::size_t j) { (void)j; }
  virtual double propose_flip(std::size_t f);
  virtual void accept_flip(std::size_t f) { (void)f; }
  virtual void reject_flip(std::size_t f) { (void)f; }
  // Row persisted for each retained draw (natural scale) and its log
  // posterior. Defaults suit plain function targets.
  virtual std::vector<double> stored_row(const std::vector<double>& x);
  virtual double stored_log_density();

 protected:
  double current_log_target_ = 0.0;
};

// Adapter for tests and reduced models: any callable log density over an
// unconstrained vector.
class FunctionTarget : public CoordinateTarget {
 public:
  using Fn = double (*)(const std::vector<double>&, const void*);
  FunctionTarget(std::size_t dim, Fn fn, const void* ctx)
      : dim_(dim), fn_(fn), ctx_(ctx) {}
  std::size_t dim() const override { return dim_; }
  double init(const std::vector<double>& x) override;
  double propose(std::size_t j, double v) override;
  void accept(std::size_t j, double v) override;

 private:
  std::size_t dim_;
  Fn fn_;
  const void* ctx_;
  std::vector<double> x_;
};

struct ChainResult {
  std::size_t row_width = 0;
  std::int64_t n_retained = 0;
  std::vector<double> draws;     // row-major n_retained x row_width
  std::vector<double> log_post;  // per retained draw
  std::vector<double> accept_rate;  // per coordinate then per flip, post burn-in
  std::vector<std::int64_t> iters;  // absolute iteration of each retained draw

  double value(std::int64_t row, std::size_t p) const {
    return draws[static_cast<std::size_t>(row) * row_width + p];
  }
};

// One adaptive random-walk Metropolis-within-Gibbs chain. Proposal scales
// adapt in Robbins-Monro batches during burn-in only and stay frozen after.
ChainResult run_single_chain(CoordinateTarget& target, std::vector<double> x0,
                             std::vector<double> init_scales, Rng& rng,
                             const ChainConfig& cfg);

// Retained draws of a multi-chain run over the SLS posterior.
struct PosteriorDraws {
  std::vector<std::string> param_names;
  std::vector<ChainResult> chains;
  ChainConfig config;
  std::vector<std::uint64_t> chain_seeds;

  std::size_t n_chains() const { return chains.size(); }
  std::int64_t n_retained() const {
    return chains.empty() ? 0 : chains.front().n_retained;
  }
  std::size_t index_of(const std::string& name) const;
  std::vector<double> pooled(std::size_t p) const;
  std::vector<double> pooled(const std::string& name) const;
};

// Random start drawn from the priors (variances rejected into [1e-16, 1e2]);
// retried until the log posterior is finite. Throws InitializationFailure
// after 1000 attempts.
model::LatentState initial_state(const CleanDataset& data,
                                 const model::ModelSpec& spec, Rng& rng,
                                 int max_attempts = 1000);

// Runs cfg.n_chains independent chains concurrently from sub-seeds
// derive_seed(cfg.seed, chain).
PosteriorDraws run_chains(const CleanDataset& data, const model::ModelSpec& spec,
                          const ChainConfig& cfg);

// Split-chain potential scale reduction factor for one parameter.
double gelman_rubin(const PosteriorDraws& draws, const std::string& param);
double gelman_rubin_column(const std::vector<std::vector<double>>& chains);

// Persistence: one `chain_<k>.csv` per chain (iter,<params...>,log_post) plus
// draws_manifest.json carrying config, seeds, acceptance rates, and the
// R-hat table. `model_json` is embedded so downstream commands can rebuild
// the model.
void write_draws(const PosteriorDraws& draws, const std::string& dir,
                 const std::string& model_json);
struct LoadedDraws {
  PosteriorDraws draws;
  std::string model_json;
};
LoadedDraws read_draws(const std::string& dir);

// The posterior target used by run_chains; exposed for the sampler tests.
class PosteriorTarget : public CoordinateTarget {
 public:
  PosteriorTarget(const CleanDataset& data, const model::ModelSpec& spec,
                  const model::ParameterLayout& layout);
  std::size_t dim() const override { return layout_.dim(); }
  std::size_t n_flips() const override { return layout_.flips().size(); }
  double init(const std::vector<double>& x) override;
  double propose(std::size_t j, double v) override;
  void accept(std::size_t j, double v) override;
  void reject(std::size_t j) override;
  double propose_flip(std::size_t f) override;
  void accept_flip(std::size_t f) override;
  void reject_flip(std::size_t f) override;
  std::vector<double> stored_row(const std::vector<double>& x) override;
  double stored_log_density() override;

  // Full from-scratch recomputation of the cached log target (test hook).
  double full_recompute_check() const;
  const model::LatentState& state() const { return state_; }

 private:
  struct Cell {
    std::size_t l, r, i;
  };
  double cell_ll(std::size_t cell_index) const;
  double rest_block() const;  // prior + jacobians except the u terms
  double u_term(std::size_t coord_index) const;
  void recompute_all();

  const CleanDataset& data_;
  const model::ModelSpec& spec_;
  const model::ParameterLayout& layout_;
  model::LatentState state_;
  std::vector<double> x_;

  std::vector<Cell> cells_;
  std::vector<std::pair<std::size_t, std::size_t>> cond_cell_range_;
  std::vector<std::size_t> cell_of_u_coord_;  // per coord; npos for non-u
  std::vector<double> cell_ll_cache_;
  std::vector<double> u_term_cache_;
  double ll_total_ = 0.0;
  double u_total_ = 0.0;
  double rest_ = 0.0;

  // Outstanding proposal bookkeeping.
  enum class Pending { None, UCoord, Global, Flip };
  Pending pending_ = Pending::None;
  std::size_t pending_j_ = 0;
  double pending_new_cell_ = 0.0;
  double pending_new_uterm_ = 0.0;
  std::vector<double> scratch_cells_;
  double scratch_ll_ = 0.0, scratch_u_ = 0.0, scratch_rest_ = 0.0;
  double old_natural_ = 0.0;
  double pending_cond_ll_ = 0.0;
};

}  // namespace sls::mcmc
