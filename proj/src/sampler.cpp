#include "sls/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sls/errors.hpp"
#include "sls/stats.hpp"
#include "sls/util.hpp"

namespace sls::mcmc {

using model::Coord;
using model::LatentState;
using model::ModelSpec;
using model::MwVariant;
using model::ParameterLayout;
using nlohmann::json;
using stats::neg_inf;

void ChainConfig::validate() const {
  if (n_iter <= 0 || burn_in < 0 || burn_in >= n_iter)
    throw ConfigError("chain config: need 0 <= burn_in < n_iter");
  if (thin < 1) throw ConfigError("chain config: thin must be >= 1");
  if (n_chains < 1) throw ConfigError("chain config: n_chains must be >= 1");
  if (adapt_window < 1) throw ConfigError("chain config: adapt_window >= 1");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw ConfigError("chain config: target_accept in (0,1)");
}

std::string chain_config_to_json(const ChainConfig& cfg) {
  json j = {{"n_iter", cfg.n_iter},       {"burn_in", cfg.burn_in},
            {"thin", cfg.thin},           {"n_chains", cfg.n_chains},
            {"seed", cfg.seed},           {"adapt_window", cfg.adapt_window},
            {"target_accept", cfg.target_accept}};
  return j.dump();
}

ChainConfig chain_config_from_json_obj(const void* json_obj) {
  const json& j = *static_cast<const json*>(json_obj);
  ChainConfig cfg;
  cfg.n_iter = j.at("n_iter").get<std::int64_t>();
  cfg.burn_in = j.at("burn_in").get<std::int64_t>();
  cfg.thin = j.at("thin").get<std::int64_t>();
  cfg.n_chains = j.at("n_chains").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.adapt_window = j.at("adapt_window").get<int>();
  cfg.target_accept = j.at("target_accept").get<double>();
  cfg.validate();
  return cfg;
}

double CoordinateTarget::propose_flip(std::size_t) { return neg_inf; }

std::vector<double> CoordinateTarget::stored_row(const std::vector<double>& x) {
  return x;
}

double CoordinateTarget::stored_log_density() { return current_log_target_; }

double FunctionTarget::init(const std::vector<double>& x) {
  x_ = x;
  current_log_target_ = fn_(x_, ctx_);
  return current_log_target_;
}

double FunctionTarget::propose(std::size_t j, double v) {
  std::vector<double> y = x_;
  y[j] = v;
  return fn_(y, ctx_);
}

void FunctionTarget::accept(std::size_t j, double v) {
  x_[j] = v;
  current_log_target_ = fn_(x_, ctx_);
}

// ---------------------------------------------------------------------------
// Chain kernel

ChainResult run_single_chain(CoordinateTarget& target, std::vector<double> x0,
                             std::vector<double> init_scales, Rng& rng,
                             const ChainConfig& cfg) {
  cfg.validate();
  const std::size_t dim = target.dim();
  const std::size_t n_flips = target.n_flips();
  if (x0.size() != dim || init_scales.size() != dim)
    throw DimensionMismatch("run_single_chain: x0/scales size mismatch");

  std::vector<double> x = std::move(x0);
  double lp = target.init(x);
  if (!std::isfinite(lp))
    throw InitializationFailure("chain started at non-finite log target");

  std::vector<double> log_scale(dim);
  for (std::size_t j = 0; j < dim; ++j) log_scale[j] = std::log(init_scales[j]);

  std::vector<std::int64_t> batch_accept(dim, 0);
  std::vector<std::int64_t> post_accept(dim + n_flips, 0);
  std::int64_t adapt_batch = 0;

  ChainResult result;
  result.n_retained = cfg.retained_per_chain();
  result.row_width = target.stored_row(x).size();
  result.draws.reserve(static_cast<std::size_t>(result.n_retained) * result.row_width);
  result.log_post.reserve(static_cast<std::size_t>(result.n_retained));
  result.iters.reserve(static_cast<std::size_t>(result.n_retained));

  for (std::int64_t iter = 1; iter <= cfg.n_iter; ++iter) {
    const bool in_burn_in = iter <= cfg.burn_in;

    for (std::size_t j = 0; j < dim; ++j) {
      const double v = x[j] + std::exp(log_scale[j]) * rng.normal();
      const double lp_new = target.propose(j, v);
      if (std::log(rng.uniform()) < lp_new - lp) {
        target.accept(j, v);
        x[j] = v;
        lp = lp_new;
        if (in_burn_in)
          ++batch_accept[j];
        else
          ++post_accept[j];
      } else {
        target.reject(j);
      }
    }

    for (std::size_t f = 0; f < n_flips; ++f) {
      const double lp_new = target.propose_flip(f);
      if (std::log(rng.uniform()) < lp_new - lp) {
        target.accept_flip(f);
        lp = lp_new;
        if (!in_burn_in) ++post_accept[dim + f];
      } else {
        target.reject_flip(f);
      }
    }

    if (in_burn_in && iter % cfg.adapt_window == 0) {
      ++adapt_batch;
      const double gamma = 1.0 / std::sqrt(static_cast<double>(adapt_batch));
      for (std::size_t j = 0; j < dim; ++j) {
        const double rate = static_cast<double>(batch_accept[j]) /
                            static_cast<double>(cfg.adapt_window);
        log_scale[j] += gamma * (rate - cfg.target_accept);
        log_scale[j] = std::clamp(log_scale[j], -40.0, 40.0);
        batch_accept[j] = 0;
      }
    }

    if (!in_burn_in && (iter - cfg.burn_in) % cfg.thin == 0 &&
        static_cast<std::int64_t>(result.iters.size()) < result.n_retained) {
      const auto row = target.stored_row(x);
      result.draws.insert(result.draws.end(), row.begin(), row.end());
      result.log_post.push_back(target.stored_log_density());
      result.iters.push_back(iter);
    }
  }

  const double denom = static_cast<double>(cfg.n_iter - cfg.burn_in);
  result.accept_rate.resize(dim + n_flips);
  for (std::size_t j = 0; j < dim + n_flips; ++j)
    result.accept_rate[j] = static_cast<double>(post_accept[j]) / denom;
  return result;
}

// ---------------------------------------------------------------------------
// Posterior target with cached cell likelihoods

PosteriorTarget::PosteriorTarget(const CleanDataset& data, const ModelSpec& spec,
                                 const ParameterLayout& layout)
    : data_(data), spec_(spec), layout_(layout) {
  state_ = model::make_state_shape(data, spec);
  for (std::size_t l = 0; l < data.conditions.size(); ++l) {
    const std::size_t begin = cells_.size();
    for (std::size_t r = 0; r < data.conditions[l].runs.size(); ++r)
      for (std::size_t i = 0; i < data.conditions[l].runs[r].levels.size(); ++i)
        cells_.push_back({l, r, i});
    cond_cell_range_.emplace_back(begin, cells_.size());
  }
  constexpr auto npos = static_cast<std::size_t>(-1);
  cell_of_u_coord_.assign(layout.dim(), npos);
  for (std::size_t j = 0; j < layout.coords().size(); ++j) {
    const Coord& c = layout.coords()[j];
    if (c.field != Coord::Field::U) continue;
    for (std::size_t ci = 0; ci < cells_.size(); ++ci)
      if (cells_[ci].l == c.l && cells_[ci].r == c.r && cells_[ci].i == c.i) {
        cell_of_u_coord_[j] = ci;
        break;
      }
  }
  cell_ll_cache_.assign(cells_.size(), 0.0);
  u_term_cache_.assign(layout.dim(), 0.0);
}

double PosteriorTarget::cell_ll(std::size_t ci) const {
  const Cell& c = cells_[ci];
  return model::log_likelihood_cell(state_, data_, spec_, c.l, c.r, c.i);
}

double PosteriorTarget::u_term(std::size_t j) const {
  // Lognormal prior of u plus the log-transform jacobian collapses to a
  // Gaussian in the transformed coordinate.
  return stats::log_pdf_normal(x_[j], 0.0, state_.sigma2_u);
}

double PosteriorTarget::rest_block() const {
  double lp = model::log_prior(state_, spec_);
  if (!std::isfinite(lp)) return neg_inf;
  for (std::size_t j = 0; j < layout_.coords().size(); ++j) {
    const Coord& c = layout_.coords()[j];
    if (c.field == Coord::Field::U) {
      lp -= stats::log_pdf_lognormal(state_.u[c.l][c.r][c.i], 0.0,
                                     state_.sigma2_u);
      lp -= x_[j];  // cancel the log jacobian folded into u_term
    }
    lp += layout_.log_jacobian(c, x_[j]);
  }
  return lp;
}

void PosteriorTarget::recompute_all() {
  ll_total_ = 0.0;
  for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
    cell_ll_cache_[ci] = cell_ll(ci);
    ll_total_ += cell_ll_cache_[ci];
  }
  u_total_ = 0.0;
  for (std::size_t j = 0; j < layout_.dim(); ++j) {
    if (cell_of_u_coord_[j] == static_cast<std::size_t>(-1)) {
      u_term_cache_[j] = 0.0;
    } else {
      u_term_cache_[j] = u_term(j);
      u_total_ += u_term_cache_[j];
    }
  }
  rest_ = rest_block();
  current_log_target_ = ll_total_ + u_total_ + rest_;
  if (!std::isfinite(current_log_target_)) current_log_target_ = neg_inf;
}

double PosteriorTarget::init(const std::vector<double>& x) {
  x_ = x;
  layout_.unpack_into(x_, state_);
  pending_ = Pending::None;
  recompute_all();
  return current_log_target_;
}

double PosteriorTarget::propose(std::size_t j, double v) {
  const Coord& c = layout_.coords()[j];
  const double nat = layout_.to_natural(c, v);
  old_natural_ = layout_.get_natural(state_, c);
  pending_j_ = j;

  if (!std::isfinite(v) || !std::isfinite(nat)) {
    pending_ = Pending::None;
    return neg_inf;
  }

  const std::size_t ci = cell_of_u_coord_[j];
  if (ci != static_cast<std::size_t>(-1)) {
    pending_ = Pending::UCoord;
    layout_.set_natural(state_, c, nat);
    const double old_x = x_[j];
    x_[j] = v;
    pending_new_cell_ = cell_ll(ci);
    pending_new_uterm_ = u_term(j);
    x_[j] = old_x;
    const double t = ll_total_ - cell_ll_cache_[ci] + pending_new_cell_ +
                     u_total_ - u_term_cache_[j] + pending_new_uterm_ + rest_;
    return std::isfinite(t) ? t : neg_inf;
  }

  // Global coordinate: full recomputation into scratch buffers.
  pending_ = Pending::Global;
  layout_.set_natural(state_, c, nat);
  const double old_x = x_[j];
  x_[j] = v;
  scratch_cells_.resize(cells_.size());
  scratch_ll_ = 0.0;
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    scratch_cells_[k] = cell_ll(k);
    scratch_ll_ += scratch_cells_[k];
  }
  scratch_u_ = 0.0;
  for (std::size_t q = 0; q < layout_.dim(); ++q)
    if (cell_of_u_coord_[q] != static_cast<std::size_t>(-1))
      scratch_u_ += u_term(q);
  scratch_rest_ = rest_block();
  x_[j] = old_x;
  const double t = scratch_ll_ + scratch_u_ + scratch_rest_;
  return std::isfinite(t) ? t : neg_inf;
}

void PosteriorTarget::accept(std::size_t j, double v) {
  x_[j] = v;
  if (pending_ == Pending::UCoord) {
    const std::size_t ci = cell_of_u_coord_[j];
    ll_total_ += pending_new_cell_ - cell_ll_cache_[ci];
    u_total_ += pending_new_uterm_ - u_term_cache_[j];
    cell_ll_cache_[ci] = pending_new_cell_;
    u_term_cache_[j] = pending_new_uterm_;
  } else {
    std::swap(cell_ll_cache_, scratch_cells_);
    ll_total_ = scratch_ll_;
    u_total_ = scratch_u_;
    rest_ = scratch_rest_;
    for (std::size_t q = 0; q < layout_.dim(); ++q)
      if (cell_of_u_coord_[q] != static_cast<std::size_t>(-1))
        u_term_cache_[q] = u_term(q);
  }
  current_log_target_ = ll_total_ + u_total_ + rest_;
  pending_ = Pending::None;
}

void PosteriorTarget::reject(std::size_t j) {
  if (pending_ == Pending::None) return;
  layout_.set_natural(state_, layout_.coords()[j], old_natural_);
  pending_ = Pending::None;
}

double PosteriorTarget::propose_flip(std::size_t f) {
  const std::size_t l = layout_.flips()[f].l;
  state_.k[l] ^= 1;
  pending_ = Pending::Flip;
  pending_j_ = f;
  const auto [begin, end] = cond_cell_range_[l];
  scratch_cells_.resize(cells_.size());
  double old_cond = 0.0;
  pending_cond_ll_ = 0.0;
  for (std::size_t ci = begin; ci < end; ++ci) {
    old_cond += cell_ll_cache_[ci];
    scratch_cells_[ci] = cell_ll(ci);
    pending_cond_ll_ += scratch_cells_[ci];
  }
  const double t = ll_total_ - old_cond + pending_cond_ll_ + u_total_ + rest_;
  return std::isfinite(t) ? t : neg_inf;
}

void PosteriorTarget::accept_flip(std::size_t f) {
  const std::size_t l = layout_.flips()[f].l;
  const auto [begin, end] = cond_cell_range_[l];
  for (std::size_t ci = begin; ci < end; ++ci) {
    ll_total_ += scratch_cells_[ci] - cell_ll_cache_[ci];
    cell_ll_cache_[ci] = scratch_cells_[ci];
  }
  current_log_target_ = ll_total_ + u_total_ + rest_;
  pending_ = Pending::None;
}

void PosteriorTarget::reject_flip(std::size_t f) {
  if (pending_ != Pending::Flip) return;
  state_.k[layout_.flips()[f].l] ^= 1;
  pending_ = Pending::None;
}

std::vector<double> PosteriorTarget::stored_row(const std::vector<double>&) {
  return layout_.natural_row(state_);
}

double PosteriorTarget::stored_log_density() {
  return ll_total_ + model::log_prior(state_, spec_);
}

double PosteriorTarget::full_recompute_check() const {
  double t = model::log_posterior(state_, data_, spec_);
  for (std::size_t j = 0; j < layout_.coords().size(); ++j)
    t += layout_.log_jacobian(layout_.coords()[j], x_[j]);
  return t;
}

// ---------------------------------------------------------------------------
// Initialization and multi-chain orchestration

namespace {

double draw_variance(Rng& rng, double shape, double scale, double lo = 1e-16,
                     double hi = 1e2) {
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.inv_gamma(shape, scale);
    if (v >= lo && v <= hi) return v;
  }
  return std::clamp(scale, lo, hi);
}

}  // namespace

LatentState initial_state(const CleanDataset& data, const ModelSpec& spec,
                          Rng& rng, int max_attempts) {
  const double M = spec.constants.monomer_mass;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    LatentState s = model::make_state_shape(data, spec);
    if (spec.adjust_concentration) {
      s.sigma2_u = draw_variance(rng, spec.priors.a_u, spec.priors.b_u);
      const double su = std::sqrt(s.sigma2_u);
      for (auto& lc : s.u)
        for (auto& rc : lc)
          for (double& u : rc) u = rng.lognormal(0.0, su);
    }
    s.dndc = rng.truncated_normal_pos(spec.priors.dndc_mean, spec.priors.dndc_sd);
    for (double& a2 : s.a2) a2 = rng.normal(spec.priors.a2_mean, spec.priors.a2_sd);
    s.sigma2_R = draw_variance(rng, spec.priors.a_R, spec.priors.b_R);
    s.sigma2_dn = draw_variance(rng, spec.priors.a_dn, spec.priors.b_dn);
    switch (spec.hypothesis.variant) {
      case MwVariant::FixedMultiple:
        break;
      case MwVariant::BernoulliDimer:
        for (int& k : s.k) k = rng.uniform() < 0.5 ? 0 : 1;
        break;
      case MwVariant::UniformContinuous:
        for (double& mw : s.mw)
          mw = rng.uniform(spec.hypothesis.lo_mult * M, spec.hypothesis.hi_mult * M);
        break;
      case MwVariant::HierarchicalNormal:
        s.mu_mw = rng.uniform(M, 20.0 * M);
        s.sigma2_mw = draw_variance(rng, 1.0, (M / 3.0) * (M / 3.0), 1e-8,
                                    400.0 * M * M);
        for (double& mw : s.mw)
          mw = rng.truncated_normal_pos(s.mu_mw, std::sqrt(s.sigma2_mw));
        break;
    }
    if (std::isfinite(model::log_posterior(s, data, spec))) return s;
  }
  throw InitializationFailure(
      "no finite-log-posterior starting state found in " +
      std::to_string(max_attempts) + " attempts");
}

PosteriorDraws run_chains(const CleanDataset& data, const ModelSpec& spec,
                          const ChainConfig& cfg) {
  cfg.validate();
  spec.validate();
  data.validate();
  const ParameterLayout layout = ParameterLayout::build(data, spec);

  PosteriorDraws out;
  out.param_names = layout.names();
  out.config = cfg;
  out.chains.resize(static_cast<std::size_t>(cfg.n_chains));
  out.chain_seeds.resize(static_cast<std::size_t>(cfg.n_chains));
  for (int c = 0; c < cfg.n_chains; ++c)
    out.chain_seeds[static_cast<std::size_t>(c)] =
        derive_seed(cfg.seed, static_cast<std::uint64_t>(c));

  std::vector<double> scales;
  scales.reserve(layout.dim());
  for (const auto& coord : layout.coords()) scales.push_back(coord.init_scale);

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.n_chains));
  auto run_one = [&](int c) {
    try {
      Rng rng(out.chain_seeds[static_cast<std::size_t>(c)]);
      const LatentState start = initial_state(data, spec, rng);
      PosteriorTarget target(data, spec, layout);
      out.chains[static_cast<std::size_t>(c)] =
          run_single_chain(target, layout.pack(start), scales, rng, cfg);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };

  if (cfg.n_chains == 1) {
    run_one(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(cfg.n_chains));
    for (int c = 0; c < cfg.n_chains; ++c) threads.emplace_back(run_one, c);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::size_t PosteriorDraws::index_of(const std::string& name) const {
  for (std::size_t p = 0; p < param_names.size(); ++p)
    if (param_names[p] == name) return p;
  throw ConfigError("unknown parameter `" + name + "`");
}

std::vector<double> PosteriorDraws::pooled(std::size_t p) const {
  std::vector<double> out;
  for (const auto& ch : chains)
    for (std::int64_t row = 0; row < ch.n_retained; ++row)
      out.push_back(ch.value(row, p));
  return out;
}

std::vector<double> PosteriorDraws::pooled(const std::string& name) const {
  return pooled(index_of(name));
}

// ---------------------------------------------------------------------------
// Convergence diagnostics

double gelman_rubin_column(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw TooFewChains("gelman_rubin needs >= 2 chains");
  for (const auto& c : chains)
    if (c.size() < 10)
      throw TooFewDraws("gelman_rubin needs >= 10 retained draws per chain");

  // Split each chain in half so within-chain drift also shows up.
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    const std::size_t h = c.size() / 2;
    halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(h));
    halves.emplace_back(c.end() - static_cast<std::ptrdiff_t>(h), c.end());
  }
  const double n = static_cast<double>(halves.front().size());
  std::vector<double> means, vars;
  for (const auto& h : halves) {
    means.push_back(stats::mean(h));
    vars.push_back(stats::variance(h));
  }
  const double w = stats::mean(vars);
  const double b_over_n = stats::variance(means);
  if (w == 0.0) return b_over_n == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (n - 1.0) / n * w + b_over_n;
  return std::sqrt(var_plus / w);
}

double gelman_rubin(const PosteriorDraws& draws, const std::string& param) {
  const std::size_t p = draws.index_of(param);
  std::vector<std::vector<double>> columns;
  for (const auto& ch : draws.chains) {
    std::vector<double> col;
    col.reserve(static_cast<std::size_t>(ch.n_retained));
    for (std::int64_t row = 0; row < ch.n_retained; ++row)
      col.push_back(ch.value(row, p));
    columns.push_back(std::move(col));
  }
  return gelman_rubin_column(columns);
}

// ---------------------------------------------------------------------------
// Persistence

void write_draws(const PosteriorDraws& draws, const std::string& dir,
                 const std::string& model_json) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    const auto& ch = draws.chains[c];
    std::ofstream out(fs::path(dir) / ("chain_" + std::to_string(c + 1) + ".csv"),
                      std::ios::binary);
    out << "iter";
    for (const auto& name : draws.param_names) out << ',' << name;
    out << ",log_post\n";
    for (std::int64_t row = 0; row < ch.n_retained; ++row) {
      out << ch.iters[static_cast<std::size_t>(row)];
      for (std::size_t p = 0; p < ch.row_width; ++p)
        out << ',' << format_double(ch.value(row, p));
      out << ',' << format_double(ch.log_post[static_cast<std::size_t>(row)]) << '\n';
    }
  }

  json manifest;
  manifest["schema_version"] = 1;
  manifest["config"] = json::parse(chain_config_to_json(draws.config));
  manifest["seeds"] = draws.chain_seeds;
  manifest["param_names"] = draws.param_names;
  json acc = json::array();
  for (const auto& ch : draws.chains) acc.push_back(ch.accept_rate);
  manifest["acceptance_rates"] = acc;
  json rhat = json::object();
  if (draws.n_chains() >= 2 && draws.n_retained() >= 10)
    for (const auto& name : draws.param_names) {
      const double r = gelman_rubin(draws, name);
      rhat[name] = std::isfinite(r) ? json(r) : json("inf");
    }
  manifest["rhat"] = rhat;
  manifest["model"] = json::parse(model_json);
  std::ofstream mf(fs::path(dir) / "draws_manifest.json", std::ios::binary);
  mf << manifest.dump(2) << "\n";
}

LoadedDraws read_draws(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "draws_manifest.json", std::ios::binary);
  if (!mf) throw ParseError(dir + ": draws_manifest.json not found");
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw ParseError(std::string("draws manifest: ") + e.what());
  }

  LoadedDraws out;
  out.model_json = manifest.at("model").dump();
  out.draws.config = chain_config_from_json_obj(&manifest.at("config"));
  out.draws.param_names =
      manifest.at("param_names").get<std::vector<std::string>>();
  out.draws.chain_seeds =
      manifest.at("seeds").get<std::vector<std::uint64_t>>();

  const std::size_t n_params = out.draws.param_names.size();
  for (std::size_t c = 0;; ++c) {
    const fs::path path = fs::path(dir) / ("chain_" + std::to_string(c + 1) + ".csv");
    std::ifstream in(path, std::ios::binary);
    if (!in) break;
    ChainResult ch;
    ch.row_width = n_params;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');
      ch.iters.push_back(std::stoll(cell));
      for (std::size_t p = 0; p < n_params; ++p) {
        std::getline(ss, cell, ',');
        ch.draws.push_back(std::stod(cell));
      }
      std::getline(ss, cell, ',');
      ch.log_post.push_back(std::stod(cell));
    }
    ch.n_retained = static_cast<std::int64_t>(ch.iters.size());
    const auto& acc = manifest.at("acceptance_rates");
    if (c < acc.size()) ch.accept_rate = acc[c].get<std::vector<double>>();
    out.draws.chains.push_back(std::move(ch));
  }
  if (out.draws.chains.empty()) throw ParseError(dir + ": no chain CSVs found");
  return out;
}

}  // namespace sls::mcmc
