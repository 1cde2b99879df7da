#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "sls/errors.hpp"
#include "sls/forward.hpp"
#include "sls/sampler.hpp"
#include "sls/simulate.hpp"
#include "sls/stats.hpp"

using namespace sls;
using namespace sls::mcmc;
using model::LatentState;
using model::ModelSpec;
using model::ParameterLayout;

namespace {

// Small synthetic dataset from the generative model, used across the tests.
CleanDataset synthetic_data(std::uint64_t seed, int replicates = 1,
                            double a2 = 1e-4, double pct = 5.0) {
  sim::SimTruth truth;
  Rng rng(seed);
  return sim::generate_dataset(truth, a2, sim::sigma_u_from_pct(pct), replicates,
                               rng);
}

ModelSpec m1_spec() {
  sim::SimTruth truth;
  return sim::spec_for_cell(truth, sim::PriorRegime::Intermediate,
                            std::pow(sim::sigma_u_from_pct(5.0), 2));
}

mcmc::ChainConfig quick_cfg(std::int64_t n_iter, std::int64_t burn_in,
                            std::int64_t thin, int chains, std::uint64_t seed) {
  mcmc::ChainConfig cfg;
  cfg.n_iter = n_iter;
  cfg.burn_in = burn_in;
  cfg.thin = thin;
  cfg.n_chains = chains;
  cfg.seed = seed;
  return cfg;
}

struct GaussCtx {
  std::vector<double> y;
  double like_var;
  double prior_mean;
  double prior_var;
};

double gauss_mean_log_post(const std::vector<double>& x, const void* ctx_raw) {
  const auto* ctx = static_cast<const GaussCtx*>(ctx_raw);
  const double theta = x[0];
  double lp = stats::log_pdf_normal(theta, ctx->prior_mean, ctx->prior_var);
  for (double v : ctx->y) lp += stats::log_pdf_normal(v, theta, ctx->like_var);
  return lp;
}

}  // namespace

TEST_CASE("posterior target caches agree with full recomputation") {
  for (const auto& hyp :
       {model::MwHypothesis::fixed(1), model::MwHypothesis::bernoulli_dimer(),
        model::MwHypothesis::uniform(1, 2), model::MwHypothesis::hierarchical()}) {
    auto spec = m1_spec();
    spec.hypothesis = hyp;
    const auto data = synthetic_data(100, 2);
    const auto layout = ParameterLayout::build(data, spec);
    PosteriorTarget target(data, spec, layout);

    Rng rng(7);
    const LatentState start = initial_state(data, spec, rng);
    std::vector<double> x = layout.pack(start);
    double lp = target.init(x);
    REQUIRE(std::isfinite(lp));
    CHECK(lp == doctest::Approx(target.full_recompute_check()).epsilon(1e-9));

    // Random sweeps with a mix of accepts and rejects, then re-audit.
    for (int sweep = 0; sweep < 5; ++sweep) {
      for (std::size_t j = 0; j < layout.dim(); ++j) {
        const double v = x[j] + 0.05 * rng.normal();
        const double lp_new = target.propose(j, v);
        if (std::log(rng.uniform()) < lp_new - lp) {
          target.accept(j, v);
          x[j] = v;
          lp = lp_new;
        } else {
          target.reject(j);
        }
      }
      for (std::size_t f = 0; f < target.n_flips(); ++f) {
        const double lp_new = target.propose_flip(f);
        if (std::log(rng.uniform()) < lp_new - lp) {
          target.accept_flip(f);
          lp = lp_new;
        } else {
          target.reject_flip(f);
        }
      }
    }
    const double audit = target.full_recompute_check();
    CHECK(std::abs(lp - audit) <= 1e-8 * std::max(1.0, std::abs(audit)));
  }
}

TEST_CASE("conjugate Gaussian-mean reduction matches the closed form") {
  GaussCtx ctx;
  ctx.like_var = 4.0;
  ctx.prior_mean = -1.0;
  ctx.prior_var = 9.0;
  std::mt19937_64 gen(123);
  std::normal_distribution<double> noise(3.0, std::sqrt(ctx.like_var));
  for (int i = 0; i < 25; ++i) ctx.y.push_back(noise(gen));

  double sum = 0.0;
  for (double v : ctx.y) sum += v;
  const double n = static_cast<double>(ctx.y.size());
  const double post_var = 1.0 / (1.0 / ctx.prior_var + n / ctx.like_var);
  const double post_mean =
      post_var * (ctx.prior_mean / ctx.prior_var + sum / ctx.like_var);

  FunctionTarget target(1, gauss_mean_log_post, &ctx);
  Rng rng(55);
  const auto cfg = quick_cfg(30000, 5000, 5, 1, 55);
  const auto res = run_single_chain(target, {0.0}, {0.5}, rng, cfg);

  std::vector<double> draws;
  for (std::int64_t r = 0; r < res.n_retained; ++r) draws.push_back(res.value(r, 0));
  const double mcse = oracle::batch_means_mcse(draws);
  CHECK(std::abs(stats::mean(draws) - post_mean) <= 3.0 * mcse);
  CHECK(stats::variance(draws) ==
        doctest::Approx(post_var).epsilon(0.15));  // ~ 3 MC sds for this run
}

TEST_CASE("prior-only run recovers the A2 prior") {
  // One condition with an empty run: every parameter keeps its prior.
  CleanDataset data;
  ConditionData cond;
  cond.condition_id = "c1";
  cond.runs.push_back(RunData{"r1", {}});
  data.conditions.push_back(cond);
  const auto spec = m1_spec();

  auto cfg = quick_cfg(30000, 10000, 10, 2, 99);
  const auto draws = run_chains(data, spec, cfg);
  const auto a2 = draws.pooled("A2_c1");
  const double mcse = oracle::batch_means_mcse(a2);
  CHECK(std::abs(stats::mean(a2) - 0.0) <= 3.0 * std::max(mcse, 1e-3));
  CHECK(stats::sd(a2) == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("identical seeds give bit-identical draws") {
  const auto data = synthetic_data(5);
  const auto spec = m1_spec();
  const auto cfg = quick_cfg(2000, 1000, 10, 2, 1234);
  const auto a = run_chains(data, spec, cfg);
  const auto b = run_chains(data, spec, cfg);
  REQUIRE(a.chains.size() == b.chains.size());
  for (std::size_t c = 0; c < a.chains.size(); ++c) {
    CHECK(a.chains[c].draws == b.chains[c].draws);
    CHECK(a.chains[c].log_post == b.chains[c].log_post);
  }
}

TEST_CASE("thinning arithmetic") {
  struct Case {
    std::int64_t n_iter, burn_in, thin;
  };
  for (const Case& c : {Case{1000, 500, 7}, Case{300000, 200000, 250},
                        Case{30000, 20000, 25}, Case{101, 13, 3}}) {
    mcmc::ChainConfig cfg;
    cfg.n_iter = c.n_iter;
    cfg.burn_in = c.burn_in;
    cfg.thin = c.thin;
    CHECK(cfg.retained_per_chain() == (c.n_iter - c.burn_in) / c.thin);
  }
  const auto data = synthetic_data(6);
  const auto spec = m1_spec();
  const auto cfg = quick_cfg(1201, 400, 7, 1, 3);
  const auto draws = run_chains(data, spec, cfg);
  CHECK(draws.chains[0].n_retained == (1201 - 400) / 7);
  CHECK(static_cast<std::int64_t>(draws.chains[0].log_post.size()) ==
        cfg.retained_per_chain());
}

TEST_CASE("retained draws satisfy the state positivity invariants") {
  const auto data = synthetic_data(7);
  const auto spec = m1_spec();
  const auto layout = ParameterLayout::build(data, spec);
  const auto cfg = quick_cfg(4000, 2000, 5, 2, 17);
  const auto draws = run_chains(data, spec, cfg);
  std::vector<double> row(layout.n_params());
  for (const auto& ch : draws.chains)
    for (std::int64_t r = 0; r < ch.n_retained; ++r) {
      for (std::size_t p = 0; p < layout.n_params(); ++p) row[p] = ch.value(r, p);
      const LatentState s = layout.state_from_row(row);
      CHECK(s.dndc > 0.0);
      CHECK(s.sigma2_u > 0.0);
      CHECK(s.sigma2_R > 0.0);
      CHECK(s.sigma2_dn > 0.0);
      for (const auto& lc : s.u)
        for (const auto& rc : lc)
          for (double u : rc) CHECK(u > 0.0);
    }
}

TEST_CASE("post-adaptation acceptance rates are within the working band") {
  const auto data = synthetic_data(8, 1);
  const auto spec = m1_spec();
  const auto cfg = quick_cfg(20000, 10000, 10, 1, 21);
  const auto draws = run_chains(data, spec, cfg);
  const auto& rates = draws.chains[0].accept_rate;
  REQUIRE_FALSE(rates.empty());
  for (std::size_t j = 0; j < rates.size(); ++j) {
    CHECK(rates[j] >= 0.1);
    CHECK(rates[j] <= 0.7);
  }
}

TEST_CASE("split-chain R-hat behaviour") {
  // i.i.d. normal chains give a value near 1.
  std::mt19937_64 gen(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> iid(4);
  for (auto& c : iid)
    for (int i = 0; i < 1000; ++i) c.push_back(normal(gen));
  const double r_iid = gelman_rubin_column(iid);
  CHECK(r_iid >= 0.99);
  CHECK(r_iid <= 1.05);

  // Two constant chains at different values diverge.
  std::vector<std::vector<double>> stuck{std::vector<double>(100, 0.0),
                                         std::vector<double>(100, 5.0)};
  CHECK(gelman_rubin_column(stuck) > 10.0);

  // A chain equal to its own split mirror cannot exceed 1.
  std::vector<double> half;
  for (int i = 0; i < 250; ++i) half.push_back(normal(gen));
  std::vector<double> mirrored = half;
  mirrored.insert(mirrored.end(), half.begin(), half.end());
  std::vector<std::vector<double>> mirror{mirrored, mirrored};
  CHECK(gelman_rubin_column(mirror) <= 1.0 + 1e-9);

  CHECK_THROWS_AS(gelman_rubin_column({std::vector<double>(100, 0.0)}),
                  TooFewChains);
  CHECK_THROWS_AS(gelman_rubin_column(
                      {std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)}),
                  TooFewDraws);
}

TEST_CASE("initial states are reproducible and valid") {
  const auto data = synthetic_data(9, 1);
  const auto spec = m1_spec();
  Rng r1(42), r2(42);
  const auto s1 = initial_state(data, spec, r1);
  const auto s2 = initial_state(data, spec, r2);
  CHECK(s1.dndc == s2.dndc);
  CHECK(s1.a2[0] == s2.a2[0]);
  CHECK(s1.sigma2_R == s2.sigma2_R);

  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    const auto s = initial_state(data, spec, rng);
    const double lp = model::log_posterior(s, data, spec);
    REQUIRE(std::isfinite(lp));
  }
}

TEST_CASE("draws persistence round trip") {
  const auto data = synthetic_data(10);
  const auto spec = m1_spec();
  const auto cfg = quick_cfg(3000, 1000, 10, 2, 5);
  const auto draws = run_chains(data, spec, cfg);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sls_draws_roundtrip_test";
  fs::remove_all(dir);
  write_draws(draws, dir.string(), model::model_spec_to_json(spec));
  const auto loaded = read_draws(dir.string());
  REQUIRE(loaded.draws.chains.size() == draws.chains.size());
  CHECK(loaded.draws.param_names == draws.param_names);
  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    REQUIRE(loaded.draws.chains[c].n_retained == draws.chains[c].n_retained);
    CHECK(loaded.draws.chains[c].draws == draws.chains[c].draws);
    CHECK(loaded.draws.chains[c].log_post == draws.chains[c].log_post);
  }
  const auto round_spec = model::model_spec_from_json(loaded.model_json);
  CHECK(round_spec.constants.monomer_mass == spec.constants.monomer_mass);
  fs::remove_all(dir);
}

TEST_CASE("linear-Gaussian reduction through the full model stack") {
  // Pin everything except A2 with extremely tight priors; the posterior on
  // A2 is then the closed-form Bayesian linear regression result.
  sim::SimTruth truth;
  Rng gen_rng(404);
  const double a2_true = 2e-4;
  auto data = sim::generate_dataset(truth, a2_true, 0.0, 1, gen_rng);
  for (auto& lv : data.conditions[0].runs[0].levels) lv.ri_included = false;

  ModelSpec spec;
  spec.hypothesis = model::MwHypothesis::fixed(1);
  spec.constants.lambda = truth.lambda;
  spec.constants.n0 = truth.n0;
  spec.constants.monomer_mass = truth.monomer_mass;
  spec.adjust_concentration = false;
  spec.priors.dndc_mean = truth.dndc;
  spec.priors.dndc_sd = 1e-10;  // pinned
  spec.priors.a2_mean = 0.0;
  spec.priors.a2_sd = 1e-3;
  const double sigma2 = truth.sigma2_R;
  spec.priors.a_R = 1e8;  // pins sigma2_R at b/(a+1) ~ sigma2
  spec.priors.b_R = sigma2 * (spec.priors.a_R + 1.0);
  spec.priors.a_dn = 1.0;
  spec.priors.b_dn = 1e-8;
  spec.priors.a_u = 1.0;
  spec.priors.b_u = 1e-4;

  // Closed form: R_i = base_i - slope_i * A2 + noise.
  const OpticalParams optics{truth.dndc, spec.constants};
  double precision = 1.0 / (spec.priors.a2_sd * spec.priors.a2_sd);
  double weighted = 0.0;
  for (const auto& lv : data.conditions[0].runs[0].levels) {
    const double base = kstar(optics) * truth.monomer_mass * lv.c_meas;
    const double slope = 2.0 * kstar(optics) * truth.monomer_mass *
                         truth.monomer_mass * lv.c_meas * lv.c_meas;
    const double resid = base - lv.rayleigh;  // slope * A2 + noise
    precision += slope * slope / sigma2;
    weighted += slope * resid / sigma2;
  }
  const double post_var = 1.0 / precision;
  const double post_mean = post_var * weighted;

  const auto cfg = quick_cfg(40000, 20000, 10, 2, 717);
  const auto draws = run_chains(data, spec, cfg);
  const auto a2 = draws.pooled("A2_c1");
  const double mcse = oracle::batch_means_mcse(a2);
  CHECK(std::abs(stats::mean(a2) - post_mean) <= 3.0 * std::max(mcse, 1e-8));
  CHECK(stats::sd(a2) == doctest::Approx(std::sqrt(post_var)).epsilon(0.1));
}
