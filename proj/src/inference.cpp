#include "sls/inference.hpp"

#include <cmath>

#include "sls/errors.hpp"
#include "sls/forward.hpp"
#include "sls/stats.hpp"

namespace sls::infer {

using model::LatentState;
using model::ModelSpec;
using model::ParameterLayout;

PosteriorSummary summarize(const mcmc::PosteriorDraws& draws) {
  std::int64_t pooled_count = 0;
  for (const auto& ch : draws.chains) pooled_count += ch.n_retained;
  if (pooled_count < 100)
    throw TooFewDraws("summarize needs >= 100 pooled draws, got " +
                      std::to_string(pooled_count));

  PosteriorSummary out;
  for (std::size_t p = 0; p < draws.param_names.size(); ++p) {
    const std::vector<double> col = draws.pooled(p);
    ParamSummary s;
    s.name = draws.param_names[p];
    s.mean = stats::mean(col);
    s.sd = stats::sd(col);
    s.q025 = stats::quantile(col, 0.025);
    s.q50 = stats::quantile(col, 0.5);
    s.q975 = stats::quantile(col, 0.975);
    if (s.name.rfind("A2_", 0) == 0) {
      std::size_t n_pos = 0;
      for (double v : col) n_pos += v > 0.0 ? 1 : 0;
      out.prob_positive.emplace_back(
          s.name, static_cast<double>(n_pos) / static_cast<double>(col.size()));
    }
    out.params.push_back(std::move(s));
  }
  return out;
}

DicReport dic(const mcmc::PosteriorDraws& draws, const CleanDataset& data,
              const ModelSpec& spec) {
  const ParameterLayout layout = ParameterLayout::build(data, spec);
  if (layout.n_params() != draws.param_names.size())
    throw DimensionMismatch("draws do not match the model layout");

  std::int64_t pooled_count = 0;
  for (const auto& ch : draws.chains) pooled_count += ch.n_retained;
  if (pooled_count < 1) throw TooFewDraws("dic needs retained draws");

  // Plug-in: pooled mean for continuous coordinates, mode for the flags.
  std::vector<double> plug(layout.n_params(), 0.0);
  for (std::size_t p = 0; p < layout.n_params(); ++p)
    plug[p] = stats::mean(draws.pooled(p));
  for (std::size_t f = 0; f < layout.flips().size(); ++f) {
    const std::size_t p = layout.dim() + f;
    plug[p] = plug[p] >= 0.5 ? 1.0 : 0.0;
  }

  double dbar = 0.0;
  std::vector<double> row(layout.n_params());
  for (const auto& ch : draws.chains)
    for (std::int64_t r = 0; r < ch.n_retained; ++r) {
      for (std::size_t p = 0; p < layout.n_params(); ++p) row[p] = ch.value(r, p);
      const LatentState s = layout.state_from_row(row);
      const double d = -2.0 * model::log_likelihood(s, data, spec);
      if (!std::isfinite(d))
        throw NonFiniteDeviance("non-finite deviance at retained draw");
      dbar += d;
    }
  dbar /= static_cast<double>(pooled_count);

  const LatentState plug_state = layout.state_from_row(plug);
  const double d_at_mean = -2.0 * model::log_likelihood(plug_state, data, spec);
  if (!std::isfinite(d_at_mean))
    throw NonFiniteDeviance("non-finite deviance at the plug-in state");

  DicReport rep;
  rep.dbar = dbar;
  rep.d_at_mean = d_at_mean;
  rep.p_d = dbar - d_at_mean;
  rep.dic = dbar + rep.p_d;
  return rep;
}

PpcResult ppc_pvalues(const mcmc::PosteriorDraws& draws, const CleanDataset& data,
                      const ModelSpec& spec, Rng& rng) {
  const ParameterLayout layout = ParameterLayout::build(data, spec);
  if (layout.n_params() != draws.param_names.size())
    throw DimensionMismatch("draws do not match the model layout");

  // Flatten the included observations once, in dataset order.
  struct Slot {
    std::size_t l, r, i;
  };
  std::vector<Slot> ls_slots, ri_slots;
  for (std::size_t l = 0; l < data.conditions.size(); ++l)
    for (std::size_t r = 0; r < data.conditions[l].runs.size(); ++r)
      for (std::size_t i = 0; i < data.conditions[l].runs[r].levels.size(); ++i) {
        const auto& lv = data.conditions[l].runs[r].levels[i];
        if (lv.ls_included) ls_slots.push_back({l, r, i});
        if (lv.ri_included) ri_slots.push_back({l, r, i});
      }

  std::vector<std::int64_t> ls_le(ls_slots.size(), 0), ri_le(ri_slots.size(), 0);
  std::int64_t n_draws = 0;
  std::vector<double> row(layout.n_params());
  for (const auto& ch : draws.chains)
    for (std::int64_t d = 0; d < ch.n_retained; ++d) {
      for (std::size_t p = 0; p < layout.n_params(); ++p) row[p] = ch.value(d, p);
      const LatentState s = layout.state_from_row(row);
      const OpticalParams optics{s.dndc, spec.constants};
      const double sd_R = std::sqrt(s.sigma2_R);
      const double sd_dn = std::sqrt(s.sigma2_dn);
      ++n_draws;
      for (std::size_t k = 0; k < ls_slots.size(); ++k) {
        const auto& lv =
            data.conditions[ls_slots[k].l].runs[ls_slots[k].r].levels[ls_slots[k].i];
        const double u =
            spec.adjust_concentration ? s.u[ls_slots[k].l][ls_slots[k].r][ls_slots[k].i] : 1.0;
        const double mw =
            model::mw_of(s, spec.hypothesis, spec.constants.monomer_mass, ls_slots[k].l);
        const double mean = rayleigh(lv.c_meas * u, mw, s.a2[ls_slots[k].l], optics);
        const double rep = rng.normal(mean, sd_R);
        if (rep <= lv.rayleigh) ++ls_le[k];
      }
      for (std::size_t k = 0; k < ri_slots.size(); ++k) {
        const auto& lv =
            data.conditions[ri_slots[k].l].runs[ri_slots[k].r].levels[ri_slots[k].i];
        const double u =
            spec.adjust_concentration ? s.u[ri_slots[k].l][ri_slots[k].r][ri_slots[k].i] : 1.0;
        const double mean = lv.c_meas * u * s.dndc;
        const double rep = rng.truncated_normal_pos(mean, sd_dn);
        if (rep <= *lv.delta_n) ++ri_le[k];
      }
    }

  PpcResult out;
  for (std::size_t k = 0; k < ls_slots.size(); ++k) {
    const auto& lv =
        data.conditions[ls_slots[k].l].runs[ls_slots[k].r].levels[ls_slots[k].i];
    out.rayleigh.push_back({ls_slots[k].l, ls_slots[k].r, lv.level,
                            static_cast<double>(ls_le[k]) / static_cast<double>(n_draws)});
  }
  for (std::size_t k = 0; k < ri_slots.size(); ++k) {
    const auto& lv =
        data.conditions[ri_slots[k].l].runs[ri_slots[k].r].levels[ri_slots[k].i];
    out.delta_n.push_back({ri_slots[k].l, ri_slots[k].r, lv.level,
                           static_cast<double>(ri_le[k]) / static_cast<double>(n_draws)});
  }
  return out;
}

std::vector<RatioSummary> concentration_ratios(const mcmc::PosteriorDraws& draws,
                                               const CleanDataset& data,
                                               const ModelSpec& spec) {
  const ParameterLayout layout = ParameterLayout::build(data, spec);
  if (layout.n_params() != draws.param_names.size())
    throw DimensionMismatch("draws do not match the model layout");

  std::vector<RatioSummary> out;
  for (std::size_t j = 0; j < layout.coords().size(); ++j) {
    const auto& c = layout.coords()[j];
    if (c.field != model::Coord::Field::U) continue;
    const std::vector<double> col = draws.pooled(j);
    RatioSummary s;
    s.condition = c.l;
    s.run = c.r;
    s.level = data.conditions[c.l].runs[c.r].levels[c.i].level;
    s.mean = stats::mean(col);
    s.sd = stats::sd(col);
    s.q025 = stats::quantile(col, 0.025);
    s.q975 = stats::quantile(col, 0.975);
    out.push_back(s);
  }
  return out;
}

}  // namespace sls::infer
