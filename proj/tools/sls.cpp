// Command-line front end: clean / fit / compare / simulate / ppc.
// Exit codes: 0 success, 2 usage or config error, 3 numerical failure,
// 4 convergence gate failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sls/constants.hpp"
#include "sls/dataset.hpp"
#include "sls/errors.hpp"
#include "sls/inference.hpp"
#include "sls/manifest.hpp"
#include "sls/model.hpp"
#include "sls/preprocess.hpp"
#include "sls/sampler.hpp"
#include "sls/simulate.hpp"
#include "sls/stats.hpp"
#include "sls/trace.hpp"
#include "sls/util.hpp"
#include "sls/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitConvergence = 4;

struct ChainOptions {
  std::int64_t iters = 300000;
  std::int64_t burnin = 200000;
  std::int64_t thin = 250;
  int chains = 5;
  std::uint64_t seed = 1;

  sls::mcmc::ChainConfig to_config() const {
    sls::mcmc::ChainConfig cfg;
    cfg.n_iter = iters;
    cfg.burn_in = burnin;
    cfg.thin = thin;
    cfg.n_chains = chains;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
};

void add_chain_options(CLI::App* cmd, ChainOptions& opts) {
  cmd->add_option("--iters", opts.iters, "MCMC iterations per chain");
  cmd->add_option("--burnin", opts.burnin, "Burn-in iterations");
  cmd->add_option("--thin", opts.thin, "Thinning stride");
  cmd->add_option("--chains", opts.chains, "Number of chains");
  cmd->add_option("--seed", opts.seed, "Master RNG seed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sls::ConfigError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sls::ConfigError(path.string() + ": cannot open for writing");
  out << content;
}

// ---------------------------------------------------------------------------
// clean

struct CleanArgs {
  std::string ls_trace;
  std::string ri_trace;
  std::string design;  // JSON list of nominal mg/mL concentrations
  std::string out_dir;
  std::string condition_id = "c1";
  std::string run_id = "run1";
  double tau = 1.0;
  bool smooth = false;
  std::size_t ls_channel = 0;
  int ri_levels = -1;  // include RI for the first N levels; -1 = all
  double confidence = 0.95;
};

struct CleanedChannel {
  sls::prep::TrimResult trim;
  sls::prep::ClusterAssignment clusters;
  std::vector<sls::prep::TimedSummary> summaries;  // per cluster, time order
  std::vector<double> corrected;                   // per sample cluster
};

CleanedChannel clean_channel(const sls::RawTrace& trace, std::size_t channel,
                             double tau, bool smooth, int k,
                             double confidence) {
  CleanedChannel out;
  out.trim = sls::prep::trim(trace, channel, tau, smooth);
  if (out.trim.degenerate_spread)
    std::cerr << "warning: flat instability spread; no points trimmed\n";

  std::vector<std::vector<double>> points;
  points.reserve(out.trim.retained.size());
  for (std::size_t idx : out.trim.retained) points.push_back(trace.values[idx]);
  out.clusters = sls::prep::agglomerate(points, k);

  for (int c = 0; c < k; ++c) {
    std::vector<double> values;
    std::vector<double> times;
    for (std::size_t p = 0; p < points.size(); ++p)
      if (out.clusters.labels[p] == c) {
        values.push_back(points[p][channel]);
        times.push_back(trace.times[out.trim.retained[p]]);
      }
    sls::prep::TimedSummary ts;
    ts.stats = sls::prep::summarize_cluster(values, confidence);
    if (ts.stats.ci_degenerate)
      std::cerr << "warning: cluster " << c + 1
                << " too small for the requested CI coverage\n";
    ts.mid_time = 0.5 * (times.front() + times.back());
    out.summaries.push_back(ts);
  }

  std::vector<sls::prep::TimedSummary> interior(out.summaries.begin() + 1,
                                                out.summaries.end() - 1);
  out.corrected = sls::prep::baseline_correct(interior, out.summaries.front(),
                                              out.summaries.back());
  return out;
}

void write_points_csv(const fs::path& path, const sls::RawTrace& trace,
                      std::size_t channel, const CleanedChannel& cleaned) {
  std::string csv = "time,value,kept,cluster\n";
  std::size_t next_kept = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    int cluster = -1;
    bool kept = false;
    if (next_kept < cleaned.trim.retained.size() &&
        cleaned.trim.retained[next_kept] == i) {
      kept = true;
      cluster = cleaned.clusters.labels[next_kept];
      ++next_kept;
    }
    csv += sls::format_double(trace.times[i]);
    csv += ',';
    csv += sls::format_double(trace.values[i][channel]);
    csv += ',';
    csv += kept ? '1' : '0';
    csv += ',';
    csv += std::to_string(cluster);
    csv += '\n';
  }
  write_file(path, csv);
}

int cmd_clean(const CleanArgs& args) {
  const json design_json = json::parse(read_file(args.design));
  std::vector<double> design_mg;
  if (design_json.is_array())
    design_mg = design_json.get<std::vector<double>>();
  else
    design_mg = design_json.at("concentrations_mg_ml").get<std::vector<double>>();
  if (design_mg.empty()) throw sls::ConfigError("design lists no concentrations");

  const int k = static_cast<int>(design_mg.size()) + 2;  // leading/trailing buffers
  const auto ls = sls::ingest_trace(args.ls_trace, sls::TraceKind::LightScattering);
  if (ls.dropped_nonfinite > 0)
    std::cerr << "note: dropped " << ls.dropped_nonfinite
              << " non-finite LS rows\n";
  const CleanedChannel ls_clean =
      clean_channel(ls, args.ls_channel, args.tau, args.smooth, k, args.confidence);

  std::optional<sls::RawTrace> ri;
  std::optional<CleanedChannel> ri_clean;
  if (!args.ri_trace.empty()) {
    ri = sls::ingest_trace(args.ri_trace, sls::TraceKind::RefractiveIndex);
    if (ri->dropped_nonfinite > 0)
      std::cerr << "note: dropped " << ri->dropped_nonfinite
                << " non-finite RI rows\n";
    ri_clean = clean_channel(*ri, 0, args.tau, args.smooth, k, args.confidence);
  }

  sls::CleanDataset ds;
  sls::ConditionData cond;
  cond.condition_id = args.condition_id;
  sls::RunData run;
  run.run_id = args.run_id;
  for (std::size_t i = 0; i < design_mg.size(); ++i) {
    sls::LevelObs lv;
    lv.level = static_cast<int>(i + 1);
    lv.c_meas = sls::convert_concentration(design_mg[i]);
    lv.rayleigh = ls_clean.corrected[i];
    lv.ls_included = true;
    if (ri_clean) {
      const double dn = ri_clean->corrected[i];
      const bool in_ri_range =
          args.ri_levels < 0 || static_cast<int>(i) < args.ri_levels;
      if (in_ri_range && dn > 0.0) {
        lv.delta_n = dn;
        lv.ri_included = true;
      } else if (in_ri_range) {
        std::cerr << "warning: level " << i + 1
                  << " has non-positive delta_n; RI excluded\n";
      }
    }
    run.levels.push_back(lv);
  }
  cond.runs.push_back(std::move(run));
  ds.conditions.push_back(std::move(cond));
  ds.validate();

  fs::create_directories(args.out_dir);
  sls::write_dataset_json(ds, (fs::path(args.out_dir) / "dataset.json").string());
  write_points_csv(fs::path(args.out_dir) / "ls_points.csv", ls, args.ls_channel,
                   ls_clean);
  if (ri_clean)
    write_points_csv(fs::path(args.out_dir) / "ri_points.csv", *ri, 0, *ri_clean);

  std::string summary_csv =
      "kind,cluster,n,mid_time,median,ci_lo,ci_hi,corrected\n";
  auto append_summaries = [&](const char* kind, const CleanedChannel& ch) {
    for (std::size_t c = 0; c < ch.summaries.size(); ++c) {
      const auto& ts = ch.summaries[c];
      const bool is_buffer = c == 0 || c + 1 == ch.summaries.size();
      summary_csv += kind;
      summary_csv += ',' + std::to_string(c + 1);
      summary_csv += ',' + std::to_string(ts.stats.n);
      summary_csv += ',' + sls::format_double(ts.mid_time);
      summary_csv += ',' + sls::format_double(ts.stats.median);
      summary_csv += ',' + sls::format_double(ts.stats.ci_lo);
      summary_csv += ',' + sls::format_double(ts.stats.ci_hi);
      summary_csv +=
          ',' + (is_buffer ? std::string("buffer")
                           : sls::format_double(ch.corrected[c - 1]));
      summary_csv += '\n';
    }
  };
  append_summaries("LS", ls_clean);
  if (ri_clean) append_summaries("RI", *ri_clean);
  write_file(fs::path(args.out_dir) / "cluster_summaries.csv", summary_csv);

  json config;
  config["tau"] = args.tau;
  config["smooth"] = args.smooth;
  config["ls_channel"] = args.ls_channel;
  config["ri_levels"] = args.ri_levels;
  config["confidence"] = args.confidence;
  config["design_mg_ml"] = design_mg;
  sls::RunManifest manifest;
  manifest.command = "clean";
  manifest.config_json = config.dump();
  manifest.input_digests.emplace_back(args.ls_trace, sls::file_digest(args.ls_trace));
  if (!args.ri_trace.empty())
    manifest.input_digests.emplace_back(args.ri_trace,
                                        sls::file_digest(args.ri_trace));
  manifest.write(args.out_dir);
  std::cout << "clean: wrote " << args.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

void write_summary_files(const fs::path& out_dir,
                         const sls::infer::PosteriorSummary& summary,
                         const sls::CleanDataset& data,
                         const std::vector<sls::infer::RatioSummary>& ratios) {
  std::string params_csv = "param,mean,sd,q025,q50,q975\n";
  for (const auto& p : summary.params) {
    params_csv += p.name;
    params_csv += ',' + sls::format_double(p.mean);
    params_csv += ',' + sls::format_double(p.sd);
    params_csv += ',' + sls::format_double(p.q025);
    params_csv += ',' + sls::format_double(p.q50);
    params_csv += ',' + sls::format_double(p.q975);
    params_csv += '\n';
  }
  write_file(out_dir / "params_summary.csv", params_csv);

  std::string a2_csv = "condition,mean,sd,q025,q975,prob_positive\n";
  for (std::size_t l = 0; l < data.conditions.size(); ++l) {
    const std::string name = "A2_c" + std::to_string(l + 1);
    const sls::infer::ParamSummary* ps = nullptr;
    for (const auto& p : summary.params)
      if (p.name == name) ps = &p;
    double prob = 0.0;
    for (const auto& [n, v] : summary.prob_positive)
      if (n == name) prob = v;
    if (!ps) continue;
    a2_csv += data.conditions[l].condition_id;
    a2_csv += ',' + sls::format_double(ps->mean);
    a2_csv += ',' + sls::format_double(ps->sd);
    a2_csv += ',' + sls::format_double(ps->q025);
    a2_csv += ',' + sls::format_double(ps->q975);
    a2_csv += ',' + sls::format_double(prob);
    a2_csv += '\n';
  }
  write_file(out_dir / "a2_summary.csv", a2_csv);

  std::string ratio_csv = "condition,run,level,mean,sd,q025,q975\n";
  for (const auto& r : ratios) {
    ratio_csv += data.conditions[r.condition].condition_id;
    ratio_csv += ',' + data.conditions[r.condition].runs[r.run].run_id;
    ratio_csv += ',' + std::to_string(r.level);
    ratio_csv += ',' + sls::format_double(r.mean);
    ratio_csv += ',' + sls::format_double(r.sd);
    ratio_csv += ',' + sls::format_double(r.q025);
    ratio_csv += ',' + sls::format_double(r.q975);
    ratio_csv += '\n';
  }
  write_file(out_dir / "concentration_ratios.csv", ratio_csv);
}

int cmd_fit(const std::string& dataset_path, const std::string& model_path,
            const ChainOptions& chain_opts, const std::string& out_dir,
            bool allow_nonconverged) {
  const sls::CleanDataset data = sls::read_dataset_json(dataset_path);
  const sls::model::ModelSpec spec = sls::model::read_model_spec(model_path);
  const sls::mcmc::ChainConfig cfg = chain_opts.to_config();

  const sls::mcmc::PosteriorDraws draws = sls::mcmc::run_chains(data, spec, cfg);
  fs::create_directories(out_dir);
  sls::mcmc::write_draws(draws, out_dir, sls::model::model_spec_to_json(spec));

  const auto summary = sls::infer::summarize(draws);
  const auto ratios = sls::infer::concentration_ratios(draws, data, spec);
  write_summary_files(out_dir, summary, data, ratios);

  sls::RunManifest manifest;
  manifest.command = "fit";
  json config;
  config["chain"] = json::parse(sls::mcmc::chain_config_to_json(cfg));
  config["model"] = json::parse(sls::model::model_spec_to_json(spec));
  manifest.config_json = config.dump();
  manifest.seed = cfg.seed;
  manifest.input_digests.emplace_back(dataset_path, sls::file_digest(dataset_path));
  manifest.input_digests.emplace_back(model_path, sls::file_digest(model_path));
  manifest.write(out_dir);

  double worst_rhat = 0.0;
  std::string worst_param;
  if (draws.n_chains() >= 2 && draws.n_retained() >= 10)
    for (const auto& name : draws.param_names) {
      const double r = sls::mcmc::gelman_rubin(draws, name);
      if (r > worst_rhat) {
        worst_rhat = r;
        worst_param = name;
      }
    }
  std::cout << "fit: wrote " << out_dir << " (max R-hat " << worst_rhat << " on "
            << worst_param << ")\n";
  if (worst_rhat >= 1.1 && !allow_nonconverged) {
    std::cerr << "error: R-hat " << worst_rhat << " on " << worst_param
              << " exceeds 1.1; rerun with more iterations or "
                 "--allow-nonconverged\n";
    return kExitConvergence;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// compare

int cmd_compare(const std::string& dataset_path,
                const std::vector<std::string>& model_paths,
                const ChainOptions& chain_opts, const std::string& out_dir) {
  if (model_paths.size() < 2)
    throw sls::ConfigError("compare needs at least 2 model configs");
  const sls::CleanDataset data = sls::read_dataset_json(dataset_path);
  const sls::mcmc::ChainConfig cfg = chain_opts.to_config();

  struct Row {
    std::string label;
    sls::infer::DicReport report;
  };
  std::vector<Row> rows;
  int failures = 0;
  for (const auto& path : model_paths) {
    const sls::model::ModelSpec spec = sls::model::read_model_spec(path);
    try {
      const auto draws = sls::mcmc::run_chains(data, spec, cfg);
      rows.push_back({spec.label, sls::infer::dic(draws, data, spec)});
    } catch (const std::exception& e) {
      std::cerr << "warning: model `" << spec.label << "` failed: " << e.what()
                << "\n";
      ++failures;
    }
  }
  if (rows.empty()) throw sls::NonFiniteDeviance("all models failed to fit");
  if (rows.size() == 1)
    std::cerr << "warning: only one model survived; comparison is trivial\n";

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.report.dic < b.report.dic;
  });

  fs::create_directories(out_dir);
  std::string csv = "model,dbar,p_d,dic\n";
  for (const auto& row : rows) {
    csv += row.label;
    csv += ',' + sls::format_double(row.report.dbar);
    csv += ',' + sls::format_double(row.report.p_d);
    csv += ',' + sls::format_double(row.report.dic);
    csv += '\n';
  }
  write_file(fs::path(out_dir) / "dic.csv", csv);

  sls::RunManifest manifest;
  manifest.command = "compare";
  json config;
  config["chain"] = json::parse(sls::mcmc::chain_config_to_json(cfg));
  config["models"] = model_paths;
  manifest.config_json = config.dump();
  manifest.seed = cfg.seed;
  manifest.input_digests.emplace_back(dataset_path, sls::file_digest(dataset_path));
  for (const auto& p : model_paths)
    manifest.input_digests.emplace_back(p, sls::file_digest(p));
  manifest.write(out_dir);
  std::cout << "compare: wrote " << out_dir << " (" << rows.size()
            << " models, " << failures << " failures)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& design_path, const ChainOptions& chain_opts,
                 int workers, const std::string& cells_arg,
                 const std::string& out_dir) {
  const sls::sim::SimDesign design =
      sls::sim::design_from_json(read_file(design_path));
  sls::mcmc::ChainConfig cfg = chain_opts.to_config();

  std::vector<std::size_t> filter;
  if (!cells_arg.empty()) {
    std::stringstream ss(cells_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) filter.push_back(std::stoul(tok));
  }

  const auto t0 = std::chrono::steady_clock::now();
  const auto results = sls::sim::run_design(design, cfg, workers, cfg.seed, filter);
  const auto elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out_dir);
  std::string csv =
      "cell,a2_true,error_pct,prior,replicates,relative_bias,coverage_95,"
      "relative_width,n_completed,rhat_failures\n";
  for (const auto& r : results) {
    csv += std::to_string(r.cell.index);
    csv += ',' + sls::format_double(r.cell.a2);
    csv += ',' + sls::format_double(r.cell.error_pct);
    csv += ',' + sls::sim::regime_name(r.cell.regime);
    csv += ',' + std::to_string(r.cell.replicates);
    csv += ',' + sls::format_double(r.relative_bias);
    csv += ',' + sls::format_double(r.coverage_95);
    csv += ',' + sls::format_double(r.relative_width);
    csv += ',' + std::to_string(r.n_completed);
    csv += ',' + std::to_string(r.rhat_failures);
    csv += '\n';
  }
  write_file(fs::path(out_dir) / "cells.csv", csv);

  sls::RunManifest manifest;
  manifest.command = "simulate";
  json config;
  config["chain"] = json::parse(sls::mcmc::chain_config_to_json(cfg));
  config["design"] = json::parse(sls::sim::design_to_json(design));
  config["workers"] = workers;
  config["runtime_s"] = elapsed;
  manifest.config_json = config.dump();
  manifest.seed = cfg.seed;
  manifest.input_digests.emplace_back(design_path, sls::file_digest(design_path));
  manifest.write(out_dir);
  std::cout << "simulate: wrote " << out_dir << " (" << results.size()
            << " cells in " << elapsed << " s)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// ppc

int cmd_ppc(const std::string& dataset_path, const std::string& draws_dir,
            std::uint64_t seed, const std::string& out_dir) {
  const sls::CleanDataset data = sls::read_dataset_json(dataset_path);
  const auto loaded = sls::mcmc::read_draws(draws_dir);
  const sls::model::ModelSpec spec =
      sls::model::model_spec_from_json(loaded.model_json);

  sls::Rng rng(sls::derive_seed(seed, 0x99C));
  const auto ppc = sls::infer::ppc_pvalues(loaded.draws, data, spec, rng);

  fs::create_directories(out_dir);
  auto write_table = [&](const char* name,
                         const std::vector<sls::infer::PpcEntry>& entries) {
    std::string csv = "level,condition,run,pvalue\n";
    for (const auto& e : entries) {
      csv += std::to_string(e.level);
      csv += ',' + data.conditions[e.condition].condition_id;
      csv += ',' + data.conditions[e.condition].runs[e.run].run_id;
      csv += ',' + sls::format_double(e.pvalue);
      csv += '\n';
    }
    write_file(fs::path(out_dir) / name, csv);
  };
  write_table("ppc_rayleigh.csv", ppc.rayleigh);
  write_table("ppc_delta_n.csv", ppc.delta_n);

  sls::RunManifest manifest;
  manifest.command = "ppc";
  json config;
  config["draws_dir"] = draws_dir;
  manifest.config_json = config.dump();
  manifest.seed = seed;
  manifest.input_digests.emplace_back(dataset_path, sls::file_digest(dataset_path));
  manifest.write(out_dir);
  std::cout << "ppc: wrote " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static light scattering cleaning and Bayesian inference"};
  app.set_version_flag("--version", sls::kVersion);
  app.require_subcommand(1);

  // clean
  CleanArgs clean_args;
  auto* clean = app.add_subcommand("clean", "Clean raw traces into a dataset");
  clean->add_option("--ls", clean_args.ls_trace, "LS trace CSV")->required();
  clean->add_option("--ri", clean_args.ri_trace, "RI trace CSV");
  clean
      ->add_option("--design", clean_args.design,
                   "JSON list of nominal concentrations (mg/mL) in injection order")
      ->required();
  clean->add_option("--out", clean_args.out_dir, "Output directory")->required();
  clean->add_option("--tau", clean_args.tau, "Trimming threshold");
  clean->add_flag("--smooth", clean_args.smooth, "Smooth the instability series");
  clean->add_option("--ls-channel", clean_args.ls_channel,
                    "LS channel used for summaries (default 0)");
  clean->add_option("--ri-levels", clean_args.ri_levels,
                    "Include RI only for the first N levels (-1 = all)");
  clean->add_option("--condition-id", clean_args.condition_id, "Condition label");
  clean->add_option("--run-id", clean_args.run_id, "Run label");

  // fit
  std::string fit_dataset, fit_model, fit_out;
  bool allow_nonconverged = false;
  ChainOptions fit_chain;
  auto* fit = app.add_subcommand("fit", "Fit the Bayesian model");
  fit->add_option("--dataset", fit_dataset, "CleanDataset JSON")->required();
  fit->add_option("--model", fit_model, "Model config JSON")->required();
  fit->add_option("--out", fit_out, "Output directory")->required();
  fit->add_flag("--allow-nonconverged", allow_nonconverged,
                "Do not fail on R-hat >= 1.1");
  add_chain_options(fit, fit_chain);

  // compare
  std::string cmp_dataset, cmp_out;
  std::vector<std::string> cmp_models;
  ChainOptions cmp_chain;
  auto* compare = app.add_subcommand("compare", "DIC model comparison");
  compare->add_option("--dataset", cmp_dataset, "CleanDataset JSON")->required();
  compare->add_option("--model", cmp_models, "Model config JSON (repeatable)")
      ->required()
      ->expected(-2);
  compare->add_option("--out", cmp_out, "Output directory")->required();
  add_chain_options(compare, cmp_chain);

  // simulate
  std::string sim_design, sim_out, sim_cells;
  int sim_workers = 1;
  ChainOptions sim_chain;
  sim_chain.iters = 30000;
  sim_chain.burnin = 20000;
  sim_chain.thin = 25;
  sim_chain.chains = 2;
  auto* simulate = app.add_subcommand("simulate", "Factorial simulation study");
  simulate->add_option("--design", sim_design, "Design JSON")->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--workers", sim_workers, "Worker threads");
  simulate->add_option("--cells", sim_cells,
                       "Comma-separated cell indices to run (default all)");
  add_chain_options(simulate, sim_chain);

  // ppc
  std::string ppc_dataset, ppc_draws, ppc_out;
  std::uint64_t ppc_seed = 1;
  auto* ppc = app.add_subcommand("ppc", "Posterior predictive checks");
  ppc->add_option("--dataset", ppc_dataset, "CleanDataset JSON")->required();
  ppc->add_option("--draws", ppc_draws, "Directory written by fit")->required();
  ppc->add_option("--out", ppc_out, "Output directory")->required();
  ppc->add_option("--seed", ppc_seed, "Replication RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (clean->parsed()) return cmd_clean(clean_args);
    if (fit->parsed())
      return cmd_fit(fit_dataset, fit_model, fit_chain, fit_out,
                     allow_nonconverged);
    if (compare->parsed())
      return cmd_compare(cmp_dataset, cmp_models, cmp_chain, cmp_out);
    if (simulate->parsed())
      return cmd_simulate(sim_design, sim_chain, sim_workers, sim_cells, sim_out);
    if (ppc->parsed()) return cmd_ppc(ppc_dataset, ppc_draws, ppc_seed, ppc_out);
  } catch (const sls::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sls::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sls::InitializationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const sls::NonFiniteDeviance& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
