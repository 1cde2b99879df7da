#include "sls/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sls/errors.hpp"

namespace sls {

using nlohmann::json;

std::size_t CleanDataset::n_included_ls() const {
  std::size_t n = 0;
  for (const auto& c : conditions)
    for (const auto& r : c.runs)
      for (const auto& lv : r.levels) n += lv.ls_included ? 1 : 0;
  return n;
}

std::size_t CleanDataset::n_included_ri() const {
  std::size_t n = 0;
  for (const auto& c : conditions)
    for (const auto& r : c.runs)
      for (const auto& lv : r.levels) n += lv.ri_included ? 1 : 0;
  return n;
}

std::size_t CleanDataset::n_levels_total() const {
  std::size_t n = 0;
  for (const auto& c : conditions)
    for (const auto& r : c.runs) n += r.levels.size();
  return n;
}

void CleanDataset::validate() const {
  for (const auto& cond : conditions) {
    for (const auto& run : cond.runs) {
      std::set<int> seen;
      for (const auto& lv : run.levels) {
        const std::string where = "condition `" + cond.condition_id + "` run `" +
                                  run.run_id + "` level " + std::to_string(lv.level);
        if (!seen.insert(lv.level).second)
          throw ConfigError(where + ": duplicate level index");
        if ((lv.ls_included || lv.ri_included) && !(lv.c_meas > 0.0))
          throw ConfigError(where + ": included level requires c_meas > 0");
        if (lv.ls_included && !std::isfinite(lv.rayleigh))
          throw ConfigError(where + ": included LS requires finite rayleigh");
        if (lv.ri_included) {
          if (!lv.delta_n.has_value())
            throw ConfigError(where + ": included RI requires delta_n");
          if (!(*lv.delta_n > 0.0))
            throw ConfigError(where + ": included RI requires delta_n > 0");
        }
      }
    }
  }
}

std::string dataset_to_json(const CleanDataset& ds) {
  json j;
  j["schema_version"] = 1;
  j["conditions"] = json::array();
  for (const auto& cond : ds.conditions) {
    json jc;
    jc["condition_id"] = cond.condition_id;
    jc["runs"] = json::array();
    for (const auto& run : cond.runs) {
      json jr;
      jr["run_id"] = run.run_id;
      jr["levels"] = json::array();
      for (const auto& lv : run.levels) {
        json jl;
        jl["level"] = lv.level;
        jl["c_meas"] = lv.c_meas;
        jl["rayleigh"] = lv.rayleigh;
        if (lv.delta_n.has_value())
          jl["delta_n"] = *lv.delta_n;
        else
          jl["delta_n"] = nullptr;
        jl["ls_included"] = lv.ls_included;
        jl["ri_included"] = lv.ri_included;
        jr["levels"].push_back(std::move(jl));
      }
      jc["runs"].push_back(std::move(jr));
    }
    j["conditions"].push_back(std::move(jc));
  }
  return j.dump(2) + "\n";
}

CleanDataset dataset_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset JSON: ") + e.what());
  }
  CleanDataset ds;
  try {
    for (const auto& jc : j.at("conditions")) {
      ConditionData cond;
      cond.condition_id = jc.at("condition_id").get<std::string>();
      for (const auto& jr : jc.at("runs")) {
        RunData run;
        run.run_id = jr.at("run_id").get<std::string>();
        for (const auto& jl : jr.at("levels")) {
          LevelObs lv;
          lv.level = jl.at("level").get<int>();
          lv.c_meas = jl.at("c_meas").get<double>();
          lv.rayleigh = jl.at("rayleigh").get<double>();
          if (jl.contains("delta_n") && !jl.at("delta_n").is_null())
            lv.delta_n = jl.at("delta_n").get<double>();
          lv.ls_included = jl.at("ls_included").get<bool>();
          lv.ri_included = jl.at("ri_included").get<bool>();
          run.levels.push_back(lv);
        }
        cond.runs.push_back(std::move(run));
      }
      ds.conditions.push_back(std::move(cond));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset JSON: ") + e.what());
  }
  ds.validate();
  return ds;
}

void write_dataset_json(const CleanDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << dataset_to_json(ds);
}

CleanDataset read_dataset_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return dataset_from_json(buf.str());
}

}  // namespace sls
