#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sls {

// One summarized measurement: nominal level index, measured concentration
// (g/mL), baseline-corrected Rayleigh ratio (1/cm) and refractive index
// difference (dimensionless, absent when the RI detector gave no usable
// reading), plus per-signal inclusion flags.
struct LevelObs {
  int level = 0;
  double c_meas = 0.0;
  double rayleigh = 0.0;
  std::optional<double> delta_n;
  bool ls_included = true;
  bool ri_included = false;
};

struct RunData {
  std::string run_id;
  std::vector<LevelObs> levels;
};

struct ConditionData {
  std::string condition_id;
  std::vector<RunData> runs;
};

struct CleanDataset {
  std::vector<ConditionData> conditions;

  std::size_t n_conditions() const { return conditions.size(); }
  std::size_t n_included_ls() const;
  std::size_t n_included_ri() const;
  std::size_t n_levels_total() const;

  // Enforces: positive measured concentration and finite Rayleigh value on
  // included levels, positive delta_n where the RI flag is set (the
  // truncated-normal support), and unique level indices within a run.
  void validate() const;
};

std::string dataset_to_json(const CleanDataset& ds);
CleanDataset dataset_from_json(const std::string& text);
void write_dataset_json(const CleanDataset& ds, const std::string& path);
CleanDataset read_dataset_json(const std::string& path);

}  // namespace sls
