#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drscreen/cea.hpp"
#include "drscreen/inputs.hpp"
#include "drscreen/sensitivity.hpp"

namespace drscreen {

struct RunManifest {
  std::vector<std::string> strategies;   // empty = all configured strategies
  std::vector<Frequency> frequencies;    // empty = all six
  std::vector<AgeGroup> age_groups;      // empty = the five standard groups
  Perspective perspective = Perspective::Societal;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::optional<int> horizon;
  int workers = 1;
};

struct GridRow {
  ScenarioSpec spec;
  std::string id;
  std::optional<ScenarioResult> result;
  std::optional<CeaRecord> cea;
  std::string error;  // non-empty rows failed; they are reported, never dropped
};

// Expands the manifest into its scenario grid (default 9 x 6 x 5 = 270).
std::vector<ScenarioSpec> expand_grid(const ModelInputs& inputs,
                                      const RunManifest& manifest);

// Evaluates every scenario; the CEA comparator is the status-quo strategy at
// the same frequency and age group (evaluated on demand when filtered out of
// the selection). A failing scenario produces an error row.
std::vector<GridRow> run_grid(const ModelInputs& inputs, const RunManifest& manifest);

// Per-output-file provenance: embedded in a leading comment line.
struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
};

std::string csv_number(double v);

void write_grid_csv(const std::string& path, const std::vector<GridRow>& rows,
                    const Provenance& prov);
// One tidy file: a pooled view plus one view per (frequency, age group) cell.
void write_frontier_csv(const std::string& path, const std::vector<GridRow>& rows,
                        bool extended_dominance, const Provenance& prov);
void write_performance_csv(const std::string& path, const ModelInputs& inputs,
                           const Provenance& prov);
// The incremental comparison table for annual screening in ages 20-79:
// status-quo absolutes, one column of increments per other strategy.
void write_incremental_table_csv(const std::string& path,
                                 const std::vector<GridRow>& rows,
                                 const std::string& status_quo, const Provenance& prov);
void write_ceac_csv(const std::string& path, const CeacTable& table,
                    const Provenance& prov);
void write_psa_summary_csv(const std::string& path, const PsaResult& psa,
                           const ModelInputs& inputs, const Provenance& prov);
void write_psa_draws_csv(const std::string& path, const PsaResult& psa,
                         const Provenance& prov);
void write_tornado_csv(const std::string& path, const std::vector<TornadoBar>& bars,
                       const Provenance& prov);
void write_threshold_csv(const std::string& path,
                         const std::vector<SwitchPoint>& switches,
                         const std::string& parameter, const Provenance& prov);
void write_horizon_csv(const std::string& path,
                       const std::vector<HorizonRecord>& records,
                       const Provenance& prov);
void write_horizon_crossings_csv(const std::string& path,
                                 const std::vector<HorizonRecord>& records,
                                 const ModelInputs& inputs, const Provenance& prov);

}  // namespace drscreen
