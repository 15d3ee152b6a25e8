#include "drscreen/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

namespace drscreen {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical on every platform
  if (!out) throw DomainError("cannot open output file '" + path + "'");
  return out;
}

void write_provenance(std::ofstream& out, const Provenance& prov) {
  out << "# seed=" << prov.seed << " config_hash=" << prov.config_hash << "\n";
}

std::string quantile_sorted(std::vector<double>& sorted, double q);

}  // namespace

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<ScenarioSpec> expand_grid(const ModelInputs& inputs,
                                      const RunManifest& manifest) {
  const auto& strategies =
      manifest.strategies.empty() ? inputs.strategies : manifest.strategies;
  const auto& frequencies =
      manifest.frequencies.empty() ? standard_frequencies() : manifest.frequencies;
  const auto& groups =
      manifest.age_groups.empty() ? standard_age_groups() : manifest.age_groups;

  std::vector<ScenarioSpec> grid;
  grid.reserve(strategies.size() * frequencies.size() * groups.size());
  for (const auto& strategy : strategies)
    for (Frequency f : frequencies)
      for (const AgeGroup& g : groups) {
        ScenarioSpec spec;
        spec.strategy = strategy;
        spec.frequency = f;
        spec.age_group = g;
        spec.cohort_size = inputs.cohort_size;
        spec.perspective = manifest.perspective;
        spec.horizon_years = manifest.horizon;
        grid.push_back(std::move(spec));
      }
  return grid;
}

std::vector<GridRow> run_grid(const ModelInputs& inputs, const RunManifest& manifest) {
  const std::vector<ScenarioSpec> grid = expand_grid(inputs, manifest);
  std::vector<GridRow> rows(grid.size());

  auto eval_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      GridRow& row = rows[i];
      row.spec = grid[i];
      row.id = grid[i].id();
      try {
        row.result = evaluate_scenario(inputs, grid[i]);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };

  const int workers = std::max(1, manifest.workers);
  if (workers == 1 || grid.size() < 8) {
    eval_range(0, grid.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (grid.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      std::size_t begin = static_cast<std::size_t>(w) * chunk;
      std::size_t end = std::min(grid.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(eval_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  // comparators: the status-quo strategy per (frequency, age group) cell,
  // evaluated on demand when not part of the selection
  std::map<std::string, ScenarioResult> comparators;
  for (const auto& row : rows) {
    if (row.spec.strategy == inputs.status_quo && row.result)
      comparators.emplace(std::string(to_string(row.spec.frequency)) + "|" + to_string(row.spec.age_group),
                          *row.result);
  }
  for (auto& row : rows) {
    if (!row.result) continue;
    const std::string key =
        std::string(to_string(row.spec.frequency)) + "|" + to_string(row.spec.age_group);
    auto it = comparators.find(key);
    if (it == comparators.end()) {
      ScenarioSpec comp = row.spec;
      comp.strategy = inputs.status_quo;
      try {
        it = comparators.emplace(key, evaluate_scenario(inputs, comp)).first;
      } catch (const std::exception& e) {
        row.error = std::string("comparator failed: ") + e.what();
        continue;
      }
    }
    row.cea = make_cea_record(*row.result, it->second, inputs.wtp);
  }
  return rows;
}

void write_grid_csv(const std::string& path, const std::vector<GridRow>& rows,
                    const Provenance& prov) {
  auto out = open_out(path);
  write_provenance(out, prov);
  out << "scenario_id,strategy,frequency,age_group,perspective,status,"
         "total_cost,screening_cost,referral_cost,treatment_cost,blindness_cost,"
         "qalys,blindfree_years,blindness_cases,detected_vtdr_cases,treated_vtdr_cases,"
         "comparator_id,delta_cost,delta_qalys,delta_blindfree_years,"
         "icer,cost_per_blindness_year_averted,nmb_wtp1x,nmb_wtp3x,ce_class,error\n";
  for (const auto& row : rows) {
    out << row.id << ',' << row.spec.strategy << ',' << to_string(row.spec.frequency)
        << ',' << to_string(row.spec.age_group) << ','
        << to_string(row.spec.perspective) << ',';
    if (!row.error.empty()) {
      // status + 19 empty data fields, message in the trailing error column
      out << "error" << ",,,,,,,,,,,,,,,,,,,," << '"' << row.error << '"' << "\n";
      continue;
    }
    const ScenarioResult& r = *row.result;
    out << "ok," << csv_number(r.total_cost) << ',' << csv_number(r.screening_cost)
        << ',' << csv_number(r.referral_cost) << ',' << csv_number(r.treatment_cost)
        << ',' << csv_number(r.blindness_cost) << ',' << csv_number(r.qalys) << ','
        << csv_number(r.blindfree_years) << ',' << csv_number(r.blindness_cases) << ','
        << csv_number(r.detected_cases) << ',' << csv_number(r.treated_cases) << ',';
    if (row.cea) {
      const CeaRecord& c = *row.cea;
      out << c.comparator_id << ',' << csv_number(c.delta_cost) << ','
          << csv_number(c.delta_qalys) << ',' << csv_number(c.delta_blindfree_years)
          << ',' << to_string(c.icer) << ',' << to_string(c.cost_per_blindness_year)
          << ',' << csv_number(c.nmb_1x) << ',' << csv_number(c.nmb_3x) << ','
          << to_string(c.ce_class) << ',';
    } else {
      out << ",,,,,,,,,";
    }
    out << "\n";
  }
}

void write_frontier_csv(const std::string& path, const std::vector<GridRow>& rows,
                        bool extended_dominance, const Provenance& prov) {
  auto out = open_out(path);
  write_provenance(out, prov);
  out << "view,scenario_id,cost,qalys,dominance,icer_from_prev\n";

  auto emit_view = [&](const std::string& view, const std::vector<const GridRow*>& members) {
    std::vector<FrontierPoint> points;
    for (const GridRow* row : members)
      points.push_back({row->id, row->result->total_cost, row->result->qalys});
    FrontierResult fr = frontier(points, extended_dominance);
    std::map<std::string, const FrontierMember*> on_frontier;
    for (const auto& m : fr.frontier) on_frontier[m.id] = &m;
    for (const auto& [id, label] : fr.labels) {
      const GridRow* row = nullptr;
      for (const GridRow* r : members)
        if (r->id == id) {
          row = r;
          break;
        }
      out << view << ',' << id << ',' << csv_number(row->result->total_cost) << ','
          << csv_number(row->result->qalys) << ',' << to_string(label) << ',';
      auto it = on_frontier.find(id);
      if (it != on_frontier.end() && it->second->icer_from_prev)
        out << csv_number(*it->second->icer_from_prev);
      out << "\n";
    }
  };

  std::vector<const GridRow*> pooled;
  std::map<std::string, std::vector<const GridRow*>> cells;
  for (const auto& row : rows) {
    if (!row.result) continue;
    pooled.push_back(&row);
    cells[std::string(to_string(row.spec.frequency)) + "|" + to_string(row.spec.age_group)]
        .push_back(&row);
  }
  emit_view("pooled", pooled);
  for (const auto& [cell, members] : cells) emit_view(cell, members);
}

void write_performance_csv(const std::string& path, const ModelInputs& inputs,
                           const Provenance& prov) {
  auto out = open_out(path);
  write_provenance(out, prov);
  out << "strategy,sensitivity,specificity,accuracy,expected_cost_per_case,"
         "human_reads_per_case,ai_reads_per_case\n";
  for (const auto& expr : inputs.strategies) {
    StrategyTree tree = inputs.parse(expr);
    DiagnosticPerformance perf = closed_form_performance(
        tree, inputs.graders, inputs.params.screening_prevalence);
    out << expr << ',' << csv_number(perf.sensitivity) << ','
        << csv_number(perf.specificity) << ','
        << csv_number(accuracy(perf, inputs.params.screening_prevalence)) << ','
        << csv_number(perf.expected_cost_per_case) << ','
        << csv_number(perf.human_reads_per_case) << ','
        << csv_number(perf.ai_reads_per_case) << "\n";
  }
}

void write_incremental_table_csv(const std::string& path,
                                 const std::vector<GridRow>& rows,
                                 const std::string& status_quo, const Provenance& prov) {
  // the reference cell: annual screening in ages 20-79
  std::vector<const GridRow*> cell;
  const GridRow* sq = nullptr;
  for (const auto& row : rows) {
    if (row.spec.frequency != Frequency::Annual || row.spec.age_group.min_age != 20 ||
        row.spec.age_group.max_age != 79 || !row.result)
      continue;
    if (row.spec.strategy == status_quo)
      sq = &row;
    else
      cell.push_back(&row);
  }
  auto out = open_out(path);
  write_provenance(out, prov);
  if (sq == nullptr) {
    out << "row,status_quo\n";
    return;
  }

  out << "row,status_quo";
  for (const GridRow* row : cell) out << ',' << row->spec.strategy;
  out << "\n";

  auto emit = [&](const std::string& label, auto value_sq, auto value_incr) {
    out << label << ',' << value_sq();
    for (const GridRow* row : cell) out << ',' << value_incr(*row);
    out << "\n";
  };
  const ScenarioResult& s = *sq->result;
  emit("blindness_cases", [&] { return csv_number(s.blindness_cases); },
       [&](const GridRow& r) {
         return csv_number(r.result->blindness_cases - s.blindness_cases);
       });
  emit("detected_vtdr_cases", [&] { return csv_number(s.detected_cases); },
       [&](const GridRow& r) {
         return csv_number(r.result->detected_cases - s.detected_cases);
       });
  emit("treated_vtdr_cases", [&] { return csv_number(s.treated_cases); },
       [&](const GridRow& r) {
         return csv_number(r.result->treated_cases - s.treated_cases);
       });
  emit("screening_cost", [&] { return csv_number(s.screening_cost); },
       [&](const GridRow& r) {
         return csv_number(r.result->screening_cost - s.screening_cost);
       });
  emit("referral_cost", [&] { return csv_number(s.referral_cost); },
       [&](const GridRow& r) {
         return csv_number(r.result->referral_cost - s.referral_cost);
       });
  emit("treatment_cost", [&] { return csv_number(s.treatment_cost); },
       [&](const GridRow& r) {
         return csv_number(r.result->treatment_cost - s.treatment_cost);
       });
  emit("blindness_cost", [&] { return csv_number(s.blindness_cost); },
       [&](const GridRow& r) {
         return csv_number(r.result->blindness_cost - s.blindness_cost);
       });
  emit("total_cost", [&] { return csv_number(s.total_cost); },
       [&](const GridRow& r) { return csv_number(r.result->total_cost - s.total_cost); });
  emit("qalys", [&] { return csv_number(s.qalys); },
       [&](const GridRow& r) { return csv_number(r.result->qalys - s.qalys); });
  emit("years_without_blindness", [&] { return csv_number(s.blindfree_years); },
       [&](const GridRow& r) {
         return csv_number(r.result->blindfree_years - s.blindfree_years);
       });
  emit("icer", [&] { return std::string("-"); },
       [&](const GridRow& r) { return r.cea ? to_string(r.cea->icer) : std::string(); });
  emit("cost_per_blindness_year_averted", [&] { return std::string("-"); },
       [&](const GridRow& r) {
         return r.cea ? to_string(r.cea->cost_per_blindness_year) : std::string();
       });
  emit("nmb_wtp3x", [&] { return std::string("-"); },
       [&](const GridRow& r) {
         return r.cea ? csv_number(r.cea->nmb_3x) : std::string();
       });
}

void write_ceac_csv(const std::string& path, const CeacTable& table,
                    const Provenance& prov) {
  auto out = open_out(path);
  write_provenance(out, prov);
  out << "wtp,strategy,probability\n";
  for (std::size_t w = 0; w < table.wtp_grid.size(); ++w)
    for (std::size_t s = 0; s < table.strategies.size(); ++s)
      out << csv_number(table.wtp_grid[w]) << ',' << table.strategies[s] << ','
          << csv_number(table.probability[w][s]) << "\n";
}

namespace {

std::string quantile_sorted(std::vector<double>& sorted, double q) {
  // linear interpolation between order statistics
  if (sorted.empty()) return "";
  const double h = q * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return csv_number(sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
}

}  // namespace

void write_psa_summary_csv(const std::string& path, const PsaResult& psa,
                           const ModelInputs& inputs, const Provenance& prov) {
  auto out = open_out(path);
  write_provenance(out, prov);
  out << "scenario_id,n_draws,mean_cost,cost_lo95,cost_hi95,mean_qalys,"
         "qalys_lo95,qalys_hi95\n";
  (void)inputs;
  for (std::size_t s = 0; s < psa.scenario_ids.size(); ++s) {
    std::vector<double> cost, qalys;
    cost.reserve(psa.draws.size());
    qalys.reserve(psa.draws.size());
    double cost_sum = 0.0, qalys_sum = 0.0;
    for (const auto& d : psa.draws) {
      cost.push_back(d.cost[s]);
      qalys.push_back(d.qalys[s]);
      cost_sum += d.cost[s];
      qalys_sum += d.qalys[s];
    }
    std::sort(cost.begin(), cost.end());
    std::sort(qalys.begin(), qalys.end());
    out << psa.scenario_ids[s] << ',' << psa.n_draws << ','
        << csv_number(cost_sum / static_cast<double>(psa.draws.size())) << ','
        << quantile_sorted(cost, 0.025) << ',' << quantile_sorted(cost, 0.975) << ','
        << csv_number(qalys_sum / static_cast<double>(psa.draws.size())) << ','
        << quantile_sorted(qalys, 0.025) << ',' << quantile_sorted(qalys, 0.975)
        << "\n";
  }
}

void write_psa_draws_csv(const std::string& path, const PsaResult& psa,
                         const Provenance& prov) {
  auto out = open_out(path);
  write_provenance(out, prov);
  out << "draw,scenario_id,cost,qalys\n";
  for (std::size_t d = 0; d < psa.draws.size(); ++d)
    for (std::size_t s = 0; s < psa.scenario_ids.size(); ++s)
      out << d << ',' << psa.scenario_ids[s] << ',' << csv_number(psa.draws[d].cost[s])
          << ',' << csv_number(psa.draws[d].qalys[s]) << "\n";
}

void write_tornado_csv(const std::string& path, const std::vector<TornadoBar>& bars,
                       const Provenance& prov) {
  auto out = open_out(path);
  write_provenance(out, prov);
  out << "rank,parameter,low,high,icer_low,icer_high,width,nmb_low,nmb_high,error\n";
  int rank = 0;
  for (const auto& bar : bars) {
    out << ++rank << ',' << bar.path << ',' << csv_number(bar.low_input) << ','
        << csv_number(bar.high_input) << ',';
    if (bar.error.empty()) {
      out << to_string(bar.icer_low) << ',' << to_string(bar.icer_high) << ','
          << csv_number(bar.width) << ',' << csv_number(bar.nmb_low) << ','
          << csv_number(bar.nmb_high) << ',';
    } else {
      out << ",,,,," << '"' << bar.error << '"';
    }
    out << "\n";
  }
}

void write_threshold_csv(const std::string& path,
                         const std::vector<SwitchPoint>& switches,
                         const std::string& parameter, const Provenance& prov) {
  auto out = open_out(path);
  write_provenance(out, prov);
  out << "parameter,switch_value,optimal_below,optimal_above\n";
  for (const auto& sw : switches)
    out << parameter << ',' << csv_number(sw.parameter_value) << ',' << sw.from_id
        << ',' << sw.to_id << "\n";
}

void write_horizon_csv(const std::string& path,
                       const std::vector<HorizonRecord>& records,
                       const Provenance& prov) {
  auto out = open_out(path);
  write_provenance(out, prov);
  out << "horizon_years,scenario_id,comparator_id,delta_cost,delta_qalys,"
         "delta_blindfree_years,icer,nmb_wtp1x,nmb_wtp3x,ce_class\n";
  for (const auto& rec : records) {
    const CeaRecord& c = rec.cea;
    out << rec.horizon_years << ',' << c.scenario_id << ',' << c.comparator_id << ','
        << csv_number(c.delta_cost) << ',' << csv_number(c.delta_qalys) << ','
        << csv_number(c.delta_blindfree_years) << ',' << to_string(c.icer) << ','
        << csv_number(c.nmb_1x) << ',' << csv_number(c.nmb_3x) << ','
        << to_string(c.ce_class) << "\n";
  }
}

void write_horizon_crossings_csv(const std::string& path,
                                 const std::vector<HorizonRecord>& records,
                                 const ModelInputs& inputs, const Provenance& prov) {
  auto out = open_out(path);
  write_provenance(out, prov);
  out << "scenario_id,first_horizon_within_3x_gdp,first_horizon_within_1x_gdp\n";
  std::vector<std::string> ids;
  for (const auto& rec : records)
    if (std::find(ids.begin(), ids.end(), rec.cea.scenario_id) == ids.end())
      ids.push_back(rec.cea.scenario_id);
  for (const auto& id : ids) {
    auto h3 = first_horizon_within(records, id, inputs.wtp.wtp_3x());
    auto h1 = first_horizon_within(records, id, inputs.wtp.wtp_1x());
    out << id << ',';
    if (h3) out << *h3;
    out << ',';
    if (h1) out << *h1;
    out << "\n";
  }
}

}  // namespace drscreen
