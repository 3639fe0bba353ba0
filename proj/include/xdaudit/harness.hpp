#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xdaudit/adult.hpp"
#include "xdaudit/blackbox.hpp"
#include "xdaudit/dgp.hpp"
#include "xdaudit/lime.hpp"
#include "xdaudit/metrics.hpp"

namespace xdaudit::harness {

enum class ModelVariant {
  LR_A,
  LR_NotA,
  MLP_A,
  MLP_NotA,
  LR_C,
  LR_NotC,
  MLP_C,
  MLP_NotC,
};

std::string variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& name);
bool variant_is_mlp(ModelVariant v);

// Feature list a variant sees: NotA drops the sensitive column (A / sex),
// NotC drops the omitted covariate (C / the nationality block).
std::vector<std::string> variant_features(ModelVariant v,
                                          const std::vector<Column>& columns);

struct ExperimentPlan {
  std::string run_tag;          // prefix for run ids, e.g. "obj2"
  dgp::Objective objective = dgp::Objective::SampleSize;
  std::string sweep_param;      // "proportion", "overlap", "beta", "alpha", "hours", "none"
  std::vector<double> sweep_values;
  std::vector<ModelVariant> variants;
  int trials = 5;
  std::uint64_t base_seed = 0;
  std::size_t n = 20000;
  double train_fraction = 0.7;
  std::size_t max_explained_per_group = 500;  // 0 = explain every test row
  blackbox::TrainConfig train_cfg;
  lime::ExplainerConfig lime_cfg;
  std::vector<metrics::QKind> q_kinds = {metrics::QKind::Accuracy};
  unsigned n_threads = 1;
  std::string dump_dir;  // when set, per-cell explanation CSVs land here

  // Adult mode: the pipeline runs on this encoded dataset instead of a
  // synthetic population, applying `adult_scenario` to the training split.
  bool is_adult = false;
  std::optional<adult::Scenario> adult_scenario;

  void validate() const;
};

struct ResultRow {
  std::string run_id;
  std::string objective;
  std::string model_variant;
  std::string sweep_param;
  double sweep_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string q_kind;
  std::string metric;  // max_gap, mean_gap, group_Q, overall_Q, bb_acc_gap
  std::string group_or_all;
  double value = 0.0;
};

struct CellFailure {
  std::string run_id;
  std::string message;
};

struct RunResult {
  std::vector<ResultRow> rows;
  std::vector<CellFailure> failures;
};

// Executes every (sweep value x variant x trial) cell: generate/restrict
// data, split 70/30, train, explain both groups of the test split, compute
// the fidelity gaps and the black-box group-accuracy gap. Cells may run
// concurrently; rows are emitted in deterministic cell order either way.
// A failing cell is recorded and the plan continues.
RunResult run_plan(const ExperimentPlan& plan,
                   const adult::EncodedDataset* adult_data = nullptr);

// Default plan for one synthetic objective: its sweep grid, variants,
// five seeded trials, n = 20000.
ExperimentPlan objective_defaults(dgp::Objective objective, std::uint64_t base_seed = 0);

// Default Adult plan; scenario is one of "proportion", "hours",
// "concept", "omitted". `female_sweep` switches the proportion scenario to
// the 10%..100% female sweep instead of the disadvantaged-male 5%..50% one.
ExperimentPlan adult_plan(const std::string& scenario, std::uint64_t base_seed = 0,
                          bool female_sweep = false);

struct SummaryRow {
  std::string objective;
  std::string model_variant;
  std::string sweep_param;
  double sweep_value = 0.0;
  std::string q_kind;
  std::string metric;
  std::string group_or_all;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_trials = 0;
};

// Per (objective, variant, sweep value, metric): mean over trials plus the
// Student-t confidence interval.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows,
                                  double ci_level = 0.95);

// One SVG line chart per (objective, q_kind, gap metric); y values are
// percent (raw metric x 100). Returns the files written; an empty summary
// writes nothing and prints a notice.
std::vector<std::string> render_plots(const std::vector<SummaryRow>& summary,
                                      const std::string& out_dir);

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::string& path);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

// key=value text file; overrides plan fields after flags are parsed.
void apply_config_overrides(ExperimentPlan& plan, const std::string& path);

}  // namespace xdaudit::harness
