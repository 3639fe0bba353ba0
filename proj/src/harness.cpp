#include "xdaudit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "xdaudit/errors.hpp"
#include "xdaudit/rng.hpp"
#include "xdaudit/svg.hpp"

namespace xdaudit::harness {

namespace {

const char* kVariantNames[] = {"LR_A",  "LR_noA",  "MLP_A",  "MLP_noA",
                               "LR_C",  "LR_noC",  "MLP_C",  "MLP_noC"};

std::uint64_t derive(std::uint64_t trial_seed, const std::string& tag) {
  return hash_combine(trial_seed, Rng::hash_str(tag));
}

bool variant_drops_a(ModelVariant v) {
  return v == ModelVariant::LR_NotA || v == ModelVariant::MLP_NotA;
}

bool variant_drops_c(ModelVariant v) {
  return v == ModelVariant::LR_NotC || v == ModelVariant::MLP_NotC;
}

}  // namespace

std::string variant_name(ModelVariant v) {
  return kVariantNames[static_cast<int>(v)];
}

ModelVariant variant_from_name(const std::string& name) {
  for (int i = 0; i < 8; ++i)
    if (name == kVariantNames[i]) return static_cast<ModelVariant>(i);
  throw ConfigError("unknown model variant '" + name + "'");
}

bool variant_is_mlp(ModelVariant v) {
  return v == ModelVariant::MLP_A || v == ModelVariant::MLP_NotA ||
         v == ModelVariant::MLP_C || v == ModelVariant::MLP_NotC;
}

std::vector<std::string> variant_features(ModelVariant v,
                                          const std::vector<Column>& columns) {
  std::vector<std::string> names;
  for (const auto& col : columns) {
    if (variant_drops_a(v) && (col.name == "A" || col.name == "sex")) continue;
    if (variant_drops_c(v) &&
        (col.name == "C" || col.name.rfind("nationality=", 0) == 0))
      continue;
    names.push_back(col.name);
  }
  if (names.empty()) throw ConfigError("variant excludes every feature");
  return names;
}

void ExperimentPlan::validate() const {
  if (sweep_values.empty()) throw ConfigError("sweep grid must be nonempty");
  if (variants.empty()) throw ConfigError("variants must be nonempty");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (!is_adult && n < 10) throw ConfigError("n must be at least 10");
  train_cfg.validate();
  lime_cfg.validate();
}

namespace {

struct Cell {
  std::size_t sweep_idx;
  std::size_t variant_idx;
  int trial;
  std::string run_id;
};

std::string make_run_id(const ExperimentPlan& plan, double sweep_value,
                        ModelVariant variant, int trial) {
  std::string id = plan.run_tag.empty() ? "run" : plan.run_tag;
  if (plan.sweep_param != "none")
    id += "-" + plan.sweep_param + format_double(sweep_value);
  id += "-" + variant_name(variant) + "-t" + std::to_string(trial);
  return id;
}

// Builds the train/test pair for one cell. The test split is always drawn
// from the unrestricted population; interventions apply to the train half.
std::pair<TabularDataset, TabularDataset> cell_data(
    const ExperimentPlan& plan, const adult::EncodedDataset* adult_data,
    double sweep_value, std::uint64_t trial_seed) {
  if (plan.is_adult) {
    if (!adult_data) throw ConfigError("adult plan needs an encoded dataset");
    auto [train, test] = dgp::split_train_test(
        adult_data->data, plan.train_fraction, derive(trial_seed, "split"));
    if (plan.adult_scenario) {
      adult::Scenario s = *plan.adult_scenario;
      if (s.kind == adult::Scenario::Kind::Proportion) s.proportion = sweep_value;
      if (s.kind == adult::Scenario::Kind::HoursCap) s.hours_cap = sweep_value;
      train = adult::build_scenario(*adult_data, train, s,
                                    derive(trial_seed, "scenario"));
    }
    return {std::move(train), std::move(test)};
  }

  dgp::DataGenSpec spec =
      dgp::DataGenSpec::defaults(plan.objective, derive(trial_seed, "dgp"));
  spec.n = plan.n;
  if (plan.objective == dgp::Objective::ConceptShift) spec.beta = sweep_value;
  if (plan.objective == dgp::Objective::OmittedVariable) spec.alpha = sweep_value;

  const TabularDataset population = dgp::sample_population(spec);
  auto [train, test] = dgp::split_train_test(population, plan.train_fraction,
                                             derive(trial_seed, "split"));
  if (plan.objective == dgp::Objective::SampleSize)
    train = dgp::apply_proportion_filter(train, sweep_value,
                                         derive(trial_seed, "filter"));
  else if (plan.objective == dgp::Objective::CovariateShift)
    train = dgp::apply_covariate_shift(train, sweep_value).first;
  return {std::move(train), std::move(test)};
}

std::vector<ResultRow> run_cell(const ExperimentPlan& plan,
                                const adult::EncodedDataset* adult_data,
                                const Cell& cell) {
  const double sweep_value = plan.sweep_values[cell.sweep_idx];
  const ModelVariant variant = plan.variants[cell.variant_idx];
  const std::uint64_t trial_seed =
      plan.base_seed + static_cast<std::uint64_t>(cell.trial);

  auto [train, test] = cell_data(plan, adult_data, sweep_value, trial_seed);

  blackbox::ModelSpec mspec;
  mspec.kind = variant_is_mlp(variant) ? blackbox::ModelKind::MLP
                                       : blackbox::ModelKind::LR;
  mspec.feature_names = variant_features(variant, train.columns());
  mspec.seed = derive(trial_seed, "model:" + variant_name(variant));
  const blackbox::TrainedModel model = blackbox::train(mspec, train, plan.train_cfg);

  // Uniform per-group subsample of test instances to explain.
  std::vector<std::size_t> ids;
  std::vector<int> groups;
  for (int g : {0, 1}) {
    auto rows = test.rows_in_group(g);
    if (plan.max_explained_per_group > 0 &&
        rows.size() > plan.max_explained_per_group) {
      Rng rng(derive(trial_seed, "explain_sample" + std::to_string(g)));
      std::vector<std::size_t> chosen;
      for (std::size_t i : rng.sample_without_replacement(
               rows.size(), plan.max_explained_per_group))
        chosen.push_back(rows[i]);
      rows = std::move(chosen);
    }
    for (std::size_t r : rows) {
      ids.push_back(r);
      groups.push_back(g);
    }
  }

  lime::ExplainerConfig lcfg = plan.lime_cfg;
  lcfg.seed = derive(trial_seed, "lime");
  const lime::FeatureScaler scaler =
      lime::FeatureScaler::fit(train, mspec.feature_names);
  const auto expls = lime::explain_batch(model, test, ids, lcfg, scaler);

  if (!plan.dump_dir.empty()) {
    std::filesystem::create_directories(plan.dump_dir);
    lime::write_explanations_csv(plan.dump_dir + "/" + cell.run_id + ".csv",
                                 expls, groups);
  }

  std::vector<ResultRow> rows;
  auto emit = [&](const std::string& q_kind, const std::string& metric,
                  const std::string& group_or_all, double value) {
    ResultRow row;
    row.run_id = cell.run_id;
    row.objective = plan.run_tag;
    row.model_variant = variant_name(variant);
    row.sweep_param = plan.sweep_param;
    row.sweep_value = sweep_value;
    row.trial = cell.trial;
    row.seed = trial_seed;
    row.q_kind = q_kind;
    row.metric = metric;
    row.group_or_all = group_or_all;
    row.value = value;
    rows.push_back(std::move(row));
  };

  for (metrics::QKind q : plan.q_kinds) {
    const auto records = metrics::fidelity_from_explanations(expls, groups, q);
    const auto report = metrics::fidelity_report(records);
    emit(metrics::q_kind_name(q), "max_gap", "all", report.max_gap);
    emit(metrics::q_kind_name(q), "mean_gap", "all", report.mean_gap);
    emit(metrics::q_kind_name(q), "overall_Q", "all", report.overall_q);
    for (std::size_t g = 0; g < report.per_group_q.size(); ++g)
      emit(metrics::q_kind_name(q), "group_Q", std::to_string(g),
           report.per_group_q[g]);
  }
  const double acc1 = blackbox::group_accuracy(model, test, 1);
  const double acc0 = blackbox::group_accuracy(model, test, 0);
  emit("accuracy", "bb_acc_gap", "all", acc1 - acc0);
  return rows;
}

}  // namespace

RunResult run_plan(const ExperimentPlan& plan, const adult::EncodedDataset* adult_data) {
  plan.validate();

  std::vector<Cell> cells;
  for (std::size_t s = 0; s < plan.sweep_values.size(); ++s)
    for (std::size_t v = 0; v < plan.variants.size(); ++v)
      for (int t = 0; t < plan.trials; ++t)
        cells.push_back({s, v, t,
                         make_run_id(plan, plan.sweep_values[s], plan.variants[v], t)});

  std::vector<std::vector<ResultRow>> cell_rows(cells.size());
  std::vector<std::string> cell_errors(cells.size());

  auto work = [&](std::size_t idx) {
    try {
      cell_rows[idx] = run_cell(plan, adult_data, cells[idx]);
    } catch (const std::exception& e) {
      cell_errors[idx] = e.what();
    }
  };

  const unsigned workers = std::max(1u, plan.n_threads);
  if (workers == 1 || cells.size() < 2) {
    for (std::size_t i = 0; i < cells.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(workers, cells.size()); ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size();
             i = next.fetch_add(1))
          work(i);
      });
    for (auto& th : pool) th.join();
  }

  RunResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cell_errors[i].empty())
      result.failures.push_back({cells[i].run_id, cell_errors[i]});
    else
      for (auto& row : cell_rows[i]) result.rows.push_back(std::move(row));
  }
  return result;
}

ExperimentPlan objective_defaults(dgp::Objective objective, std::uint64_t base_seed) {
  ExperimentPlan plan;
  plan.objective = objective;
  plan.base_seed = base_seed;
  plan.variants = {ModelVariant::LR_A, ModelVariant::LR_NotA, ModelVariant::MLP_A,
                   ModelVariant::MLP_NotA};
  switch (objective) {
    case dgp::Objective::SampleSize:
      plan.run_tag = "obj1";
      plan.sweep_param = "proportion";
      for (int i = 1; i <= 10; ++i) plan.sweep_values.push_back(5.0 * i / 100.0);
      break;
    case dgp::Objective::CovariateShift:
      plan.run_tag = "obj2";
      plan.sweep_param = "overlap";
      plan.sweep_values = {0.2, 0.4, 0.6, 0.8, 1.0};
      break;
    case dgp::Objective::ConceptShift:
      plan.run_tag = "obj3";
      plan.sweep_param = "beta";
      plan.sweep_values = {1.5, 0.5, -0.5};
      break;
    case dgp::Objective::OmittedVariable:
      plan.run_tag = "obj4";
      plan.sweep_param = "alpha";
      plan.sweep_values = {0.0, 0.5, 1.0, 1.5};
      plan.variants = {ModelVariant::LR_C, ModelVariant::LR_NotC,
                       ModelVariant::MLP_C, ModelVariant::MLP_NotC};
      break;
  }
  return plan;
}

ExperimentPlan adult_plan(const std::string& scenario, std::uint64_t base_seed,
                          bool female_sweep) {
  ExperimentPlan plan;
  plan.is_adult = true;
  plan.base_seed = base_seed;
  plan.variants = {ModelVariant::LR_A, ModelVariant::LR_NotA, ModelVariant::MLP_A,
                   ModelVariant::MLP_NotA};
  if (scenario == "proportion") {
    plan.run_tag = "adult_proportion";
    plan.objective = dgp::Objective::SampleSize;
    plan.sweep_param = "proportion";
    adult::Scenario s;
    s.kind = adult::Scenario::Kind::Proportion;
    if (female_sweep) {
      // The literal objective-1 sweep: female (advantaged) share 10%..90%.
      // 100% would leave no male rows and the group metrics undefined.
      s.proportion_group = 1;
      plan.sweep_param = "female_share";
      for (int i = 1; i <= 9; ++i) plan.sweep_values.push_back(i / 10.0);
    } else {
      for (int i = 1; i <= 10; ++i) plan.sweep_values.push_back(5.0 * i / 100.0);
    }
    plan.adult_scenario = s;
  } else if (scenario == "hours") {
    plan.run_tag = "adult_hours";
    plan.objective = dgp::Objective::CovariateShift;
    plan.sweep_param = "hours";
    plan.sweep_values = {100.0, 80.0, 60.0, 40.0, 20.0};
    adult::Scenario s;
    s.kind = adult::Scenario::Kind::HoursCap;
    plan.adult_scenario = s;
  } else if (scenario == "concept") {
    plan.run_tag = "adult_concept";
    plan.objective = dgp::Objective::ConceptShift;
    plan.sweep_param = "none";
    plan.sweep_values = {0.0};
    adult::Scenario s;
    s.kind = adult::Scenario::Kind::Balanced5050;
    plan.adult_scenario = s;
  } else if (scenario == "omitted") {
    plan.run_tag = "adult_omitted";
    plan.objective = dgp::Objective::OmittedVariable;
    plan.sweep_param = "none";
    plan.sweep_values = {0.0};
    plan.variants = {ModelVariant::LR_C, ModelVariant::LR_NotC,
                     ModelVariant::MLP_C, ModelVariant::MLP_NotC};
  } else {
    throw ConfigError("unknown adult scenario '" + scenario +
                      "' (expected proportion|hours|concept|omitted)");
  }
  return plan;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, double ci_level) {
  // Key: everything but trial/seed/value; values collected across trials.
  std::map<std::string, std::pair<SummaryRow, std::vector<double>>> groups;
  for (const auto& row : rows) {
    const std::string key = row.objective + '\x1f' + row.model_variant + '\x1f' +
                            row.sweep_param + '\x1f' + format_double(row.sweep_value) +
                            '\x1f' + row.q_kind + '\x1f' + row.metric + '\x1f' +
                            row.group_or_all;
    auto it = groups.find(key);
    if (it == groups.end()) {
      SummaryRow s;
      s.objective = row.objective;
      s.model_variant = row.model_variant;
      s.sweep_param = row.sweep_param;
      s.sweep_value = row.sweep_value;
      s.q_kind = row.q_kind;
      s.metric = row.metric;
      s.group_or_all = row.group_or_all;
      it = groups.emplace(key, std::make_pair(std::move(s), std::vector<double>{}))
               .first;
    }
    it->second.second.push_back(row.value);
  }

  std::vector<SummaryRow> out;
  for (auto& [key, entry] : groups) {
    SummaryRow s = entry.first;
    const auto& values = entry.second;
    s.n_trials = static_cast<int>(values.size());
    double m = 0.0;
    for (double v : values) m += v;
    s.mean = m / static_cast<double>(values.size());
    if (values.size() >= 2) {
      auto [lo, hi] = metrics::trial_ci(values, ci_level);
      s.ci_low = lo;
      s.ci_high = hi;
    } else {
      s.ci_low = s.ci_high = s.mean;
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

struct VariantStyle {
  const char* color;
  bool triangle;
};

VariantStyle style_for(const std::string& variant) {
  // Circles mark linear models, triangles MLPs.
  if (variant == "LR_A") return {"#1f77b4", false};    // blue
  if (variant == "LR_noA") return {"#2ca02c", false};  // green
  if (variant == "MLP_A") return {"#d62728", true};    // red
  if (variant == "MLP_noA") return {"#9467bd", true};  // violet
  if (variant == "LR_C") return {"#1f77b4", false};
  if (variant == "LR_noC") return {"#bcbd22", false};  // yellow
  if (variant == "MLP_C") return {"#d62728", true};
  if (variant == "MLP_noC") return {"#dda0dd", true};  // plum
  return {"#777777", false};
}

}  // namespace

std::vector<std::string> render_plots(const std::vector<SummaryRow>& summary,
                                      const std::string& out_dir) {
  if (summary.empty()) {
    std::cerr << "render_plots: empty summary, nothing to plot\n";
    return {};
  }
  std::filesystem::create_directories(out_dir);

  // (objective, q_kind, metric) -> variant -> points
  std::map<std::string, std::map<std::string, svg::Series>> charts;
  std::map<std::string, std::array<std::string, 3>> chart_keys;
  for (const auto& s : summary) {
    if (s.metric != "max_gap" && s.metric != "mean_gap" && s.metric != "bb_acc_gap")
      continue;
    const std::string chart_id = s.objective + "_" + s.q_kind + "_" + s.metric;
    chart_keys[chart_id] = {s.objective, s.q_kind, s.metric};
    auto& series = charts[chart_id][s.model_variant];
    if (series.name.empty()) {
      series.name = s.model_variant;
      const auto style = style_for(s.model_variant);
      series.color = style.color;
      series.triangle_marker = style.triangle;
    }
    series.points.push_back(
        {s.sweep_value, s.mean * 100.0, s.ci_low * 100.0, s.ci_high * 100.0});
  }

  std::vector<std::string> written;
  for (auto& [chart_id, variant_map] : charts) {
    std::vector<svg::Series> series_list;
    for (auto& [name, series] : variant_map) {
      std::sort(series.points.begin(), series.points.end(),
                [](const svg::SeriesPoint& a, const svg::SeriesPoint& b) {
                  return a.x < b.x;
                });
      series_list.push_back(std::move(series));
    }
    const auto& keys = chart_keys[chart_id];
    svg::ChartSpec spec;
    spec.title = keys[2] == "bb_acc_gap"
                     ? keys[0] + ": black-box accuracy gap (A=1 minus A=0)"
                     : keys[0] + ": percent " +
                           (keys[2] == "max_gap" ? "maximum" : "mean") +
                           " fidelity gap (" + keys[1] + ")";
    spec.x_label = summary.front().sweep_param;
    for (const auto& s : summary)
      if (s.objective == keys[0]) {
        spec.x_label = s.sweep_param;
        break;
      }
    spec.y_label = "percent";
    const std::string path = out_dir + "/" + chart_id + ".svg";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << svg::render_line_chart(spec, series_list);
    written.push_back(path);
  }
  return written;
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "run_id,objective,model_variant,sweep_param,sweep_value,trial,seed,"
         "q_kind,metric,group_or_all,value\n";
  for (const auto& r : rows)
    out << r.run_id << ',' << r.objective << ',' << r.model_variant << ','
        << r.sweep_param << ',' << format_double(r.sweep_value) << ',' << r.trial
        << ',' << r.seed << ',' << r.q_kind << ',' << r.metric << ','
        << r.group_or_all << ',' << format_double(r.value) << '\n';
  if (!out) throw IoError("write failure on '" + path + "'");
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty results file", 0);
  std::vector<ResultRow> rows;
  std::size_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos) next = line.size();
      fields.push_back(line.substr(pos, next - pos));
      if (next == line.size()) break;
      pos = next + 1;
    }
    if (fields.size() != 11) throw ParseError("expected 11 fields", offset);
    ResultRow r;
    r.run_id = fields[0];
    r.objective = fields[1];
    r.model_variant = fields[2];
    r.sweep_param = fields[3];
    r.sweep_value = std::stod(fields[4]);
    r.trial = std::stoi(fields[5]);
    r.seed = std::stoull(fields[6]);
    r.q_kind = fields[7];
    r.metric = fields[8];
    r.group_or_all = fields[9];
    r.value = std::stod(fields[10]);
    rows.push_back(std::move(r));
    offset += line.size() + 1;
  }
  return rows;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "objective,model_variant,sweep_param,sweep_value,q_kind,metric,"
         "group_or_all,mean,ci_low,ci_high,n_trials\n";
  for (const auto& r : rows)
    out << r.objective << ',' << r.model_variant << ',' << r.sweep_param << ','
        << format_double(r.sweep_value) << ',' << r.q_kind << ',' << r.metric << ','
        << r.group_or_all << ',' << format_double(r.mean) << ','
        << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ','
        << r.n_trials << '\n';
}

void apply_config_overrides(ExperimentPlan& plan, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(line_no) +
                           " is not key=value",
                       line_no);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    auto as_double = [&] { return std::stod(value); };
    auto as_int = [&] { return std::stoll(value); };
    auto as_list = [&] {
      std::vector<std::string> items;
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) items.push_back(item);
      return items;
    };
    try {
      if (key == "trials")
        plan.trials = static_cast<int>(as_int());
      else if (key == "seed")
        plan.base_seed = static_cast<std::uint64_t>(as_int());
      else if (key == "n")
        plan.n = static_cast<std::size_t>(as_int());
      else if (key == "max_explained_per_group")
        plan.max_explained_per_group = static_cast<std::size_t>(as_int());
      else if (key == "threads")
        plan.n_threads = static_cast<unsigned>(as_int());
      else if (key == "train_fraction")
        plan.train_fraction = as_double();
      else if (key == "grid") {
        plan.sweep_values.clear();
        for (const auto& item : as_list()) plan.sweep_values.push_back(std::stod(item));
      } else if (key == "variants") {
        plan.variants.clear();
        for (const auto& item : as_list())
          plan.variants.push_back(variant_from_name(item));
      } else if (key == "lime.n_samples")
        plan.lime_cfg.n_samples = static_cast<std::size_t>(as_int());
      else if (key == "lime.kernel_width")
        plan.lime_cfg.kernel_width = as_double();
      else if (key == "lime.ridge_lambda")
        plan.lime_cfg.ridge_lambda = as_double();
      else if (key == "lime.center")
        plan.lime_cfg.center = value == "training_mean"
                                   ? lime::PerturbCenter::TrainingMean
                                   : lime::PerturbCenter::Instance;
      else if (key == "lime.binary_as_continuous")
        plan.lime_cfg.binary_as_continuous = value == "1" || value == "true";
      else if (key == "train.epochs")
        plan.train_cfg.epochs = static_cast<int>(as_int());
      else if (key == "train.learning_rate")
        plan.train_cfg.learning_rate = as_double();
      else if (key == "train.weight_decay")
        plan.train_cfg.weight_decay = as_double();
      else if (key == "train.batch_size")
        plan.train_cfg.batch_size = static_cast<std::size_t>(as_int());
      else
        throw ConfigError("unknown config key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("bad value for config key '" + key + "': " + value);
    }
  }
}

}  // namespace xdaudit::harness
