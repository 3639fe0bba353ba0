// Acceptance suite: end-to-end checks of the audit pipeline at its default
// settings (n = 20000, 5 trials, 500 explained instances per group). Each
// criterion prints one PASS/FAIL line; the Adult criterion is skipped when
// the UCI files are not supplied.
//
// Environment knobs:
//   XDAUDIT_ACCEPT_THREADS  worker threads for experiment cells (default 2)
//   ADULT_DATA_DIR          directory holding adult.data / adult.test

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "xdaudit/adult.hpp"
#include "xdaudit/blackbox.hpp"
#include "xdaudit/dgp.hpp"
#include "xdaudit/harness.hpp"
#include "xdaudit/lime.hpp"
#include "xdaudit/metrics.hpp"
#include "xdaudit/oracles.hpp"
#include "xdaudit/rng.hpp"

using namespace xdaudit;
using harness::ExperimentPlan;
using harness::ModelVariant;

namespace {

int g_failures = 0;
int g_criteria_run = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail = "") {
  ++g_criteria_run;
  if (!pass) ++g_failures;
  std::printf("CRITERION %d %s: %s%s%s\n", criterion, pass ? "PASS" : "FAIL",
              what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
}

void report_skip(int criterion, const std::string& what, const std::string& why) {
  ++g_criteria_run;
  std::printf("CRITERION %d SKIP: %s -- %s\n", criterion, what.c_str(), why.c_str());
  std::fflush(stdout);
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

unsigned accept_threads() {
  const char* env = std::getenv("XDAUDIT_ACCEPT_THREADS");
  if (!env || !*env) return 2;
  const int v = std::atoi(env);
  return v > 0 ? static_cast<unsigned>(v) : 2;
}

// ---------------------------------------------------------------- criterion 1

void criterion_metric_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  bool match = true;
  bool identity = true;
  for (int rep = 0; rep < 100; ++rep) {
    const int n_groups = 2 + static_cast<int>(rng.below(4));
    std::vector<metrics::FidelityRecord> records;
    for (int g = 0; g < n_groups; ++g) {
      const std::size_t sz = 1 + rng.below(60);
      for (std::size_t i = 0; i < sz; ++i)
        records.push_back({records.size(), g, rng.uniform()});
    }
    const auto [om, og] = oracles::brute_force_gap_oracle(records);
    if (std::abs(metrics::max_fidelity_gap(records).value - om) > 1e-12 ||
        std::abs(metrics::mean_fidelity_gap(records) - og) > 1e-12)
      match = false;

    // Two-group identity on a reduced record set.
    std::vector<metrics::FidelityRecord> two;
    for (const auto& r : records)
      if (r.group <= 1) two.push_back(r);
    const auto q = metrics::group_means(two);
    if (metrics::mean_fidelity_gap(two) != std::abs(q[0] - q[1])) identity = false;
  }
  const double secs = elapsed_s(t0);
  report(1, match && identity && secs < 1.0,
         "gap metrics match the brute-force oracle to 1e-12; two-group "
         "identity exact",
         "100 record sets in " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 2

void criterion_surrogate_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(202);
  bool match = true;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = 1 + rng.below(5);
    const std::size_t n = 10 + rng.below(90);
    Matrix x(n, d);
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal();
      y[i] = rng.normal();
      w[i] = 0.01 + rng.uniform();
    }
    const double lambda = 2.0 * rng.uniform();
    const auto [psi, b0] = lime::fit_surrogate(x, y, w, lambda);
    const auto [opsi, ob0] = oracles::wls_explicit_inverse(x, y, w, lambda);
    double diff = std::abs(b0 - ob0);
    for (std::size_t j = 0; j < d; ++j)
      diff = std::max(diff, std::abs(psi[j] - opsi[j]));
    if (diff > 1e-8) match = false;
  }

  // Constant black box: agreement 1 for every instance.
  blackbox::ModelSpec spec;
  spec.kind = blackbox::ModelKind::LR;
  spec.feature_names = {"x", "y"};
  blackbox::Standardizer std_scaler;
  std_scaler.mean = {0.0, 0.0};
  std_scaler.sd = {1.0, 1.0};
  blackbox::Layer layer;
  layer.w = Matrix(2, 1);
  layer.b = {std::log(0.9 / 0.1)};
  const blackbox::TrainedModel constant_model(spec, std_scaler, {layer}, {});
  lime::FeatureScaler scaler;
  scaler.entries = {{"x", ColumnKind::Continuous, 0.0, 1.0, 0.0},
                    {"y", ColumnKind::Continuous, 0.0, 1.0, 0.0}};
  lime::ExplainerConfig cfg;
  cfg.n_samples = 1000;
  bool constant_faithful = true;
  for (int i = 0; i < 50; ++i) {
    cfg.seed = 500 + i;
    const auto expl = lime::explain(constant_model, {rng.normal(), rng.normal()},
                                    static_cast<std::size_t>(i), cfg, scaler);
    if (lime::agreement(expl) != 1) constant_faithful = false;
  }
  const double secs = elapsed_s(t0);
  report(2, match && constant_faithful && secs < 5.0,
         "fit_surrogate matches explicit normal equations within 1e-8; "
         "constant black box is perfectly faithful",
         "in " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 3

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(303);
  double worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    const bool mlp = draw % 2 == 1;
    const std::size_t d = 1 + rng.below(4);
    blackbox::ModelSpec spec;
    spec.kind = mlp ? blackbox::ModelKind::MLP : blackbox::ModelKind::LR;
    for (std::size_t j = 0; j < d; ++j)
      spec.feature_names.push_back("f" + std::to_string(j));
    if (mlp)
      spec.hidden_dims = {2 + rng.below(8), 2 + rng.below(8), 2 + rng.below(8)};
    spec.seed = 9000 + draw;
    const std::size_t rows = 2 + rng.below(7);
    Matrix x(rows, d);
    for (double& v : x.data()) v = rng.normal();
    std::vector<int> y(rows);
    for (auto& v : y) v = rng.bernoulli(0.5) ? 1 : 0;
    worst = std::max(worst, blackbox::gradient_check(spec, x, y));
  }

  // One full-size architecture draw.
  blackbox::ModelSpec full;
  full.kind = blackbox::ModelKind::MLP;
  full.feature_names = {"a", "b", "c"};
  full.hidden_dims = {50, 100, 200};
  full.seed = 77;
  Matrix x2(2, 3);
  for (double& v : x2.data()) v = rng.normal();
  worst = std::max(worst, blackbox::gradient_check(full, x2, {1, 0}));

  const double secs = elapsed_s(t0);
  report(3, worst <= 1e-3 && secs < 30.0,
         "analytic gradients within 1e-3 of central differences over 20 "
         "random draws plus the full-size MLP",
         "max rel err " + fmt(worst) + " in " + fmt(secs) + " s");
}

// ------------------------------------------------------- sweep infrastructure

struct SweepSummary {
  // (variant, sweep value) -> mean over trials, for one metric.
  std::map<std::string, std::map<double, double>> mean_gap;
  std::map<std::string, std::map<double, double>> max_gap;
  std::map<std::string, std::map<double, double>> bb_gap;
  std::map<std::string, std::map<double, std::pair<double, double>>> mean_gap_ci;
  std::size_t failures = 0;
};

SweepSummary run_sweep(dgp::Objective objective, std::uint64_t base_seed) {
  ExperimentPlan plan = harness::objective_defaults(objective, base_seed);
  plan.n_threads = accept_threads();
  const auto result = harness::run_plan(plan);
  SweepSummary s;
  s.failures = result.failures.size();
  for (const auto& f : result.failures)
    std::fprintf(stderr, "  cell failed: %s: %s\n", f.run_id.c_str(),
                 f.message.c_str());
  for (const auto& row : harness::summarize(result.rows)) {
    if (row.q_kind != "accuracy") continue;
    if (row.metric == "mean_gap") {
      s.mean_gap[row.model_variant][row.sweep_value] = row.mean;
      s.mean_gap_ci[row.model_variant][row.sweep_value] = {row.ci_low, row.ci_high};
    } else if (row.metric == "max_gap") {
      s.max_gap[row.model_variant][row.sweep_value] = row.mean;
    } else if (row.metric == "bb_acc_gap") {
      s.bb_gap[row.model_variant][row.sweep_value] = row.mean;
    }
  }
  return s;
}

double spread(const std::map<double, double>& series) {
  double lo = 1e300, hi = -1e300;
  for (const auto& [x, v] : series) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

// ------------------------------------------------------------- criteria 4-7,9

SweepSummary g_obj1, g_obj2;  // reused by the cross-check

void criterion_objective2() {
  const auto s = run_sweep(dgp::Objective::CovariateShift, 0);
  g_obj2 = s;
  const double at_020 = s.mean_gap.at("MLP_A").at(0.2);
  const double at_100 = s.mean_gap.at("MLP_A").at(1.0);
  const bool decreasing = at_020 > at_100;
  const bool window = at_020 >= 0.015 && at_020 <= 0.08;
  const bool tail = at_100 <= 0.01;
  const bool flat_mlp = spread(s.mean_gap.at("MLP_noA")) < 0.02;
  const bool flat_lr = spread(s.mean_gap.at("LR_noA")) < 0.02;
  report(4,
         s.failures == 0 && decreasing && window && tail && flat_mlp && flat_lr,
         "objective 2: MLP_A mean gap decreases with overlap, 20% overlap in "
         "[1.5%, 8%], 100% overlap <= 1%, excluded-A variants flat",
         "MLP_A " + fmt(at_020 * 100) + "% -> " + fmt(at_100 * 100) +
             "%; MLP_noA spread " + fmt(spread(s.mean_gap.at("MLP_noA")) * 100) +
             "pp, LR_noA spread " + fmt(spread(s.mean_gap.at("LR_noA")) * 100) +
             "pp");
}

void criterion_objective3() {
  const auto s = run_sweep(dgp::Objective::ConceptShift, 0);
  const double high = s.mean_gap.at("MLP_noA").at(-0.5);
  const double moderate = s.mean_gap.at("MLP_noA").at(0.5);
  const double mlp_a_high = s.mean_gap.at("MLP_A").at(-0.5);
  double lr_worst = 0.0;
  for (const char* v : {"LR_A", "LR_noA"})
    for (const auto& [x, val] : s.mean_gap.at(v)) lr_worst = std::max(lr_worst, val);
  const bool ratio = high >= 3.0 * moderate;
  const bool absolute = high >= 0.10;
  const bool ordering = high > mlp_a_high;
  const bool lr_small = lr_worst <= 0.02;
  report(5, s.failures == 0 && ratio && absolute && ordering && lr_small,
         "objective 3: MLP_noA high-shift gap >= 3x moderate and >= 10pp, "
         "exceeds MLP_A, LR variants <= 2%",
         "MLP_noA " + fmt(moderate * 100) + "% -> " + fmt(high * 100) +
             "%, MLP_A " + fmt(mlp_a_high * 100) + "%, worst LR " +
             fmt(lr_worst * 100) + "%");

  // High shift leaves the MLP_A black box slightly less accurate on the
  // disadvantaged group.
  const double bb = s.bb_gap.at("MLP_A").at(-0.5);
  std::printf("EXAMPLE %s: objective 3 high-shift MLP_A black-box accuracy "
              "gap positive -- %.3g%%\n",
              bb > 0.0 ? "PASS" : "FAIL", bb * 100);
  if (!(bb > 0.0)) ++g_failures;
}

void criterion_objective1() {
  const auto s = run_sweep(dgp::Objective::SampleSize, 0);
  g_obj1 = s;
  const double mlp_spread = spread(s.mean_gap.at("MLP_noA"));
  const double lr_spread = spread(s.mean_gap.at("LR_noA"));
  const double lr_a_005 = s.mean_gap.at("LR_A").at(0.05);
  const double lr_a_050 = s.mean_gap.at("LR_A").at(0.5);
  report(6,
         s.failures == 0 && mlp_spread <= 0.01 && lr_spread <= 0.01 &&
             lr_a_005 > lr_a_050,
         "objective 1: excluded-A variants vary <= 1pp across proportions; "
         "LR_A at 5% exceeds LR_A at 50%",
         "MLP_noA spread " + fmt(mlp_spread * 100) + "pp, LR_noA spread " +
             fmt(lr_spread * 100) + "pp, LR_A " + fmt(lr_a_005 * 100) + "% vs " +
             fmt(lr_a_050 * 100) + "%");
}

void criterion_objective4() {
  const auto s = run_sweep(dgp::Objective::OmittedVariable, 0);
  const double notc_15 = s.mean_gap.at("MLP_noC").at(1.5);
  const double notc_05 = s.mean_gap.at("MLP_noC").at(0.5);
  double c_worst = 0.0;
  for (const auto& [x, val] : s.mean_gap.at("MLP_C")) c_worst = std::max(c_worst, val);
  report(7,
         s.failures == 0 && notc_15 >= notc_05 + 0.005 && c_worst <= 0.005,
         "objective 4: MLP_noC gap at alpha 1.5 exceeds alpha 0.5 by >= 0.5pp; "
         "MLP_C stays <= 0.5%",
         "MLP_noC " + fmt(notc_05 * 100) + "% -> " + fmt(notc_15 * 100) +
             "%, MLP_C worst " + fmt(c_worst * 100) + "%");

  // At 500 explained instances per group, |Q0 - Q1| has a sampling floor of
  // about 0.8 * sqrt(2 q (1 - q) / 500) even when the group fidelities are
  // equal; with ~99% surrogate agreement that floor is ~0.5%. Re-measure the
  // MLP_C clause with every test instance explained (floor ~0.2%) to show
  // whether a real gap is present. Informational, not gated.
  ExperimentPlan full = harness::objective_defaults(dgp::Objective::OmittedVariable, 0);
  full.variants = {ModelVariant::MLP_C};
  full.max_explained_per_group = 0;
  full.n_threads = accept_threads();
  const auto full_rows = harness::run_plan(full);
  double full_worst = 0.0;
  std::string values;
  for (const auto& row : harness::summarize(full_rows.rows)) {
    if (row.q_kind != "accuracy" || row.metric != "mean_gap") continue;
    full_worst = std::max(full_worst, row.mean);
    values += (values.empty() ? "" : ", ") + fmt(row.mean * 100) + "%";
  }
  std::printf("INFO: objective 4 MLP_C mean gap with the full test split "
              "explained: %s (worst %s%%)\n",
              values.c_str(), fmt(full_worst * 100).c_str());
  std::fflush(stdout);
}

void crosscheck_obj1_obj2() {
  // Same underlying population: objective 2 at full overlap and objective 1
  // at a 50% proportion induce the same training law, so the MLP_A mean
  // gaps must agree within their trial confidence intervals.
  if (g_obj1.mean_gap.empty() || g_obj2.mean_gap.empty()) return;
  const auto [lo1, hi1] = g_obj1.mean_gap_ci.at("MLP_A").at(0.5);
  const auto [lo2, hi2] = g_obj2.mean_gap_ci.at("MLP_A").at(1.0);
  const double v1 = g_obj1.mean_gap.at("MLP_A").at(0.5);
  const double v2 = g_obj2.mean_gap.at("MLP_A").at(1.0);
  const bool overlap = lo1 <= hi2 && lo2 <= hi1;
  const bool close = std::abs(v1 - v2) <= 0.01;
  std::printf("XCHECK %s: obj1 p=0.5 vs obj2 overlap=1.0 MLP_A mean gap agree "
              "-- %.3g%% in [%.3g, %.3g] vs %.3g%% in [%.3g, %.3g]\n",
              overlap || close ? "PASS" : "FAIL", v1 * 100, lo1 * 100, hi1 * 100,
              v2 * 100, lo2 * 100, hi2 * 100);
  if (!(overlap || close)) ++g_failures;
}

// ---------------------------------------------------------------- criterion 8

void criterion_adult() {
  adult::AdultConfig cfg;
  cfg.resolve_paths();
  if (!std::filesystem::exists(cfg.train_path) ||
      !std::filesystem::exists(cfg.test_path)) {
    report_skip(8, "Adult protocol",
                "user-supplied UCI files not found (set ADULT_DATA_DIR)");
    return;
  }

  const auto loaded = adult::load_raw(cfg);
  const bool count_ok = loaded.records.size() == 48842;

  const auto enc = adult::preprocess(loaded.records, cfg);
  const auto shift = adult::concept_shift_test(enc);
  const bool p_ok = shift.interaction_p_value <= 0.1;

  const unsigned threads = accept_threads();

  // Concept-shift scenario (balanced 50/50 training set).
  ExperimentPlan concept_plan = harness::adult_plan("concept", 0);
  concept_plan.n_threads = threads;
  const auto concept_rows = harness::run_plan(concept_plan, &enc);
  std::map<std::string, std::map<std::string, double>> concept_mean;
  for (const auto& row : harness::summarize(concept_rows.rows))
    if (row.q_kind == "accuracy")
      concept_mean[row.metric + "/" + row.group_or_all][row.model_variant] = row.mean;

  const double lr_a_max = concept_mean["max_gap/all"]["LR_A"];
  const double mlp_a_max = concept_mean["max_gap/all"]["MLP_A"];
  const double lr_a_mean = concept_mean["mean_gap/all"]["LR_A"];
  const double mlp_a_mean = concept_mean["mean_gap/all"]["MLP_A"];
  const double lr_bb = concept_mean["bb_acc_gap/all"]["LR_A"];
  const double mlp_bb = concept_mean["bb_acc_gap/all"]["MLP_A"];
  const bool concept_ok = std::abs(lr_a_max - 0.021) <= 0.02 &&
                          std::abs(mlp_a_max - 0.025) <= 0.02 &&
                          std::abs(lr_a_mean - 0.063) <= 0.03 &&
                          std::abs(mlp_a_mean - 0.078) <= 0.03;
  const bool bb_ok = lr_bb >= 0.10 && lr_bb <= 0.17 && mlp_bb >= 0.10 &&
                     mlp_bb <= 0.17;

  // Omitted-variable scenario (nationality toggled).
  ExperimentPlan omitted_plan = harness::adult_plan("omitted", 0);
  omitted_plan.n_threads = threads;
  const auto omitted_rows = harness::run_plan(omitted_plan, &enc);
  double mlp_c_mean = -1.0;
  for (const auto& row : harness::summarize(omitted_rows.rows))
    if (row.q_kind == "accuracy" && row.metric == "mean_gap" &&
        row.model_variant == "MLP_C")
      mlp_c_mean = row.mean;
  const bool omitted_ok = std::abs(mlp_c_mean - 0.083) <= 0.03;

  report(8,
         count_ok && p_ok && concept_ok && bb_ok && omitted_ok &&
             concept_rows.failures.empty() && omitted_rows.failures.empty(),
         "Adult protocol: 48842 rows, interaction p <= 0.1, concept and "
         "omitted-variable gaps near table values, 13-14pp accuracy gap",
         "rows " + std::to_string(loaded.records.size()) + ", p " +
             fmt(shift.interaction_p_value) + ", concept max/mean LR_A " +
             fmt(lr_a_max) + "/" + fmt(lr_a_mean) + " MLP_A " + fmt(mlp_a_max) +
             "/" + fmt(mlp_a_mean) + ", MLP_C omitted " + fmt(mlp_c_mean) +
             ", bb gaps " + fmt(lr_bb) + "/" + fmt(mlp_bb));
}

// ---------------------------------------------------------------- criterion 9

void criterion_determinism() {
  ExperimentPlan plan = harness::objective_defaults(dgp::Objective::CovariateShift, 0);
  plan.sweep_values = {0.2};
  plan.n_threads = accept_threads();

  namespace fs = std::filesystem;
  const std::string pa = (fs::temp_directory_path() / "xdaudit_det_a.csv").string();
  const std::string pb = (fs::temp_directory_path() / "xdaudit_det_b.csv").string();
  const auto a = harness::run_plan(plan);
  harness::write_results_csv(pa, a.rows);
  plan.n_threads = 1;  // thread count must not matter
  const auto b = harness::run_plan(plan);
  harness::write_results_csv(pb, b.rows);

  std::ifstream fa(pa), fb(pb);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  const bool identical = sa.str() == sb.str() && !sa.str().empty();
  std::remove(pa.c_str());
  std::remove(pb.c_str());
  report(9, identical && a.failures.empty() && b.failures.empty(),
         "two full runs of the same plan produce byte-identical result CSVs",
         std::to_string(a.rows.size()) + " rows");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  std::printf("acceptance suite: defaults n=20000, 5 trials, 500 explained "
              "per group, %u worker thread(s)\n",
              accept_threads());

  criterion_metric_oracle();
  criterion_surrogate_oracle();
  criterion_gradients();
  criterion_objective2();
  criterion_objective3();
  criterion_objective1();
  criterion_objective4();
  crosscheck_obj1_obj2();
  criterion_adult();
  criterion_determinism();

  std::printf("acceptance: %d criteria evaluated, %d failure(s), %.1f s total\n",
              g_criteria_run, g_failures, elapsed_s(t0));
  return g_failures == 0 ? 0 : 1;
}
