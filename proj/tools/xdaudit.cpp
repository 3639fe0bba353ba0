#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xdaudit/adult.hpp"
#include "xdaudit/blackbox.hpp"
#include "xdaudit/dgp.hpp"
#include "xdaudit/errors.hpp"
#include "xdaudit/harness.hpp"
#include "xdaudit/oracles.hpp"
#include "xdaudit/rng.hpp"

namespace {

using namespace xdaudit;

void set_dgp_param(dgp::DataGenSpec& spec, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("--param expects key=value");
  const std::string key = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);
  if (key == "n")
    spec.n = std::stoull(value);
  else if (key == "seed")
    spec.seed = std::stoull(value);
  else if (key == "coef_L_on_A")
    spec.coef_L_on_A = std::stod(value);
  else if (key == "coef_L_on_C")
    spec.coef_L_on_C = std::stod(value);
  else if (key == "noise_sd_L")
    spec.noise_sd_L = std::stod(value);
  else if (key == "beta")
    spec.beta = std::stod(value);
  else if (key == "alpha")
    spec.alpha = std::stod(value);
  else if (key == "prob_low")
    spec.prob_low = std::stod(value);
  else if (key == "prob_high")
    spec.prob_high = std::stod(value);
  else if (key == "outcome_coeffs") {
    spec.outcome_coeffs.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) spec.outcome_coeffs.push_back(std::stod(item));
  } else
    throw ConfigError("unknown DataGenSpec field '" + key + "'");
}

int cmd_gen(const std::string& objective, const std::vector<std::string>& params,
            const std::string& out_dir) {
  dgp::DataGenSpec spec = dgp::DataGenSpec::defaults(dgp::objective_from_name(objective));
  for (const auto& kv : params) set_dgp_param(spec, kv);
  const TabularDataset ds = dgp::sample_population(spec);
  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/population.csv";
  ds.save_csv(path, spec.to_metadata());
  std::cout << "wrote " << path << " (" << ds.n_rows() << " rows)\n";
  const auto stats = dgp::summary_stats(ds);
  for (const auto& g : stats)
    std::cout << "group " << g.group << ": n=" << g.count << " P(Y=1)=" << g.p_y1
              << '\n';
  return 0;
}

void report_failures(const harness::RunResult& result) {
  for (const auto& f : result.failures)
    std::cerr << "cell failed: " << f.run_id << ": " << f.message << '\n';
}

int cmd_report(const std::string& in_path, const std::string& out_dir) {
  const auto rows = harness::read_results_csv(in_path);
  const auto summary = harness::summarize(rows);
  std::filesystem::create_directories(out_dir);
  harness::write_summary_csv(out_dir + "/summary.csv", summary);
  const auto plots = harness::render_plots(summary, out_dir);
  std::cout << "wrote " << out_dir << "/summary.csv and " << plots.size()
            << " plot(s)\n";
  return 0;
}

int cmd_test_oracles() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << '\n';
    if (!ok) ++failures;
  };

  {  // Gap metrics vs naive enumeration.
    Rng rng(20240517);
    bool ok = true;
    for (int rep = 0; rep < 100 && ok; ++rep) {
      const int n_groups = 2 + static_cast<int>(rng.below(3));
      std::vector<metrics::FidelityRecord> records;
      for (int g = 0; g < n_groups; ++g) {
        const std::size_t sz = 1 + rng.below(40);
        for (std::size_t i = 0; i < sz; ++i)
          records.push_back({records.size(), g, rng.uniform()});
      }
      const auto [om, og] = oracles::brute_force_gap_oracle(records);
      ok = std::abs(metrics::max_fidelity_gap(records).value - om) <= 1e-12 &&
           std::abs(metrics::mean_fidelity_gap(records) - og) <= 1e-12;
    }
    check("gap metrics match brute-force oracle (100 random record sets)", ok);
  }

  {  // Surrogate vs explicit-inverse weighted least squares.
    Rng rng(77);
    bool ok = true;
    for (int rep = 0; rep < 100 && ok; ++rep) {
      const std::size_t d = 1 + rng.below(5);
      const std::size_t n = 20 + rng.below(60);
      Matrix x(n, d);
      std::vector<double> y(n), w(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal();
        y[i] = rng.normal();
        w[i] = rng.uniform() + 0.01;
      }
      const double lambda = rng.uniform();
      auto [psi, b0] = lime::fit_surrogate(x, y, w, lambda);
      auto [opsi, ob0] = oracles::wls_explicit_inverse(x, y, w, lambda);
      double diff = std::abs(b0 - ob0);
      for (std::size_t j = 0; j < d; ++j)
        diff = std::max(diff, std::abs(psi[j] - opsi[j]));
      ok = diff <= 1e-8;
    }
    check("fit_surrogate matches explicit-inverse WLS (100 random problems)", ok);
  }

  {  // Analytic gradients vs finite differences.
    Rng rng(99);
    auto batch = [&](std::size_t rows, std::size_t d) {
      Matrix x(rows, d);
      for (double& v : x.data()) v = rng.normal();
      std::vector<int> y(rows);
      for (auto& v : y) v = rng.bernoulli(0.5) ? 1 : 0;
      return std::make_pair(x, y);
    };
    blackbox::ModelSpec lr;
    lr.kind = blackbox::ModelKind::LR;
    lr.feature_names = {"f0", "f1", "f2"};
    lr.seed = 3;
    auto [xl, yl] = batch(4, 3);
    const double lr_err = blackbox::gradient_check(lr, xl, yl);

    blackbox::ModelSpec mlp;
    mlp.kind = blackbox::ModelKind::MLP;
    mlp.feature_names = {"f0", "f1", "f2"};
    mlp.hidden_dims = {50, 100, 200};
    mlp.seed = 4;
    auto [xm, ym] = batch(2, 3);
    const double mlp_err = blackbox::gradient_check(mlp, xm, ym);
    check("LR gradient check <= 1e-4", lr_err <= 1e-4);
    check("MLP [50,100,200] gradient check <= 1e-3", mlp_err <= 1e-3);
  }

  std::cout << (failures == 0 ? "all oracle suites passed\n"
                              : "oracle suites FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fidelity-gap audit of LIME explanations across sensitive groups"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic population CSV");
  std::string gen_objective;
  std::vector<std::string> gen_params;
  std::string gen_out = "out";
  gen->add_option("--objective", gen_objective,
                  "sample_size|covariate_shift|concept_shift|omitted_variable")
      ->required();
  gen->add_option("--param", gen_params, "DataGenSpec override, key=value");
  gen->add_option("--out", gen_out, "output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "Run a synthetic experiment sweep");
  std::string run_objective, run_out = "results.csv", run_grid, run_variants;
  std::string run_config, run_dump;
  harness::ExperimentPlan run_overrides;  // flag targets
  int run_trials = 5;
  std::uint64_t run_seed = 0;
  std::size_t run_n = 20000, run_cap = 500;
  unsigned run_threads = 1;
  run->add_option("--objective", run_objective, "objective name or 1..4")->required();
  run->add_option("--grid", run_grid, "comma-separated sweep values");
  run->add_option("--variants", run_variants, "comma-separated model variants");
  run->add_option("--trials", run_trials, "number of seeded trials");
  run->add_option("--seed", run_seed, "base seed");
  run->add_option("--n", run_n, "population size");
  run->add_option("--max-explained", run_cap, "cap of explained instances per group");
  run->add_option("--threads", run_threads, "parallel cells");
  run->add_option("--dump-dir", run_dump, "write per-cell explanation CSVs here");
  run->add_option("--config", run_config, "key=value config file overriding flags");
  run->add_option("--out", run_out, "results CSV path");

  // adult
  auto* adult_cmd = app.add_subcommand("adult", "Run an Adult-dataset scenario");
  std::string adult_scenario, adult_data_dir, adult_out = "results.csv";
  std::string adult_config;
  int adult_trials = 5;
  std::uint64_t adult_seed = 0;
  unsigned adult_threads = 1;
  bool adult_female_sweep = false;
  std::size_t adult_cap = 500;
  adult_cmd->add_option("--scenario", adult_scenario, "proportion|hours|concept|omitted")
      ->required();
  adult_cmd->add_option("--data", adult_data_dir,
                        "directory holding adult.data and adult.test");
  adult_cmd->add_option("--trials", adult_trials, "number of seeded trials");
  adult_cmd->add_option("--seed", adult_seed, "base seed");
  adult_cmd->add_option("--threads", adult_threads, "parallel cells");
  adult_cmd->add_option("--max-explained", adult_cap,
                        "cap of explained instances per group");
  adult_cmd->add_flag("--female-sweep", adult_female_sweep,
                      "sweep female share 10%..90% instead of male share 5%..50%");
  adult_cmd->add_option("--config", adult_config, "key=value config file");
  adult_cmd->add_option("--out", adult_out, "results CSV path");

  // report
  auto* report = app.add_subcommand("report", "Summarize results and render plots");
  std::string report_in, report_out = "report";
  report->add_option("--in", report_in, "results CSV")->required();
  report->add_option("--out", report_out, "output directory")->required();

  // test-oracles
  app.add_subcommand("test-oracles", "Run the brute-force oracle suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("gen")) return cmd_gen(gen_objective, gen_params, gen_out);

    if (app.got_subcommand("run")) {
      harness::ExperimentPlan plan = harness::objective_defaults(
          dgp::objective_from_name(run_objective), run_seed);
      plan.trials = run_trials;
      plan.n = run_n;
      plan.max_explained_per_group = run_cap;
      plan.n_threads = run_threads;
      plan.dump_dir = run_dump;
      if (!run_grid.empty()) {
        plan.sweep_values.clear();
        std::stringstream ss(run_grid);
        std::string item;
        while (std::getline(ss, item, ',')) plan.sweep_values.push_back(std::stod(item));
      }
      if (!run_variants.empty()) {
        plan.variants.clear();
        std::stringstream ss(run_variants);
        std::string item;
        while (std::getline(ss, item, ','))
          plan.variants.push_back(harness::variant_from_name(item));
      }
      if (!run_config.empty()) harness::apply_config_overrides(plan, run_config);
      const auto result = harness::run_plan(plan);
      report_failures(result);
      harness::write_results_csv(run_out, result.rows);
      std::cout << "wrote " << run_out << " (" << result.rows.size() << " rows, "
                << result.failures.size() << " failed cells)\n";
      return 0;
    }

    if (app.got_subcommand("adult")) {
      adult::AdultConfig cfg;
      if (!adult_data_dir.empty()) {
        cfg.train_path = adult_data_dir + "/adult.data";
        cfg.test_path = adult_data_dir + "/adult.test";
      }
      cfg.resolve_paths();
      const auto loaded = adult::load_raw(cfg);
      for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
      const auto enc = adult::preprocess(loaded.records, cfg);
      std::cout << "adult: " << enc.data.n_rows() << " rows, "
                << enc.data.n_cols() << " encoded columns\n";
      if (adult_scenario == "concept") {
        const auto test = adult::concept_shift_test(enc);
        std::cout << "interaction test: beta3=" << test.coefficients[3]
                  << " p=" << test.interaction_p_value << '\n';
      }
      harness::ExperimentPlan plan =
          harness::adult_plan(adult_scenario, adult_seed, adult_female_sweep);
      plan.trials = adult_trials;
      plan.n_threads = adult_threads;
      plan.max_explained_per_group = adult_cap;
      if (!adult_config.empty()) harness::apply_config_overrides(plan, adult_config);
      const auto result = harness::run_plan(plan, &enc);
      report_failures(result);
      harness::write_results_csv(adult_out, result.rows);
      std::cout << "wrote " << adult_out << " (" << result.rows.size() << " rows, "
                << result.failures.size() << " failed cells)\n";
      return 0;
    }

    if (app.got_subcommand("report")) return cmd_report(report_in, report_out);
    if (app.got_subcommand("test-oracles")) return cmd_test_oracles();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
