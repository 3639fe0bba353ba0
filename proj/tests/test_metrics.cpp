#include "xdaudit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "xdaudit/errors.hpp"
#include "xdaudit/oracles.hpp"
#include "xdaudit/rng.hpp"

using namespace xdaudit;
using namespace xdaudit::metrics;

namespace {

std::vector<FidelityRecord> records_from(const std::vector<std::vector<double>>& groups) {
  std::vector<FidelityRecord> records;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (double q : groups[g]) records.push_back({records.size(), static_cast<int>(g), q});
  return records;
}

}  // namespace

TEST_CASE("max_fidelity_gap hand evaluations") {
  // group0 q=[1,0], group1 q=[1,1]: overall 0.75, gap = max(0.25, -0.25).
  const auto r = records_from({{1.0, 0.0}, {1.0, 1.0}});
  const auto gap = max_fidelity_gap(r);
  CHECK(gap.value == doctest::Approx(0.25));
  CHECK(gap.argmax_group == 0);

  // Three equal-size groups with Q = (1.0, 0.5, 0.75): overall 0.75.
  const auto r3 = records_from({{1.0, 1.0}, {0.5, 0.5}, {0.75, 0.75}});
  CHECK(max_fidelity_gap(r3).value == doctest::Approx(0.25));
  CHECK(max_fidelity_gap(r3).argmax_group == 1);

  // All equal: zero gap.
  const auto req = records_from({{0.6, 0.6}, {0.6}});
  CHECK(max_fidelity_gap(req).value == doctest::Approx(0.0));
}

TEST_CASE("mean_fidelity_gap hand evaluations") {
  CHECK(mean_fidelity_gap(records_from({{0.5}, {1.0}})) == doctest::Approx(0.5));
  CHECK(mean_fidelity_gap(records_from({{0.7, 0.7}, {0.7}})) == doctest::Approx(0.0));
  // Q = (1.0, 0.5, 0.75): (1/3)(0.5 + 0.25 + 0.25) = 1/3.
  CHECK(mean_fidelity_gap(records_from({{1.0}, {0.5}, {0.75}})) ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("two-group identities") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::vector<double>> groups(2);
    for (auto& g : groups) {
      const std::size_t n = 1 + rng.below(30);
      for (std::size_t i = 0; i < n; ++i) g.push_back(rng.uniform());
    }
    const auto r = records_from(groups);
    std::vector<std::size_t> counts;
    const auto q = group_means(r, &counts);
    CHECK(mean_fidelity_gap(r) == doctest::Approx(std::abs(q[0] - q[1])).epsilon(1e-12));
    double overall = 0.0;
    for (const auto& rec : r) overall += rec.q_value;
    overall /= static_cast<double>(r.size());
    CHECK(max_fidelity_gap(r).value ==
          doctest::Approx(std::max(overall - q[0], overall - q[1])).epsilon(1e-12));
  }
}

TEST_CASE("gap metrics are invariant to group relabeling and nonnegative") {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const int n_groups = 2 + static_cast<int>(rng.below(3));
    std::vector<std::vector<double>> groups(n_groups);
    for (auto& g : groups) {
      const std::size_t n = 1 + rng.below(20);
      for (std::size_t i = 0; i < n; ++i) g.push_back(rng.uniform());
    }
    const auto r = records_from(groups);
    std::reverse(groups.begin(), groups.end());
    const auto relabeled = records_from(groups);
    CHECK(max_fidelity_gap(r).value >= 0.0);
    CHECK(mean_fidelity_gap(r) >= 0.0);
    CHECK(max_fidelity_gap(r).value ==
          doctest::Approx(max_fidelity_gap(relabeled).value).epsilon(1e-12));
    CHECK(mean_fidelity_gap(r) ==
          doctest::Approx(mean_fidelity_gap(relabeled)).epsilon(1e-12));
  }
}

TEST_CASE("oracle equivalence on 100 random multi-group record sets") {
  Rng rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const int n_groups = 2 + static_cast<int>(rng.below(4));
    std::vector<std::vector<double>> groups(n_groups);
    for (auto& g : groups) {
      const std::size_t n = 1 + rng.below(50);
      for (std::size_t i = 0; i < n; ++i) g.push_back(rng.uniform());
    }
    const auto r = records_from(groups);
    const auto [om, og] = oracles::brute_force_gap_oracle(r);
    CHECK(std::abs(max_fidelity_gap(r).value - om) <= 1e-12);
    CHECK(std::abs(mean_fidelity_gap(r) - og) <= 1e-12);
  }
}

TEST_CASE("empty group errors list group sizes") {
  std::vector<FidelityRecord> r = {{0, 0, 1.0}, {1, 2, 0.5}};  // group 1 missing
  CHECK_THROWS_AS(max_fidelity_gap(r), SamplingError);
  CHECK_THROWS_AS(mean_fidelity_gap(r), SamplingError);
  CHECK_THROWS_AS(max_fidelity_gap({}), SamplingError);
  // Single group cannot have a gap either.
  CHECK_THROWS_AS(max_fidelity_gap({{0, 0, 1.0}}), SamplingError);
}

TEST_CASE("fidelity_from_explanations maps both q kinds") {
  lime::LocalExplanation e;
  e.instance_id = 7;
  e.blackbox_prob = 0.9;
  e.blackbox_class = 1;
  e.surrogate_prob_at_instance = 0.7;
  e.surrogate_class = 1;
  const std::vector<lime::LocalExplanation> expls = {e};
  const auto acc = fidelity_from_explanations(expls, {0}, QKind::Accuracy);
  CHECK(acc[0].q_value == 1.0);
  CHECK(acc[0].group == 0);
  CHECK(acc[0].instance_id == 7);
  const auto res = fidelity_from_explanations(expls, {0}, QKind::ResidualError);
  CHECK(res[0].q_value == doctest::Approx(0.2));

  lime::LocalExplanation same = e;
  same.surrogate_prob_at_instance = 0.9;
  CHECK(fidelity_from_explanations({same}, {1}, QKind::ResidualError)[0].q_value ==
        doctest::Approx(0.0));

  // Accuracy records are always 0 or 1.
  lime::LocalExplanation dis = e;
  dis.surrogate_class = 0;
  for (const auto& rec :
       fidelity_from_explanations({e, dis}, {0, 1}, QKind::Accuracy))
    CHECK((rec.q_value == 0.0 || rec.q_value == 1.0));
}

TEST_CASE("fidelity_report pools instance-weighted overall fidelity") {
  const auto r = records_from({{1.0, 1.0, 1.0}, {0.0}});
  const auto report = fidelity_report(r);
  CHECK(report.overall_q == doctest::Approx(0.75));  // pooled, not mean of means
  CHECK(report.per_group_q[0] == doctest::Approx(1.0));
  CHECK(report.per_group_q[1] == doctest::Approx(0.0));
  CHECK(report.n_per_group == std::vector<std::size_t>{3, 1});
  CHECK(report.mean_gap == doctest::Approx(1.0));
}

TEST_CASE("trial_ci") {
  SUBCASE("constant values give a zero-width interval at the value") {
    const auto [lo, hi] = trial_ci({0.4, 0.4, 0.4, 0.4, 0.4});
    CHECK(lo == doctest::Approx(0.4));
    CHECK(hi == doctest::Approx(0.4));
  }
  SUBCASE("values {0,1} give an interval symmetric about 0.5") {
    const auto [lo, hi] = trial_ci({0.0, 1.0});
    CHECK(lo + hi == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lo < 0.0);  // t(1 df) is wide
  }
  SUBCASE("width shrinks as the trial count grows at fixed sd") {
    std::vector<double> v5, v20;
    for (int i = 0; i < 5; ++i) v5.push_back(i % 2 == 0 ? 0.0 : 1.0);
    for (int i = 0; i < 20; ++i) v20.push_back(i % 2 == 0 ? 0.0 : 1.0);
    const auto [lo5, hi5] = trial_ci(v5);
    const auto [lo20, hi20] = trial_ci(v20);
    CHECK(hi20 - lo20 < hi5 - lo5);
  }
  SUBCASE("fewer than two trials is an error") {
    CHECK_THROWS_AS(trial_ci({0.5}), SamplingError);
  }
}

TEST_CASE("bootstrap_ci brackets the statistic") {
  Rng rng(3);
  std::vector<FidelityRecord> r;
  for (int i = 0; i < 400; ++i)
    r.push_back({static_cast<std::size_t>(i), i % 2, rng.bernoulli(0.8) ? 1.0 : 0.0});
  auto stat = [](const std::vector<FidelityRecord>& recs) {
    double acc = 0.0;
    for (const auto& rec : recs) acc += rec.q_value;
    return acc / static_cast<double>(recs.size());
  };
  const auto [lo, hi] = bootstrap_ci(r, stat, 1000, 7);
  CHECK(lo < stat(r));
  CHECK(hi > stat(r));
  CHECK(hi - lo < 0.2);
  CHECK(lo > 0.6);
  CHECK(hi < 1.0);
}

TEST_CASE("report CSV serialization") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "xdaudit_report.csv").string();
  write_report_csv(path, {{"mean_gap", "accuracy", "all", 0.25, 0.2, 0.3},
                          {"group_Q", "accuracy", "0", 0.9, 0.85, 0.95}});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "metric,q_kind,group_or_all,value,ci_low,ci_high");
  std::getline(in, line);
  CHECK(line == "mean_gap,accuracy,all,0.25,0.2,0.3");
  std::remove(path.c_str());
}
