#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xdaudit/dataset.hpp"

namespace xdaudit::dgp {

enum class Objective { SampleSize, CovariateShift, ConceptShift, OmittedVariable };

std::string objective_name(Objective o);
Objective objective_from_name(const std::string& name);

// Full parameterization of one synthetic data-generating process.
//
// The population has a binary sensitive attribute A ~ Bernoulli(0.5), an
// independent covariate C ~ N(0,1), a mediator
//   L = N(0, noise_sd_L) + coef_L_on_A * A + coef_L_on_C * C,
// and a binary outcome Y ~ Bernoulli(step(i)) where the index i depends on
// the objective:
//   SampleSize / CovariateShift: i = cC*C + cL*L + c0,   outcome_coeffs = {cC, cL, c0}
//   ConceptShift:                i = cC*C + cL*L + cAL*A*L + beta*(1-A)*L + c0,
//                                outcome_coeffs = {cC, cL, cAL, c0}
//   OmittedVariable:             i = alpha*C + cL*L + c0, outcome_coeffs = {cL, c0}
// and step(i) = prob_low if i < 0, else prob_high.
struct DataGenSpec {
  Objective objective = Objective::SampleSize;
  std::size_t n = 20000;
  double coef_L_on_A = 0.7;
  double coef_L_on_C = 0.3;
  double noise_sd_L = 0.5;
  std::vector<double> outcome_coeffs;
  double beta = 0.0;   // concept-shift strength, ConceptShift only
  double alpha = 0.0;  // direct effect of C, OmittedVariable only
  double prob_low = 0.1;
  double prob_high = 0.9;
  std::uint64_t seed = 0;

  // Default parameterization for one objective. For ConceptShift beta and
  // for OmittedVariable alpha must still be set by the caller.
  static DataGenSpec defaults(Objective o, std::uint64_t seed = 0);

  // Throws ConfigError naming the offending field.
  void validate() const;

  std::map<std::string, std::string> to_metadata() const;
};

// Step outcome probability: prob_low if i < 0, else prob_high. The same
// zero threshold is used for every objective.
double step_outcome_prob(double i, const DataGenSpec& spec);

// Draws a full population. Columns ordered [A, C, L]; sensitive = A;
// one RNG stream per variable, all derived from spec.seed.
TabularDataset sample_population(const DataGenSpec& spec);

// Uniform random subsample whose disadvantaged (A=0) fraction equals
// p_disadv within one row, keeping the total as large as the group counts
// permit. Sampling is uniform within each group, so conditional
// distributions are unchanged.
TabularDataset apply_proportion_filter(const TabularDataset& ds, double p_disadv,
                                       std::uint64_t seed);

// Generalization backing the filter: fixes `group`'s share to any value in
// (0, 1), again maximizing the total.
TabularDataset subsample_group_share(const TabularDataset& ds, int group,
                                     double share, std::uint64_t seed);

// Covariate shift: removes every A=0 row whose L is below the empirical
// (1 - overlap) quantile of L | A=0. overlap = 1.0 returns the dataset
// unchanged with t = -infinity.
std::pair<TabularDataset, double> apply_covariate_shift(const TabularDataset& ds,
                                                        double overlap);

// Disjoint uniform random split; union equals the input. Rows keep their
// original relative order within each half.
std::pair<TabularDataset, TabularDataset> split_train_test(const TabularDataset& ds,
                                                           double train_fraction,
                                                           std::uint64_t seed);

struct GroupStats {
  int group;
  std::size_t count;
  std::vector<std::string> column_names;  // continuous columns only
  std::vector<double> means;
  std::vector<double> sds;
  double p_y1;
};

std::vector<GroupStats> summary_stats(const TabularDataset& ds);

}  // namespace xdaudit::dgp
