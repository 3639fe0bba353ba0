#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xdaudit/blackbox.hpp"
#include "xdaudit/dataset.hpp"
#include "xdaudit/linalg.hpp"

namespace xdaudit::lime {

enum class PerturbCenter { Instance, TrainingMean };

struct ExplainerConfig {
  std::size_t n_samples = 1000;
  double kernel_width = 0.0;  // 0 = auto: 0.75 * sqrt(d)
  double ridge_lambda = 1.0;
  std::uint64_t seed = 0;
  PerturbCenter center = PerturbCenter::TrainingMean;
  bool hard_label_target = false;  // regress on class labels instead of probabilities
  // Reference-package behavior: perturb and scale binary features like
  // continuous ones instead of resampling from training frequencies.
  bool binary_as_continuous = false;

  void validate() const;
  double effective_kernel_width(std::size_t d) const;
};

// Per-feature training statistics: mean/sd for every feature plus the
// empirical frequency of value 1 for binary (categorical) ones.
struct FeatureScaler {
  struct Entry {
    std::string name;
    ColumnKind kind;
    double mean = 0.0;
    double sd = 1.0;
    double freq_one = 0.0;  // binary columns only
  };
  std::vector<Entry> entries;

  static FeatureScaler fit(const TabularDataset& train_ds,
                           const std::vector<std::string>& feature_names);

  std::size_t size() const { return entries.size(); }

  // Whether a feature takes the categorical path under this config.
  bool categorical(std::size_t j, const ExplainerConfig& cfg) const {
    return entries[j].kind == ColumnKind::Binary && !cfg.binary_as_continuous;
  }

  // Standardizes continuous features; categorical ones pass through raw.
  Matrix standardize(const Matrix& x_raw, const ExplainerConfig& cfg) const;
  std::vector<double> standardize_row(const std::vector<double>& row,
                                      const ExplainerConfig& cfg) const;
};

struct LocalExplanation {
  std::size_t instance_id = 0;
  std::vector<std::string> feature_names;
  std::vector<double> feature_weights;  // psi, in standardized feature units
  double intercept = 0.0;
  double surrogate_prob_at_instance = 0.0;
  int surrogate_class = 0;
  double blackbox_prob = 0.0;
  int blackbox_class = 0;
  bool solver_fallback = false;  // singular system solved via pseudoinverse
};

// Perturbation matrix around one instance. Row 0 is the unmodified
// instance; later rows draw continuous features as center + z * sd and
// resample binary features from their training frequency. Deterministic
// given cfg.seed.
Matrix perturb(const std::vector<double>& instance, const FeatureScaler& scaler,
               const ExplainerConfig& cfg);

// Exponential kernel on the standardized distance to the instance:
// exp(-d^2 / width^2), with 0/1 mismatch terms for binary features.
std::vector<double> kernel_weights(const Matrix& perturbations,
                                   const std::vector<double>& instance,
                                   const FeatureScaler& scaler,
                                   const ExplainerConfig& cfg);

// Weighted ridge regression of y on x with unpenalized intercept:
// (X^T W X + lambda I) beta = X^T W y. Returns (coefficients, intercept);
// `used_fallback` reports a pseudoinverse solve of a singular system.
std::pair<std::vector<double>, double> fit_surrogate(const Matrix& x,
                                                     const std::vector<double>& y,
                                                     const std::vector<double>& weights,
                                                     double ridge_lambda,
                                                     bool* used_fallback = nullptr);

// Full pipeline for one instance: perturb, query the black box, weight,
// fit the surrogate, and evaluate both models at the instance.
// Deterministic given (cfg.seed, instance_id).
LocalExplanation explain(const blackbox::TrainedModel& model,
                         const std::vector<double>& instance,
                         std::size_t instance_id, const ExplainerConfig& cfg,
                         const FeatureScaler& scaler);

// 1 iff surrogate and black box agree on the hard class.
int agreement(const LocalExplanation& expl);

// Explains the given dataset rows; the row index doubles as instance_id so
// seeds follow the instance, not its batch position. With n_threads > 1 the
// rows are explained concurrently; output order and values are identical to
// the sequential run.
std::vector<LocalExplanation> explain_batch(const blackbox::TrainedModel& model,
                                            const TabularDataset& ds,
                                            const std::vector<std::size_t>& row_ids,
                                            const ExplainerConfig& cfg,
                                            const FeatureScaler& scaler,
                                            unsigned n_threads = 1);

// CSV dump: instance_id, group, blackbox_prob, surrogate_prob, agreement,
// then one column per feature weight.
void write_explanations_csv(const std::string& path,
                            const std::vector<LocalExplanation>& expls,
                            const std::vector<int>& groups);

}  // namespace xdaudit::lime
