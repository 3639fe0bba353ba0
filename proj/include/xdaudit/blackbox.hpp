#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xdaudit/dataset.hpp"
#include "xdaudit/linalg.hpp"

namespace xdaudit::blackbox {

enum class ModelKind { LR, MLP };

std::string model_kind_name(ModelKind k);

// Which classifier to build and which dataset columns it sees. Excluding a
// column from feature_names is how the A-excluded / C-excluded variants are
// expressed: the model never reads that column at all.
struct ModelSpec {
  ModelKind kind = ModelKind::LR;
  std::vector<std::string> feature_names;
  std::vector<std::size_t> hidden_dims = {50, 100, 200};
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 128;  // 0 = full batch

  void validate() const;
};

// Weights stored input-major (in x out) so the forward product runs the
// vectorizing kernel directly.
struct Layer {
  Matrix w;
  std::vector<double> b;
};

// Per-feature affine standardization fitted on training data. Binary
// features get the identity transform (mean 0, sd 1).
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;

  Matrix apply(const Matrix& x_raw) const;
};

class TrainedModel {
 public:
  TrainedModel(ModelSpec spec, Standardizer scaler, std::vector<Layer> layers,
               std::vector<double> training_log);

  const ModelSpec& spec() const { return spec_; }
  const Standardizer& scaler() const { return scaler_; }
  const std::vector<Layer>& layers() const { return layers_; }
  const std::vector<double>& training_log() const { return training_log_; }
  std::size_t feature_index(const std::string& name) const;

  // Rows are in model-feature order, raw (unstandardized) units.
  std::vector<double> predict_proba(const Matrix& x_raw) const;
  std::vector<int> predict_class(const Matrix& x_raw, double threshold = 0.5) const;

  // Convenience overloads that pull the model's features out of a dataset.
  std::vector<double> predict_proba(const TabularDataset& ds) const;
  std::vector<int> predict_class(const TabularDataset& ds, double threshold = 0.5) const;

  // Extracts the model's feature columns (raw values) from a dataset.
  Matrix feature_matrix(const TabularDataset& ds) const;

  void save(const std::string& path) const;
  static TrainedModel load(const std::string& path);

 private:
  ModelSpec spec_;
  Standardizer scaler_;
  std::vector<Layer> layers_;
  std::vector<double> training_log_;
};

// Adam minimization of binary cross-entropy with coupled L2 weight decay.
// Deterministic given (spec, cfg, data). Throws NumericError carrying the
// epoch index if the loss goes non-finite.
TrainedModel train(const ModelSpec& spec, const TabularDataset& train_ds,
                   const TrainConfig& cfg);

// Mean agreement of predict_class with the labels over one group's rows.
double group_accuracy(const TrainedModel& model, const TabularDataset& ds, int group);

// Compares analytic BCE gradients against central finite differences
// (step 1e-5) over every parameter of a freshly initialized model; returns
// the max relative error. Batch must have at most 8 rows.
double gradient_check(const ModelSpec& spec, const Matrix& x_raw,
                      const std::vector<int>& y);

}  // namespace xdaudit::blackbox
