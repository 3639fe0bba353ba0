#include "xdaudit/lime.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "xdaudit/errors.hpp"
#include "xdaudit/rng.hpp"
#include "xdaudit/stats.hpp"

namespace xdaudit::lime {

void ExplainerConfig::validate() const {
  if (n_samples < 2) throw ConfigError("n_samples must be at least 2");
  if (kernel_width < 0.0) throw ConfigError("kernel_width must be positive or 0 (auto)");
  if (ridge_lambda < 0.0) throw ConfigError("ridge_lambda must be nonnegative");
}

double ExplainerConfig::effective_kernel_width(std::size_t d) const {
  return kernel_width > 0.0 ? kernel_width
                            : 0.75 * std::sqrt(static_cast<double>(d));
}

FeatureScaler FeatureScaler::fit(const TabularDataset& train_ds,
                                 const std::vector<std::string>& feature_names) {
  FeatureScaler scaler;
  for (const auto& name : feature_names) {
    const std::size_t col = train_ds.require_column(name);
    Entry e;
    e.name = name;
    e.kind = train_ds.columns()[col].kind;
    const auto values = train_ds.column_values(col);
    e.mean = stats::mean(values);
    e.sd = stats::sd_population(values);
    if (e.kind == ColumnKind::Binary) e.freq_one = e.mean;
    scaler.entries.push_back(std::move(e));
  }
  return scaler;
}

Matrix FeatureScaler::standardize(const Matrix& x_raw, const ExplainerConfig& cfg) const {
  Matrix out(x_raw.rows(), x_raw.cols());
  for (std::size_t i = 0; i < x_raw.rows(); ++i) {
    for (std::size_t j = 0; j < x_raw.cols(); ++j) {
      const Entry& e = entries[j];
      if (categorical(j, cfg))
        out(i, j) = x_raw(i, j);
      else if (e.sd > 0.0)
        out(i, j) = (x_raw(i, j) - e.mean) / e.sd;
      else
        out(i, j) = x_raw(i, j) - e.mean;
    }
  }
  return out;
}

std::vector<double> FeatureScaler::standardize_row(const std::vector<double>& row,
                                                   const ExplainerConfig& cfg) const {
  Matrix m(1, row.size());
  for (std::size_t j = 0; j < row.size(); ++j) m(0, j) = row[j];
  const Matrix s = standardize(m, cfg);
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = s(0, j);
  return out;
}

Matrix perturb(const std::vector<double>& instance, const FeatureScaler& scaler,
               const ExplainerConfig& cfg) {
  cfg.validate();
  if (instance.size() != scaler.size())
    throw SchemaError("instance width does not match scaler");

  const std::size_t n = cfg.n_samples;
  const std::size_t d = instance.size();
  Matrix out(n, d);
  for (std::size_t j = 0; j < d; ++j) out(0, j) = instance[j];

  Rng root(cfg.seed);
  for (std::size_t j = 0; j < d; ++j) {
    Rng col = root.stream(static_cast<std::uint64_t>(j));
    if (scaler.categorical(j, cfg)) {
      for (std::size_t i = 1; i < n; ++i)
        out(i, j) = col.bernoulli(scaler.entries[j].freq_one) ? 1.0 : 0.0;
    } else {
      const FeatureScaler::Entry& e = scaler.entries[j];
      const double center =
          cfg.center == PerturbCenter::Instance ? instance[j] : e.mean;
      for (std::size_t i = 1; i < n; ++i) out(i, j) = center + col.normal() * e.sd;
    }
  }
  return out;
}

std::vector<double> kernel_weights(const Matrix& perturbations,
                                   const std::vector<double>& instance,
                                   const FeatureScaler& scaler,
                                   const ExplainerConfig& cfg) {
  const std::size_t d = instance.size();
  const double width = cfg.effective_kernel_width(d);
  const std::vector<double> inst_std = scaler.standardize_row(instance, cfg);

  std::vector<double> weights(perturbations.rows());
  for (std::size_t i = 0; i < perturbations.rows(); ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (scaler.categorical(j, cfg)) {
        d2 += perturbations(i, j) != instance[j] ? 1.0 : 0.0;
      } else {
        const FeatureScaler::Entry& e = scaler.entries[j];
        const double sd = e.sd > 0.0 ? e.sd : 1.0;
        const double diff = (perturbations(i, j) - e.mean) / sd - inst_std[j];
        d2 += diff * diff;
      }
    }
    weights[i] = std::exp(-d2 / (width * width));
  }
  return weights;
}

std::pair<std::vector<double>, double> fit_surrogate(const Matrix& x,
                                                     const std::vector<double>& y,
                                                     const std::vector<double>& weights,
                                                     double ridge_lambda,
                                                     bool* used_fallback) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) throw ConfigError("fit_surrogate needs at least 2 rows");
  if (y.size() != n || weights.size() != n)
    throw SchemaError("target/weight length does not match rows");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("weights must be nonnegative");
    wsum += w;
  }
  if (wsum <= 0.0) throw ConfigError("weights must not all be zero");

  // Augmented system with the intercept in slot d; lambda is added to the
  // feature diagonal only.
  Matrix a(d + 1, d + 1);
  std::vector<double> rhs(d + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const double* row = x.row(i);
    for (std::size_t p = 0; p < d; ++p) {
      const double wp = w * row[p];
      for (std::size_t q = p; q < d; ++q) a(p, q) += wp * row[q];
      a(p, d) += wp;
      rhs[p] += wp * y[i];
    }
    a(d, d) += w;
    rhs[d] += w * y[i];
  }
  for (std::size_t p = 0; p < d; ++p) {
    for (std::size_t q = 0; q < p; ++q) a(p, q) = a(q, p);
    a(d, p) = a(p, d);
    a(p, p) += ridge_lambda;
  }

  std::vector<double> beta;
  bool fallback = false;
  if (!solve_symmetric(a, rhs, beta)) {
    beta = pinv_solve_symmetric(a, rhs);
    fallback = true;
  }
  if (used_fallback) *used_fallback = fallback;
  std::vector<double> coeffs(beta.begin(), beta.begin() + d);
  return {coeffs, beta[d]};
}

int agreement(const LocalExplanation& expl) {
  return expl.surrogate_class == expl.blackbox_class ? 1 : 0;
}

LocalExplanation explain(const blackbox::TrainedModel& model,
                         const std::vector<double>& instance,
                         std::size_t instance_id, const ExplainerConfig& cfg,
                         const FeatureScaler& scaler) {
  cfg.validate();
  ExplainerConfig local = cfg;
  local.seed = hash_combine(cfg.seed, instance_id);

  const Matrix raw = perturb(instance, scaler, local);
  const std::vector<double> probs = model.predict_proba(raw);
  const std::vector<double> weights = kernel_weights(raw, instance, scaler, local);

  std::vector<double> target = probs;
  if (cfg.hard_label_target)
    for (double& p : target) p = p >= 0.5 ? 1.0 : 0.0;

  const Matrix x_std = scaler.standardize(raw, local);
  bool fallback = false;
  auto [psi, intercept] =
      fit_surrogate(x_std, target, weights, cfg.ridge_lambda, &fallback);

  LocalExplanation expl;
  expl.instance_id = instance_id;
  for (const auto& e : scaler.entries) expl.feature_names.push_back(e.name);
  expl.feature_weights = psi;
  expl.intercept = intercept;
  expl.solver_fallback = fallback;

  const std::vector<double> inst_std = scaler.standardize_row(instance, local);
  double g = intercept;
  for (std::size_t j = 0; j < psi.size(); ++j) g += psi[j] * inst_std[j];
  expl.surrogate_prob_at_instance = g;
  expl.surrogate_class = g >= 0.5 ? 1 : 0;
  expl.blackbox_prob = probs[0];  // row 0 is the instance itself
  expl.blackbox_class = probs[0] >= 0.5 ? 1 : 0;
  return expl;
}

std::vector<LocalExplanation> explain_batch(const blackbox::TrainedModel& model,
                                            const TabularDataset& ds,
                                            const std::vector<std::size_t>& row_ids,
                                            const ExplainerConfig& cfg,
                                            const FeatureScaler& scaler,
                                            unsigned n_threads) {
  const Matrix all = model.feature_matrix(ds);
  std::vector<LocalExplanation> out(row_ids.size());
  std::vector<std::string> failures(row_ids.size());

  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t r = row_ids[k];
      std::vector<double> instance(all.cols());
      for (std::size_t j = 0; j < all.cols(); ++j) instance[j] = all(r, j);
      try {
        out[k] = explain(model, instance, r, cfg, scaler);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    }
  };

  if (n_threads <= 1 || row_ids.size() < 2) {
    run_range(0, row_ids.size());
  } else {
    const unsigned workers =
        std::min<unsigned>(n_threads, static_cast<unsigned>(row_ids.size()));
    std::vector<std::thread> pool;
    const std::size_t chunk = (row_ids.size() + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(begin + chunk, row_ids.size());
      pool.emplace_back([&run_range, begin, end] { run_range(begin, end); });
    }
    for (auto& th : pool) th.join();
  }

  std::size_t failed = 0;
  std::string detail;
  for (std::size_t k = 0; k < failures.size(); ++k) {
    if (failures[k].empty()) continue;
    ++failed;
    if (failed <= 5)
      detail += "\n  instance " + std::to_string(k) + ": " + failures[k];
  }
  if (failed > 0)
    throw BatchError("explain_batch: " + std::to_string(failed) + " of " +
                         std::to_string(row_ids.size()) + " instances failed" +
                         detail,
                     failed);
  return out;
}

void write_explanations_csv(const std::string& path,
                            const std::vector<LocalExplanation>& expls,
                            const std::vector<int>& groups) {
  if (expls.size() != groups.size())
    throw SchemaError("explanations/groups length mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "instance_id,group,blackbox_prob,surrogate_prob,agreement";
  if (!expls.empty())
    for (const auto& name : expls.front().feature_names) out << ",w_" << name;
  out << '\n';
  for (std::size_t k = 0; k < expls.size(); ++k) {
    const auto& e = expls[k];
    out << e.instance_id << ',' << groups[k] << ',' << format_double(e.blackbox_prob)
        << ',' << format_double(e.surrogate_prob_at_instance) << ',' << agreement(e);
    for (double w : e.feature_weights) out << ',' << format_double(w);
    out << '\n';
  }
}

}  // namespace xdaudit::lime
