#include "xdaudit/blackbox.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "xdaudit/errors.hpp"
#include "xdaudit/rng.hpp"
#include "xdaudit/stats.hpp"

namespace xdaudit::blackbox {

namespace {

constexpr double kLogitClamp = 30.0;  // keeps sigmoid strictly inside (0,1)

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// BCE from the logit, in the overflow-safe max(z,0) - z*y + log1p(exp(-|z|)) form.
double bce_from_logit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

void transpose(const Matrix& a, Matrix& out) {
  out = Matrix(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
}

std::vector<std::size_t> layer_widths(const ModelSpec& spec) {
  std::vector<std::size_t> widths;
  widths.push_back(spec.feature_names.size());
  if (spec.kind == ModelKind::MLP)
    for (std::size_t h : spec.hidden_dims) widths.push_back(h);
  widths.push_back(1);
  return widths;
}

std::vector<Layer> init_layers(const ModelSpec& spec) {
  const auto widths = layer_widths(spec);
  Rng rng = Rng(spec.seed).stream("init");
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer layer;
    layer.w = Matrix(widths[l], widths[l + 1]);
    layer.b.assign(widths[l + 1], 0.0);
    if (spec.kind == ModelKind::MLP) {
      const double bound = std::sqrt(6.0 / static_cast<double>(widths[l]));
      for (double& v : layer.w.data()) v = (2.0 * rng.uniform() - 1.0) * bound;
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

// Forward pass; activations[0] is the input, later entries are post-ReLU
// hidden activations. Returns the output logits (one per row).
std::vector<double> forward(const std::vector<Layer>& layers, const Matrix& x,
                            std::vector<Matrix>& activations) {
  activations.clear();
  activations.push_back(x);
  Matrix z;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    matmul(activations.back(), layers[l].w, z);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      double* row = z.row(i);
      for (std::size_t j = 0; j < z.cols(); ++j) row[j] += layers[l].b[j];
    }
    if (l + 1 < layers.size()) {
      for (double& v : z.data()) v = v > 0.0 ? v : 0.0;
      activations.push_back(z);
    }
  }
  std::vector<double> logits(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) logits[i] = z(i, 0);
  return logits;
}

// Mean-BCE gradient via backprop. grads has the same shapes as layers.
void backward(const std::vector<Layer>& layers, const std::vector<Matrix>& activations,
              const std::vector<double>& logits, const std::vector<double>& y,
              std::vector<Layer>& grads) {
  const std::size_t n = logits.size();
  Matrix g(n, 1);
  for (std::size_t i = 0; i < n; ++i)
    g(i, 0) = (sigmoid(logits[i]) - y[i]) / static_cast<double>(n);

  Matrix wt, g_prev;
  for (std::size_t l = layers.size(); l-- > 0;) {
    matmul_at_b(activations[l], g, grads[l].w);
    for (std::size_t j = 0; j < grads[l].b.size(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.rows(); ++i) acc += g(i, j);
      grads[l].b[j] = acc;
    }
    if (l == 0) break;
    transpose(layers[l].w, wt);
    matmul(g, wt, g_prev);
    // ReLU gate on the upstream activation.
    const Matrix& act = activations[l];
    for (std::size_t i = 0; i < g_prev.rows(); ++i) {
      double* row = g_prev.row(i);
      const double* arow = act.row(i);
      for (std::size_t j = 0; j < g_prev.cols(); ++j)
        if (arow[j] <= 0.0) row[j] = 0.0;
    }
    g = g_prev;
  }
}

Standardizer fit_standardizer(const ModelSpec& spec, const TabularDataset& ds,
                              const Matrix& x_raw) {
  Standardizer s;
  s.mean.assign(spec.feature_names.size(), 0.0);
  s.sd.assign(spec.feature_names.size(), 1.0);
  for (std::size_t j = 0; j < spec.feature_names.size(); ++j) {
    const std::size_t col = ds.require_column(spec.feature_names[j]);
    if (ds.columns()[col].kind != ColumnKind::Continuous) continue;
    std::vector<double> v(x_raw.rows());
    for (std::size_t i = 0; i < x_raw.rows(); ++i) v[i] = x_raw(i, j);
    s.mean[j] = stats::mean(v);
    const double sd = stats::sd_population(v);
    s.sd[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

struct AdamState {
  std::vector<Layer> m, v;
  int t = 0;
};

void adam_step(std::vector<Layer>& layers, const std::vector<Layer>& grads,
               AdamState& state, const TrainConfig& cfg) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, state.t);
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, state.t);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto update = [&](double& theta, double grad, double& m, double& v) {
      grad += cfg.weight_decay * theta;  // coupled L2
      m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
      v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad * grad;
      theta -= cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_eps);
    };
    auto& w = layers[l].w.data();
    const auto& gw = grads[l].w.data();
    auto& mw = state.m[l].w.data();
    auto& vw = state.v[l].w.data();
    for (std::size_t k = 0; k < w.size(); ++k) update(w[k], gw[k], mw[k], vw[k]);
    for (std::size_t k = 0; k < layers[l].b.size(); ++k)
      update(layers[l].b[k], grads[l].b[k], state.m[l].b[k], state.v[l].b[k]);
  }
}

std::vector<Layer> zero_like(const std::vector<Layer>& layers) {
  std::vector<Layer> z;
  for (const auto& layer : layers) {
    Layer g;
    g.w = Matrix(layer.w.rows(), layer.w.cols());
    g.b.assign(layer.b.size(), 0.0);
    z.push_back(std::move(g));
  }
  return z;
}

}  // namespace

std::string model_kind_name(ModelKind k) {
  return k == ModelKind::LR ? "LR" : "MLP";
}

void ModelSpec::validate() const {
  if (feature_names.empty()) throw ConfigError("feature_names must be nonempty");
  if (kind == ModelKind::MLP && hidden_dims.empty())
    throw ConfigError("hidden_dims must be nonempty for an MLP");
  for (std::size_t h : hidden_dims)
    if (h == 0) throw ConfigError("hidden_dims entries must be positive");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be nonnegative");
}

Matrix Standardizer::apply(const Matrix& x_raw) const {
  Matrix out(x_raw.rows(), x_raw.cols());
  for (std::size_t i = 0; i < x_raw.rows(); ++i)
    for (std::size_t j = 0; j < x_raw.cols(); ++j)
      out(i, j) = (x_raw(i, j) - mean[j]) / sd[j];
  return out;
}

TrainedModel::TrainedModel(ModelSpec spec, Standardizer scaler,
                           std::vector<Layer> layers, std::vector<double> training_log)
    : spec_(std::move(spec)),
      scaler_(std::move(scaler)),
      layers_(std::move(layers)),
      training_log_(std::move(training_log)) {}

std::size_t TrainedModel::feature_index(const std::string& name) const {
  for (std::size_t j = 0; j < spec_.feature_names.size(); ++j)
    if (spec_.feature_names[j] == name) return j;
  throw SchemaError("model has no feature '" + name + "'");
}

Matrix TrainedModel::feature_matrix(const TabularDataset& ds) const {
  std::vector<std::size_t> idx;
  for (const auto& name : spec_.feature_names) idx.push_back(ds.require_column(name));
  Matrix x(ds.n_rows(), idx.size());
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) x(i, j) = ds.value(i, idx[j]);
  return x;
}

std::vector<double> TrainedModel::predict_proba(const Matrix& x_raw) const {
  if (x_raw.cols() != spec_.feature_names.size())
    throw SchemaError("row width does not match model feature count");
  std::vector<Matrix> acts;
  const Matrix x = scaler_.apply(x_raw);
  std::vector<double> logits = forward(layers_, x, acts);
  for (double& z : logits)
    z = sigmoid(std::clamp(z, -kLogitClamp, kLogitClamp));
  return logits;
}

std::vector<int> TrainedModel::predict_class(const Matrix& x_raw, double threshold) const {
  const auto proba = predict_proba(x_raw);
  std::vector<int> cls(proba.size());
  for (std::size_t i = 0; i < proba.size(); ++i) cls[i] = proba[i] >= threshold ? 1 : 0;
  return cls;
}

std::vector<double> TrainedModel::predict_proba(const TabularDataset& ds) const {
  return predict_proba(feature_matrix(ds));
}

std::vector<int> TrainedModel::predict_class(const TabularDataset& ds,
                                             double threshold) const {
  return predict_class(feature_matrix(ds), threshold);
}

TrainedModel train(const ModelSpec& spec, const TabularDataset& train_ds,
                   const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (train_ds.n_rows() == 0) throw SamplingError("training set is empty");

  std::vector<std::size_t> col_idx;
  for (const auto& name : spec.feature_names)
    col_idx.push_back(train_ds.require_column(name));

  const std::size_t n = train_ds.n_rows();
  const std::size_t d = col_idx.size();
  Matrix x_raw(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x_raw(i, j) = train_ds.value(i, col_idx[j]);

  const Standardizer scaler = fit_standardizer(spec, train_ds, x_raw);
  const Matrix x = scaler.apply(x_raw);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = train_ds.labels()[i];

  std::vector<Layer> layers = init_layers(spec);
  AdamState adam;
  adam.m = zero_like(layers);
  adam.v = zero_like(layers);
  std::vector<Layer> grads = zero_like(layers);

  const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng shuffle_root = Rng(spec.seed).stream("shuffle");

  std::vector<double> epoch_losses;
  std::vector<Matrix> acts;
  Matrix xb(batch, d);
  std::vector<double> yb(batch);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng epoch_rng = shuffle_root.stream(static_cast<std::uint64_t>(epoch));
    epoch_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t bn = std::min(batch, n - start);
      if (xb.rows() != bn) xb = Matrix(bn, d);
      yb.resize(bn);
      for (std::size_t i = 0; i < bn; ++i) {
        const std::size_t r = order[start + i];
        for (std::size_t j = 0; j < d; ++j) xb(i, j) = x(r, j);
        yb[i] = y[r];
      }
      const std::vector<double> logits = forward(layers, xb, acts);
      for (std::size_t i = 0; i < bn; ++i) loss_sum += bce_from_logit(logits[i], yb[i]);
      backward(layers, acts, logits, yb, grads);
      adam_step(layers, grads, adam, cfg);
    }
    const double epoch_loss = loss_sum / static_cast<double>(n);
    if (!std::isfinite(epoch_loss))
      throw NumericError("non-finite training loss", epoch);
    epoch_losses.push_back(epoch_loss);
  }
  return TrainedModel(spec, scaler, std::move(layers), std::move(epoch_losses));
}

double group_accuracy(const TrainedModel& model, const TabularDataset& ds, int group) {
  const auto rows = ds.rows_in_group(group);
  if (rows.empty())
    throw SamplingError("group " + std::to_string(group) + " has no rows");
  const auto cls = model.predict_class(ds);
  std::size_t hits = 0;
  for (std::size_t r : rows)
    if (cls[r] == ds.labels()[r]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

double gradient_check(const ModelSpec& spec, const Matrix& x_raw,
                      const std::vector<int>& y) {
  spec.validate();
  if (x_raw.rows() > 8) throw ConfigError("gradient_check batch must have at most 8 rows");
  if (x_raw.rows() != y.size()) throw SchemaError("batch rows/labels mismatch");

  std::vector<Layer> layers = init_layers(spec);
  // Nudge parameters off the origin so LR is not checked at the symmetric
  // zero point.
  Rng noise = Rng(spec.seed).stream("gradcheck");
  for (auto& layer : layers) {
    for (double& v : layer.w.data()) v += noise.normal(0.0, 0.1);
    for (double& v : layer.b) v += noise.normal(0.0, 0.1);
  }

  std::vector<double> yd(y.begin(), y.end());
  std::vector<Matrix> acts;
  std::vector<Layer> grads = zero_like(layers);
  {
    const auto logits = forward(layers, x_raw, acts);
    backward(layers, acts, logits, yd, grads);
  }

  auto loss_at = [&]() {
    std::vector<Matrix> a;
    const auto logits = forward(layers, x_raw, a);
    double acc = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i)
      acc += bce_from_logit(logits[i], yd[i]);
    return acc / static_cast<double>(logits.size());
  };

  const double h = 1e-5;
  double max_rel = 0.0;
  auto check_param = [&](double& theta, double analytic) {
    const double saved = theta;
    theta = saved + h;
    const double up = loss_at();
    theta = saved - h;
    const double down = loss_at();
    theta = saved;
    const double fd = (up - down) / (2.0 * h);
    const double rel =
        std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6});
    max_rel = std::max(max_rel, rel);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t k = 0; k < layers[l].w.data().size(); ++k)
      check_param(layers[l].w.data()[k], grads[l].w.data()[k]);
    for (std::size_t k = 0; k < layers[l].b.size(); ++k)
      check_param(layers[l].b[k], grads[l].b[k]);
  }
  return max_rel;
}

namespace {

// Whitespace-token reader that tracks byte offsets for parse errors.
class TokenReader {
 public:
  explicit TokenReader(std::string text) : text_(std::move(text)) {}

  std::string next(const char* what) {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ >= text_.size())
      throw ParseError(std::string("unexpected end of file, expected ") + what, pos_);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void expect(const std::string& token) {
    const std::size_t at = pos_;
    if (next(token.c_str()) != token)
      throw ParseError("expected token '" + token + "'", at);
  }

  double next_double(const char* what) {
    const std::size_t at = pos_;
    const std::string tok = next(what);
    try {
      return std::stod(tok);
    } catch (const std::exception&) {
      throw ParseError(std::string("bad number for ") + what, at);
    }
  }

  std::uint64_t next_u64(const char* what) {
    const std::size_t at = pos_;
    const std::string tok = next(what);
    try {
      return std::stoull(tok);
    } catch (const std::exception&) {
      throw ParseError(std::string("bad integer for ") + what, at);
    }
  }

  std::size_t offset() const { return pos_; }

 private:
  std::string text_;
  std::size_t pos_ = 0;
};

}  // namespace

void TrainedModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "xdaudit-model v1\n";
  out << "kind " << model_kind_name(spec_.kind) << '\n';
  out << "seed " << spec_.seed << '\n';
  out << "features " << spec_.feature_names.size();
  for (const auto& f : spec_.feature_names) out << ' ' << f;
  out << '\n';
  out << "hidden " << spec_.hidden_dims.size();
  for (std::size_t h : spec_.hidden_dims) out << ' ' << h;
  out << '\n';
  out << "scaler";
  for (std::size_t j = 0; j < scaler_.mean.size(); ++j)
    out << ' ' << format_double(scaler_.mean[j]) << ' ' << format_double(scaler_.sd[j]);
  out << '\n';
  out << "layers " << layers_.size() << '\n';
  for (const auto& layer : layers_) {
    out << "layer " << layer.w.rows() << ' ' << layer.w.cols() << '\n';
    for (double v : layer.w.data()) out << format_double(v) << '\n';
    for (double v : layer.b) out << format_double(v) << '\n';
  }
  out << "log " << training_log_.size() << '\n';
  for (double v : training_log_) out << format_double(v) << '\n';
  out << "end\n";
  if (!out) throw IoError("write failure on '" + path + "'");
}

TrainedModel TrainedModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  TokenReader r(ss.str());

  r.expect("xdaudit-model");
  const std::string version = r.next("version tag");
  if (version != "v1")
    throw VersionError("unsupported model file version '" + version + "'");

  ModelSpec spec;
  r.expect("kind");
  const std::string kind = r.next("model kind");
  if (kind == "LR")
    spec.kind = ModelKind::LR;
  else if (kind == "MLP")
    spec.kind = ModelKind::MLP;
  else
    throw ParseError("unknown model kind '" + kind + "'", r.offset());
  r.expect("seed");
  spec.seed = r.next_u64("seed");
  r.expect("features");
  const std::size_t n_features = r.next_u64("feature count");
  spec.feature_names.clear();
  for (std::size_t j = 0; j < n_features; ++j)
    spec.feature_names.push_back(r.next("feature name"));
  r.expect("hidden");
  const std::size_t n_hidden = r.next_u64("hidden count");
  spec.hidden_dims.clear();
  for (std::size_t j = 0; j < n_hidden; ++j)
    spec.hidden_dims.push_back(r.next_u64("hidden dim"));

  Standardizer scaler;
  r.expect("scaler");
  for (std::size_t j = 0; j < n_features; ++j) {
    scaler.mean.push_back(r.next_double("scaler mean"));
    scaler.sd.push_back(r.next_double("scaler sd"));
  }

  r.expect("layers");
  const std::size_t n_layers = r.next_u64("layer count");
  std::vector<Layer> layers;
  for (std::size_t l = 0; l < n_layers; ++l) {
    r.expect("layer");
    const std::size_t rows = r.next_u64("layer rows");
    const std::size_t cols = r.next_u64("layer cols");
    Layer layer;
    layer.w = Matrix(rows, cols);
    for (double& v : layer.w.data()) v = r.next_double("weight");
    layer.b.resize(cols);
    for (double& v : layer.b) v = r.next_double("bias");
    layers.push_back(std::move(layer));
  }

  r.expect("log");
  const std::size_t n_log = r.next_u64("log length");
  std::vector<double> log(n_log);
  for (double& v : log) v = r.next_double("loss value");
  r.expect("end");

  return TrainedModel(std::move(spec), std::move(scaler), std::move(layers),
                      std::move(log));
}

}  // namespace xdaudit::blackbox
