#include "xdaudit/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xdaudit/errors.hpp"
#include "xdaudit/rng.hpp"
#include "xdaudit/stats.hpp"

namespace xdaudit::dgp {

std::string objective_name(Objective o) {
  switch (o) {
    case Objective::SampleSize: return "sample_size";
    case Objective::CovariateShift: return "covariate_shift";
    case Objective::ConceptShift: return "concept_shift";
    case Objective::OmittedVariable: return "omitted_variable";
  }
  return "unknown";
}

Objective objective_from_name(const std::string& name) {
  if (name == "sample_size" || name == "1") return Objective::SampleSize;
  if (name == "covariate_shift" || name == "2") return Objective::CovariateShift;
  if (name == "concept_shift" || name == "3") return Objective::ConceptShift;
  if (name == "omitted_variable" || name == "4") return Objective::OmittedVariable;
  throw ConfigError("unknown objective '" + name + "'");
}

DataGenSpec DataGenSpec::defaults(Objective o, std::uint64_t seed) {
  DataGenSpec s;
  s.objective = o;
  s.seed = seed;
  switch (o) {
    case Objective::SampleSize:
    case Objective::CovariateShift:
      s.outcome_coeffs = {0.5, -1.5, 0.5};
      break;
    case Objective::ConceptShift:
      s.noise_sd_L = 0.1;
      s.outcome_coeffs = {0.5, -1.0, 1.5, -0.2};
      break;
    case Objective::OmittedVariable:
      s.coef_L_on_A = 0.3;
      s.outcome_coeffs = {1.0, -0.2};
      break;
  }
  return s;
}

void DataGenSpec::validate() const {
  if (n < 10) throw ConfigError("n must be at least 10");
  if (!(prob_low > 0.0 && prob_low < 1.0)) throw ConfigError("prob_low must be in (0,1)");
  if (!(prob_high > 0.0 && prob_high < 1.0)) throw ConfigError("prob_high must be in (0,1)");
  if (!(prob_low < prob_high)) throw ConfigError("prob_low must be below prob_high");
  if (!(noise_sd_L > 0.0)) throw ConfigError("noise_sd_L must be positive");
  const std::size_t want = objective == Objective::ConceptShift   ? 4
                           : objective == Objective::OmittedVariable ? 2
                                                                     : 3;
  if (outcome_coeffs.size() != want)
    throw ConfigError("outcome_coeffs must have " + std::to_string(want) +
                      " entries for objective " + objective_name(objective));
  if (beta != 0.0 && objective != Objective::ConceptShift)
    throw ConfigError("beta is only meaningful for objective concept_shift");
  if (alpha != 0.0 && objective != Objective::OmittedVariable)
    throw ConfigError("alpha is only meaningful for objective omitted_variable");
}

std::map<std::string, std::string> DataGenSpec::to_metadata() const {
  std::map<std::string, std::string> m;
  m["objective"] = objective_name(objective);
  m["n"] = std::to_string(n);
  m["coef_L_on_A"] = format_double(coef_L_on_A);
  m["coef_L_on_C"] = format_double(coef_L_on_C);
  m["noise_sd_L"] = format_double(noise_sd_L);
  std::string coeffs;
  for (double c : outcome_coeffs) {
    if (!coeffs.empty()) coeffs += ' ';
    coeffs += format_double(c);
  }
  m["outcome_coeffs"] = coeffs;
  if (objective == Objective::ConceptShift) m["beta"] = format_double(beta);
  if (objective == Objective::OmittedVariable) m["alpha"] = format_double(alpha);
  m["prob_low"] = format_double(prob_low);
  m["prob_high"] = format_double(prob_high);
  m["seed"] = std::to_string(seed);
  m["sensitive_column"] = "A";
  return m;
}

double step_outcome_prob(double i, const DataGenSpec& spec) {
  return i < 0.0 ? spec.prob_low : spec.prob_high;
}

namespace {

double outcome_index(const DataGenSpec& s, double a, double c, double l) {
  const auto& k = s.outcome_coeffs;
  switch (s.objective) {
    case Objective::SampleSize:
    case Objective::CovariateShift:
      return k[0] * c + k[1] * l + k[2];
    case Objective::ConceptShift:
      return k[0] * c + k[1] * l + k[2] * a * l + s.beta * (1.0 - a) * l + k[3];
    case Objective::OmittedVariable:
      return s.alpha * c + k[0] * l + k[1];
  }
  return 0.0;
}

}  // namespace

TabularDataset sample_population(const DataGenSpec& spec) {
  spec.validate();
  Rng root(spec.seed);
  Rng rng_a = root.stream("A");
  Rng rng_c = root.stream("C");
  Rng rng_l = root.stream("L");
  Rng rng_y = root.stream("Y");

  const std::size_t n = spec.n;
  Matrix x(n, 3);
  std::vector<int> y(n), sensitive(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng_a.bernoulli(0.5) ? 1.0 : 0.0;
    const double c = rng_c.normal();
    const double l =
        rng_l.normal(0.0, spec.noise_sd_L) + spec.coef_L_on_A * a + spec.coef_L_on_C * c;
    x(i, 0) = a;
    x(i, 1) = c;
    x(i, 2) = l;
    const double idx = outcome_index(spec, a, c, l);
    y[i] = rng_y.bernoulli(step_outcome_prob(idx, spec)) ? 1 : 0;
    sensitive[i] = static_cast<int>(a);
  }
  std::vector<Column> columns = {{"A", ColumnKind::Binary},
                                 {"C", ColumnKind::Continuous},
                                 {"L", ColumnKind::Continuous}};
  return TabularDataset(std::move(columns), std::move(x), std::move(y),
                        std::move(sensitive), "dgp:" + objective_name(spec.objective));
}

TabularDataset subsample_group_share(const TabularDataset& ds, int group,
                                     double share, std::uint64_t seed) {
  if (!(share > 0.0 && share < 1.0))
    throw ConfigError("group share must be in (0, 1)");
  const auto gt = ds.rows_in_group(group);
  const auto go = ds.rows_in_group(1 - group);
  if (gt.empty() || go.empty())
    throw SamplingError("both groups required (counts: A=0 " +
                        std::to_string(ds.group_count(0)) + ", A=1 " +
                        std::to_string(ds.group_count(1)) + ")");

  // Largest total T with round(T*share) <= |gt| and T - round(T*share) <= |go|.
  const double nt = static_cast<double>(gt.size());
  const double no = static_cast<double>(go.size());
  const std::size_t total = static_cast<std::size_t>(
      std::min(std::floor(nt / share), std::floor(no / (1.0 - share))));
  std::size_t kt = static_cast<std::size_t>(std::llround(total * share));
  kt = std::min(kt, gt.size());
  const std::size_t ko = std::min(total - kt, go.size());
  if (kt == 0 || ko == 0)
    throw SamplingError("insufficient rows for share=" + format_double(share) +
                        " (counts: A=0 " + std::to_string(ds.group_count(0)) +
                        ", A=1 " + std::to_string(ds.group_count(1)) + ")");

  Rng rng(seed);
  Rng rng_t = rng.stream(group == 0 ? "group0" : "group1");
  Rng rng_o = rng.stream(group == 0 ? "group1" : "group0");
  std::vector<std::size_t> keep;
  for (std::size_t i : rng_t.sample_without_replacement(gt.size(), kt))
    keep.push_back(gt[i]);
  for (std::size_t i : rng_o.sample_without_replacement(go.size(), ko))
    keep.push_back(go[i]);
  std::sort(keep.begin(), keep.end());
  return ds.select_rows(keep);
}

TabularDataset apply_proportion_filter(const TabularDataset& ds, double p_disadv,
                                       std::uint64_t seed) {
  if (!(p_disadv > 0.0 && p_disadv <= 0.5))
    throw ConfigError("p_disadv must be in (0, 0.5]");
  return subsample_group_share(ds, 0, p_disadv, seed);
}

std::pair<TabularDataset, double> apply_covariate_shift(const TabularDataset& ds,
                                                        double overlap) {
  if (!(overlap > 0.0 && overlap <= 1.0))
    throw ConfigError("overlap must be in (0, 1]");
  if (overlap == 1.0)
    return {ds, -std::numeric_limits<double>::infinity()};

  const std::size_t l_col = ds.require_column("L");
  const auto g0 = ds.rows_in_group(0);
  if (g0.empty()) throw SamplingError("disadvantaged group is empty");

  std::vector<double> l_values;
  l_values.reserve(g0.size());
  for (std::size_t r : g0) l_values.push_back(ds.value(r, l_col));
  const double t = stats::quantile(std::move(l_values), 1.0 - overlap);

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (ds.sensitive()[r] == 0 && ds.value(r, l_col) < t) continue;
    keep.push_back(r);
  }
  return {ds.select_rows(keep), t};
}

std::pair<TabularDataset, TabularDataset> split_train_test(const TabularDataset& ds,
                                                           double train_fraction,
                                                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must be in (0, 1)");
  const std::size_t n = ds.n_rows();
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  Rng shuffle_rng = rng.stream("split");
  shuffle_rng.shuffle(order);

  std::vector<std::size_t> train(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> test(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {ds.select_rows(train), ds.select_rows(test)};
}

std::vector<GroupStats> summary_stats(const TabularDataset& ds) {
  std::vector<GroupStats> out;
  for (int g : {0, 1}) {
    const auto rows = ds.rows_in_group(g);
    GroupStats gs;
    gs.group = g;
    gs.count = rows.size();
    gs.p_y1 = 0.0;
    for (std::size_t r : rows) gs.p_y1 += ds.labels()[r];
    if (!rows.empty()) gs.p_y1 /= static_cast<double>(rows.size());
    for (std::size_t j = 0; j < ds.n_cols(); ++j) {
      if (ds.columns()[j].kind != ColumnKind::Continuous) continue;
      std::vector<double> v;
      v.reserve(rows.size());
      for (std::size_t r : rows) v.push_back(ds.value(r, j));
      gs.column_names.push_back(ds.columns()[j].name);
      gs.means.push_back(stats::mean(v));
      gs.sds.push_back(stats::sd_population(v));
    }
    out.push_back(std::move(gs));
  }
  return out;
}

}  // namespace xdaudit::dgp
