#include "tabbench/efficacy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tabbench/error.hpp"
#include "tabbench/random.hpp"

namespace tabbench {

namespace {

std::size_t target_of(const TableSchema& s) {
  if (!s.target_index) fail(ErrorCode::TaskMismatch, "schema has no target column");
  return *s.target_index;
}

void check_task(const Learner& learner, const TableSchema& s) {
  const std::size_t t = target_of(s);
  if (s.task == Task::classification && !s[t].is_categorical())
    fail(ErrorCode::TaskMismatch, "classification target must be categorical");
  if (s.task == Task::regression && !s[t].is_continuous())
    fail(ErrorCode::TaskMismatch, "regression target must be continuous");
  if (s.task == Task::none) fail(ErrorCode::TaskMismatch, "schema declares no task");
  if (learner.kind == LearnerKind::logistic_regression && s.task != Task::classification)
    fail(ErrorCode::TaskMismatch, "logistic_regression needs a classification task");
  if (learner.kind == LearnerKind::linear_regression && s.task != Task::regression)
    fail(ErrorCode::TaskMismatch, "linear_regression needs a regression task");
}

Eigen::MatrixXd with_bias(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out << x, Eigen::VectorXd::Ones(x.rows());
  return out;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    p.row(r).array() -= p.row(r).maxCoeff();
    p.row(r) = p.row(r).array().exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

double mean_sq_norm(const Eigen::MatrixXd& x) { return x.rowwise().squaredNorm().mean(); }

// ---- forest -----------------------------------------------------------------

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  const std::vector<std::size_t>& labels;  // classification
  const Eigen::VectorXd& y;                // regression
  bool classification;
  std::size_t classes;
  std::size_t max_depth;
  std::size_t mtry;
  std::mt19937_64& rng;
  Tree tree;

  double impurity(const Eigen::VectorXd& stats, double n) const {
    if (n <= 0.0) return 0.0;
    if (classification) {
      double g = 1.0;
      for (Eigen::Index c = 0; c < stats.size(); ++c) g -= (stats(c) / n) * (stats(c) / n);
      return g * n;
    }
    // stats = (sum, sum of squares); returns the total squared deviation.
    return stats(1) - stats(0) * stats(0) / n;
  }

  Eigen::VectorXd stats_of(std::size_t i) const {
    if (classification) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes));
      s(static_cast<Eigen::Index>(labels[i])) = 1.0;
      return s;
    }
    const double v = y(static_cast<Eigen::Index>(i));
    return Eigen::Vector2d(v, v * v);
  }

  std::size_t leaf(const Eigen::VectorXd& total, double n) {
    TreeNode node;
    node.value = classification ? Eigen::VectorXd(total / n) : Eigen::VectorXd::Constant(1, total(0) / n);
    tree.nodes.push_back(std::move(node));
    return tree.nodes.size() - 1;
  }

  std::size_t build(std::vector<std::size_t> idx, std::size_t depth) {
    const double n = static_cast<double>(idx.size());
    Eigen::VectorXd total = stats_of(idx.front());
    for (std::size_t i = 1; i < idx.size(); ++i) total += stats_of(idx[i]);
    const double parent = impurity(total, n);
    if (depth >= max_depth || idx.size() < 2 || parent <= 1e-12) return leaf(total, n);

    std::vector<std::size_t> features(static_cast<std::size_t>(x.cols()));
    std::iota(features.begin(), features.end(), 0);
    for (std::size_t i = 0; i < mtry && i < features.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, features.size() - 1);
      std::swap(features[i], features[pick(rng)]);
    }
    features.resize(std::min(mtry, features.size()));

    double best = parent - 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted = idx;
    for (std::size_t f : features) {
      const auto fi = static_cast<Eigen::Index>(f);
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return x(static_cast<Eigen::Index>(a), fi) < x(static_cast<Eigen::Index>(b), fi);
      });
      Eigen::VectorXd left = Eigen::VectorXd::Zero(total.size());
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left += stats_of(sorted[i]);
        const double a = x(static_cast<Eigen::Index>(sorted[i]), fi);
        const double b = x(static_cast<Eigen::Index>(sorted[i + 1]), fi);
        if (a == b) continue;
        const double nl = static_cast<double>(i + 1);
        const double score = impurity(left, nl) + impurity(total - left, n - nl);
        if (score < best) {
          best = score;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (a + b);
        }
      }
    }
    if (best_feature < 0) return leaf(total, n);

    std::vector<std::size_t> li;
    std::vector<std::size_t> ri;
    for (std::size_t i : idx)
      (x(static_cast<Eigen::Index>(i), best_feature) <= best_threshold ? li : ri).push_back(i);
    const std::size_t self = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes[self].feature = best_feature;
    tree.nodes[self].threshold = best_threshold;
    const std::size_t l = build(std::move(li), depth + 1);
    const std::size_t r = build(std::move(ri), depth + 1);
    tree.nodes[self].left = l;
    tree.nodes[self].right = r;
    return self;
  }
};

const Eigen::VectorXd& tree_predict(const Tree& tree, const Eigen::MatrixXd& x, Eigen::Index row) {
  std::size_t n = 0;
  while (tree.nodes[n].feature >= 0) {
    const auto& node = tree.nodes[n];
    n = x(row, node.feature) <= node.threshold ? node.left : node.right;
  }
  return tree.nodes[n].value;
}

// Indices of the k nearest distinct locations; ties go to the earlier location.
std::vector<Eigen::Index> nearest(const Eigen::MatrixXd& locations, const Eigen::MatrixXd& x, Eigen::Index row,
                                  std::size_t k) {
  const Eigen::VectorXd d = (locations.rowwise() - x.row(row)).rowwise().squaredNorm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d.size()));
  std::iota(order.begin(), order.end(), 0);
  const auto take = std::min<std::size_t>(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return d(a) < d(b) || (d(a) == d(b) && a < b); });
  order.resize(take);
  return order;
}

// Average ranks, 1-based, ties share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::logistic_regression: return "logistic_regression";
    case LearnerKind::linear_regression: return "linear_regression";
    case LearnerKind::random_forest_lite: return "random_forest_lite";
    case LearnerKind::knn: return "knn";
  }
  return "knn";
}

LearnerKind learner_kind_from_string(const std::string& s) {
  if (s == "logistic_regression") return LearnerKind::logistic_regression;
  if (s == "linear_regression") return LearnerKind::linear_regression;
  if (s == "random_forest_lite") return LearnerKind::random_forest_lite;
  if (s == "knn") return LearnerKind::knn;
  fail(ErrorCode::InvalidArgument, "unknown learner '" + s + "'");
}

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::trtr: return "trtr";
    case Protocol::tstr: return "tstr";
    case Protocol::augmentation: return "augmentation";
  }
  return "trtr";
}

std::vector<Learner> default_learners(Task task) {
  const auto linear = task == Task::regression ? LearnerKind::linear_regression : LearnerKind::logistic_regression;
  return {Learner{linear}, Learner{LearnerKind::random_forest_lite}, Learner{LearnerKind::knn}};
}

Eigen::MatrixXd feature_matrix(const Table& t) {
  std::size_t width = 0;
  for (std::size_t c = 0; c < t.column_count(); ++c)
    if (c != t.schema.target_index) width += t.schema[c].encoded_width();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.row_count()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    Eigen::Index off = 0;
    for (std::size_t c = 0; c < t.column_count(); ++c) {
      if (c == t.schema.target_index) continue;
      const auto& col = t.schema[c];
      const auto row = static_cast<Eigen::Index>(r);
      if (col.is_categorical()) {
        x(row, off + static_cast<Eigen::Index>(std::get<Category>(t.rows[r][c]).index)) = 1.0;
      } else {
        x(row, off) = scale_value(col.continuous(), std::get<double>(t.rows[r][c]));
      }
      off += static_cast<Eigen::Index>(col.encoded_width());
    }
  }
  return x;
}

// ---- prediction -------------------------------------------------------------

Eigen::MatrixXd FittedModel::predict_proba(const Eigen::MatrixXd& x) const {
  if (task != Task::classification) fail(ErrorCode::TaskMismatch, "model is not a classifier");
  const auto k = static_cast<Eigen::Index>(classes);
  switch (kind) {
    case LearnerKind::logistic_regression: return softmax_rows(with_bias(x) * weights);
    case LearnerKind::random_forest_lite: {
      Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), k);
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (const auto& tree : forest) p.row(r) += tree_predict(tree, x, r).transpose();
        p.row(r) /= static_cast<double>(forest.size());
      }
      return p;
    }
    case LearnerKind::knn: {
      Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), k);
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (auto i : nearest(locations, x, r, neighbors)) p.row(r) += location_stats.row(i);
        p.row(r) /= p.row(r).sum();
      }
      return p;
    }
    case LearnerKind::linear_regression: break;
  }
  fail(ErrorCode::TaskMismatch, "learner does not produce class probabilities");
}

std::vector<std::size_t> FittedModel::predict_class(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd p = predict_proba(x);
  std::vector<std::size_t> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.cols(); ++c)
      if (p(r, c) > p(r, best)) best = c;
    out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
  }
  return out;
}

Eigen::VectorXd FittedModel::predict_value(const Eigen::MatrixXd& x) const {
  if (task != Task::regression) fail(ErrorCode::TaskMismatch, "model is not a regressor");
  Eigen::VectorXd out(x.rows());
  switch (kind) {
    case LearnerKind::linear_regression:
      out = ((with_bias(x) * weights).col(0).array() * y_scale + y_mean).matrix();
      return out;
    case LearnerKind::random_forest_lite:
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double s = 0.0;
        for (const auto& tree : forest) s += tree_predict(tree, x, r)(0);
        out(r) = s / static_cast<double>(forest.size());
      }
      return out;
    case LearnerKind::knn:
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double count = 0.0;
        double sum = 0.0;
        for (auto i : nearest(locations, x, r, neighbors)) {
          count += location_stats(i, 0);
          sum += location_stats(i, 1);
        }
        out(r) = sum / count;
      }
      return out;
    case LearnerKind::logistic_regression: break;
  }
  fail(ErrorCode::TaskMismatch, "learner does not produce numeric predictions");
}

// ---- training ---------------------------------------------------------------

FittedModel train_learner(const Learner& learner, const Table& train, std::uint64_t seed) {
  check_task(learner, train.schema);
  if (train.rows.empty()) fail(ErrorCode::EmptyTable, "training table is empty");
  const std::size_t t = target_of(train.schema);
  const Eigen::MatrixXd x = feature_matrix(train);
  const auto n = x.rows();

  FittedModel model;
  model.kind = learner.kind;
  model.task = train.schema.task;
  model.neighbors = learner.neighbors;

  std::vector<std::size_t> labels;
  Eigen::VectorXd y;
  if (model.task == Task::classification) {
    labels = train.category_column(t);
    model.classes = train.schema[t].categorical().categories.size();
    const auto first = labels.front();
    if (std::all_of(labels.begin(), labels.end(), [&](std::size_t l) { return l == first; }))
      fail(ErrorCode::SingleClassTrainingSet, "training set contains a single class");
  } else {
    const auto v = train.numeric_column(t);
    y = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  switch (learner.kind) {
    case LearnerKind::logistic_regression: {
      const Eigen::MatrixXd xb = with_bias(x);
      const auto k = static_cast<Eigen::Index>(model.classes);
      Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, k);
      for (Eigen::Index r = 0; r < n; ++r) onehot(r, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(r)])) = 1.0;
      model.weights = Eigen::MatrixXd::Zero(xb.cols(), k);
      const double lr = 2.0 / mean_sq_norm(xb);
      for (; model.iterations < learner.max_iterations; ++model.iterations) {
        const Eigen::MatrixXd grad = xb.transpose() * (softmax_rows(xb * model.weights) - onehot) / static_cast<double>(n);
        if (grad.norm() < learner.gradient_tolerance) break;
        model.weights -= lr * grad;
      }
      break;
    }
    case LearnerKind::linear_regression: {
      const Eigen::MatrixXd xb = with_bias(x);
      model.y_mean = y.mean();
      const double sd = std::sqrt((y.array() - model.y_mean).square().mean());
      model.y_scale = sd > 0.0 ? sd : 1.0;
      const Eigen::VectorXd ys = (y.array() - model.y_mean) / model.y_scale;
      model.weights = Eigen::MatrixXd::Zero(xb.cols(), 1);
      const double lr = 1.0 / mean_sq_norm(xb);
      for (; model.iterations < learner.max_iterations; ++model.iterations) {
        const Eigen::VectorXd grad = xb.transpose() * (xb * model.weights.col(0) - ys) / static_cast<double>(n);
        if (grad.norm() < learner.gradient_tolerance) break;
        model.weights.col(0) -= lr * grad;
      }
      break;
    }
    case LearnerKind::random_forest_lite: {
      std::mt19937_64 rng(derive_seed(seed, 0x7265u));
      const auto d = static_cast<std::size_t>(x.cols());
      const std::size_t mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
      std::uniform_int_distribution<std::size_t> draw(0, static_cast<std::size_t>(n) - 1);
      for (std::size_t tr = 0; tr < learner.trees; ++tr) {
        std::vector<std::size_t> sample(static_cast<std::size_t>(n));
        for (auto& s : sample) s = draw(rng);
        TreeBuilder builder{x, labels, y, model.task == Task::classification, model.classes, learner.max_depth,
                            mtry, rng, {}};
        builder.build(std::move(sample), 0);
        model.forest.push_back(std::move(builder.tree));
      }
      break;
    }
    case LearnerKind::knn: {
      if (learner.neighbors < 1) fail(ErrorCode::InvalidArgument, "knn needs at least one neighbor");
      // Collapse duplicate feature vectors into one location carrying counts, so
      // neighbor selection ignores multiplicity while votes keep it.
      std::map<std::vector<double>, Eigen::Index> seen;
      std::vector<Eigen::Index> owner(static_cast<std::size_t>(n));
      for (Eigen::Index r = 0; r < n; ++r) {
        std::vector<double> key(static_cast<std::size_t>(x.cols()));
        for (Eigen::Index c = 0; c < x.cols(); ++c) key[static_cast<std::size_t>(c)] = x(r, c);
        auto [it, inserted] = seen.try_emplace(std::move(key), static_cast<Eigen::Index>(seen.size()));
        owner[static_cast<std::size_t>(r)] = it->second;
      }
      const auto m = static_cast<Eigen::Index>(seen.size());
      model.locations.resize(m, x.cols());
      for (const auto& [key, i] : seen)
        for (Eigen::Index c = 0; c < x.cols(); ++c) model.locations(i, c) = key[static_cast<std::size_t>(c)];
      const bool cls = model.task == Task::classification;
      model.location_stats = Eigen::MatrixXd::Zero(m, cls ? static_cast<Eigen::Index>(model.classes) : 2);
      for (Eigen::Index r = 0; r < n; ++r) {
        const auto i = owner[static_cast<std::size_t>(r)];
        if (cls) {
          model.location_stats(i, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(r)])) += 1.0;
        } else {
          model.location_stats(i, 0) += 1.0;
          model.location_stats(i, 1) += y(r);
        }
      }
      break;
    }
  }
  return model;
}

// ---- metrics ----------------------------------------------------------------

MetricMap classification_metrics(std::span<const std::size_t> truth, const Eigen::MatrixXd& proba,
                                 const std::vector<std::string>& class_names) {
  if (truth.empty()) fail(ErrorCode::EmptyTest, "test set is empty");
  if (static_cast<Eigen::Index>(truth.size()) != proba.rows())
    fail(ErrorCode::DimensionMismatch, "truth and score rows differ");
  const auto k = static_cast<std::size_t>(proba.cols());
  std::vector<double> support(k, 0.0);
  std::vector<double> predicted(k, 0.0);
  std::vector<double> hits(k, 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= k) fail(ErrorCode::InvalidArgument, "label outside the class range");
    Eigen::Index best = 0;
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index c = 1; c < proba.cols(); ++c)
      if (proba(r, c) > proba(r, best)) best = c;
    const auto p = static_cast<std::size_t>(best);
    support[truth[i]] += 1.0;
    predicted[p] += 1.0;
    if (p == truth[i]) hits[p] += 1.0;
  }

  std::vector<std::size_t> present;
  for (std::size_t c = 0; c < k; ++c) {
    if (support[c] > 0.0) {
      present.push_back(c);
    } else {
      const std::string name = c < class_names.size() ? class_names[c] : std::to_string(c);
      warn("class '" + name + "' is absent from the test set; excluded from macro averages");
    }
  }

  double recall_sum = 0.0;
  double precision_sum = 0.0;
  double f1_sum = 0.0;
  double log_gmean = 0.0;
  bool zero_recall = false;
  for (std::size_t c : present) {
    const double rec = hits[c] / support[c];
    const double prec = predicted[c] > 0.0 ? hits[c] / predicted[c] : 0.0;
    recall_sum += rec;
    precision_sum += prec;
    f1_sum += (prec + rec) > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    if (rec == 0.0) zero_recall = true;
    else log_gmean += std::log(rec);
  }
  const double np = static_cast<double>(present.size());
  MetricMap out;
  out["balanced_accuracy"] = recall_sum / np;
  out["recall"] = recall_sum / np;
  out["precision"] = precision_sum / np;
  out["f1"] = f1_sum / np;
  out["g_mean"] = zero_recall ? 0.0 : std::exp(log_gmean / np);

  if (present.size() < 2) {
    warn("only one class present in the test set; auc is not defined");
    return out;
  }
  double auc_sum = 0.0;
  for (std::size_t c : present) {
    std::vector<double> scores(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i)
      scores[i] = proba(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    const auto ranks = average_ranks(scores);
    double pos_rank = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (truth[i] == c) pos_rank += ranks[i];
    const double pos = support[c];
    const double neg = static_cast<double>(truth.size()) - pos;
    auc_sum += (pos_rank - pos * (pos + 1.0) / 2.0) / (pos * neg);
  }
  out["auc"] = auc_sum / np;
  return out;
}

MetricMap regression_metrics(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.empty()) fail(ErrorCode::EmptyTest, "test set is empty");
  if (truth.size() != predicted.size()) fail(ErrorCode::DimensionMismatch, "truth and predictions differ in length");
  const double n = static_cast<double>(truth.size());
  double mean = 0.0;
  for (double v : truth) mean += v;
  mean /= n;
  double abs_err = 0.0;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = truth[i] - predicted[i];
    abs_err += std::abs(e);
    ss_res += e * e;
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  MetricMap out;
  out["mae"] = abs_err / n;
  out["mse"] = ss_res / n;
  if (ss_tot > 0.0) {
    out["r2"] = 1.0 - ss_res / ss_tot;
  } else {
    warn("test target is constant; r2 reported as 0");
    out["r2"] = 0.0;
  }
  return out;
}

MetricMap evaluate_classification(const FittedModel& model, const Table& test) {
  if (test.rows.empty()) fail(ErrorCode::EmptyTest, "test set is empty");
  const std::size_t t = target_of(test.schema);
  if (!test.schema[t].is_categorical()) fail(ErrorCode::TaskMismatch, "test target is not categorical");
  return classification_metrics(test.category_column(t), model.predict_proba(feature_matrix(test)),
                                test.schema[t].categorical().categories);
}

MetricMap evaluate_regression(const FittedModel& model, const Table& test) {
  if (test.rows.empty()) fail(ErrorCode::EmptyTest, "test set is empty");
  const std::size_t t = target_of(test.schema);
  if (!test.schema[t].is_continuous()) fail(ErrorCode::TaskMismatch, "test target is not continuous");
  const Eigen::VectorXd pred = model.predict_value(feature_matrix(test));
  return regression_metrics(test.numeric_column(t), std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())));
}

bool metric_lower_better(const std::string& metric) { return metric == "mae" || metric == "mse"; }

// ---- protocols --------------------------------------------------------------

EfficacyReport evaluate_learner(const Learner& learner, Protocol protocol, const Table& train, const Table& test,
                                std::uint64_t seed) {
  const FittedModel model = train_learner(learner, train, seed);
  EfficacyReport report;
  report.protocol = protocol;
  report.learner = learner.kind;
  report.seed = seed;
  report.scores = model.task == Task::classification ? evaluate_classification(model, test)
                                                     : evaluate_regression(model, test);
  return report;
}

std::vector<EfficacyReport> run_tstr(const Table& real_train, const Table& synth_train, const Table& real_test,
                                     const std::vector<Learner>& learners, std::uint64_t seed) {
  std::vector<EfficacyReport> out;
  for (const auto& l : learners) {
    out.push_back(evaluate_learner(l, Protocol::trtr, real_train, real_test, seed));
    out.push_back(evaluate_learner(l, Protocol::tstr, synth_train, real_test, seed));
  }
  return out;
}

std::vector<EfficacyReport> run_augmentation(const Table& real_train, const Table& synth, const Table& real_test,
                                             const std::vector<Learner>& learners, std::uint64_t seed) {
  const Table combined = concat(real_train, synth);
  std::vector<EfficacyReport> out;
  for (const auto& l : learners) {
    out.push_back(evaluate_learner(l, Protocol::trtr, real_train, real_test, seed));
    out.push_back(evaluate_learner(l, Protocol::augmentation, combined, real_test, seed));
  }
  return out;
}

EfficacySuite run_efficacy(const Table& real_train, const Table& synth, const Table& real_test,
                           const std::vector<Learner>& learners, std::uint64_t seed) {
  const Table combined = concat(real_train, synth);
  EfficacySuite suite;
  auto attempt = [&](const Learner& l, Protocol p, const Table& train, std::vector<EfficacyReport>& sink) {
    try {
      sink.push_back(evaluate_learner(l, p, train, real_test, seed));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingleClassTrainingSet && e.code() != ErrorCode::EmptyTable) throw;
      warn(to_string(l.kind) + " skipped for " + to_string(p) + ": " + e.what());
    }
  };
  for (const auto& l : learners) {
    attempt(l, Protocol::trtr, real_train, suite.trtr);
    attempt(l, Protocol::tstr, synth, suite.tstr);
    attempt(l, Protocol::augmentation, combined, suite.augmentation);
  }
  return suite;
}

}  // namespace tabbench
