#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tabbench/efficacy.hpp"
#include "tabbench/error.hpp"
#include "tabbench/generators.hpp"
#include "tabbench/toy_data.hpp"

using namespace tabbench;

namespace {

Table blobs(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.3);
  TableSchema s;
  s.columns = {{"a", Continuous{-5.0, 5.0}}, {"b", Continuous{-5.0, 5.0}}, {"y", Categorical{{"left", "right"}}}};
  s.target_index = 2;
  s.task = Task::classification;
  Table t{s, {}};
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool right = i % 2 == 1;
    t.rows.push_back({(right ? 2.0 : -2.0) + n(rng), n(rng), Category{right ? 1u : 0u}});
  }
  return t;
}

Table line(std::size_t rows, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::normal_distribution<double> n(0.0, noise > 0.0 ? noise : 1.0);
  TableSchema s;
  s.columns = {{"x", Continuous{0.0, 10.0}}, {"y", Continuous{-100.0, 100.0}}};
  s.target_index = 1;
  s.task = Task::regression;
  Table t{s, {}};
  for (std::size_t i = 0; i < rows; ++i) {
    const double x = u(rng);
    t.rows.push_back({x, 2.0 * x + 1.0 + (noise > 0.0 ? n(rng) : 0.0)});
  }
  return t;
}

Learner make(LearnerKind kind) {
  Learner l;
  l.kind = kind;
  return l;
}

}  // namespace

TEST_CASE("logistic regression separates linearly separable blobs") {
  const Table t = blobs(50, 1);
  const auto model = train_learner(make(LearnerKind::logistic_regression), t, 3);
  const auto scores = evaluate_classification(model, t);
  CHECK(scores.at("balanced_accuracy") == 1.0);
}

TEST_CASE("linear regression recovers an exact line") {
  const Table t = line(200, 0.0, 2);
  const auto model = train_learner(make(LearnerKind::linear_regression), t, 1);
  Eigen::MatrixXd probe(2, 1);
  probe << 0.0, 1.0;  // scaled x = 0 and 10
  const auto y = model.predict_value(probe);
  CHECK((y(1) - y(0)) / 10.0 == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("learners are deterministic and respect the task") {
  const Table t = make_toy_table(300, 4);
  for (auto kind : {LearnerKind::logistic_regression, LearnerKind::random_forest_lite, LearnerKind::knn}) {
    CAPTURE(to_string(kind));
    const auto a = evaluate_learner(make(kind), Protocol::trtr, t, t, 9);
    const auto b = evaluate_learner(make(kind), Protocol::trtr, t, t, 9);
    CHECK(a == b);
    for (const auto& [name, value] : a.scores) {
      CHECK(value >= 0.0);
      CHECK(value <= 1.0);
    }
  }
  CHECK_THROWS_AS(train_learner(make(LearnerKind::linear_regression), t, 1), Error);
  CHECK_THROWS_AS(train_learner(make(LearnerKind::logistic_regression), line(20, 0.1, 1), 1), Error);
  Table one_class = t;
  for (auto& row : one_class.rows) row[3] = Category{0};
  CHECK_THROWS_AS(train_learner(make(LearnerKind::knn), one_class, 1), Error);
}

TEST_CASE("regression learners run on a noisy line") {
  const Table t = line(300, 0.5, 5);
  for (const auto& l : default_learners(Task::regression)) {
    const auto r = evaluate_learner(l, Protocol::trtr, t, t, 2);
    CHECK(r.scores.at("r2") > 0.8);
  }
}

TEST_CASE("classification metric examples") {
  const std::vector<std::size_t> truth{0, 0, 1, 1, 1};
  Eigen::MatrixXd perfect(5, 2);
  perfect << 0.9, 0.1, 0.8, 0.2, 0.3, 0.7, 0.1, 0.9, 0.4, 0.6;
  for (const auto& [name, value] : classification_metrics(truth, perfect)) CHECK(value == 1.0);

  std::vector<std::size_t> half(100);
  for (std::size_t i = 50; i < 100; ++i) half[i] = 1;
  Eigen::MatrixXd all_zero(100, 2);
  all_zero.col(0).setConstant(0.9);
  all_zero.col(1).setConstant(0.1);
  const auto m = classification_metrics(half, all_zero);
  CHECK(m.at("balanced_accuracy") == 0.5);
  CHECK(m.at("g_mean") == 0.0);
}

TEST_CASE("AUC of a random scorer and under negated scores") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::size_t> truth(2000);
  Eigen::MatrixXd scores(2000, 2);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    truth[i] = i % 2;
    const double s = u(rng);
    scores(static_cast<Eigen::Index>(i), 0) = 1.0 - s;
    scores(static_cast<Eigen::Index>(i), 1) = s;
  }
  const double auc = classification_metrics(truth, scores).at("auc");
  CHECK(std::abs(auc - 0.5) <= 0.05);

  Eigen::MatrixXd informative = scores;
  for (std::size_t i = 0; i < truth.size(); ++i)
    informative(static_cast<Eigen::Index>(i), 1) += truth[i] == 1 ? 0.3 : 0.0;
  const double a1 = classification_metrics(truth, informative).at("auc");
  const double a2 = classification_metrics(truth, -informative).at("auc");
  CHECK(a1 + a2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a class absent from the test set is excluded with a warning") {
  std::vector<std::string> warnings;
  set_warning_sink([&](std::string_view w) { warnings.emplace_back(w); });
  const std::vector<std::size_t> truth{0, 0, 1, 1};
  Eigen::MatrixXd p(4, 3);
  p << 0.8, 0.1, 0.1, 0.7, 0.2, 0.1, 0.1, 0.8, 0.1, 0.2, 0.7, 0.1;
  const auto m = classification_metrics(truth, p, {"a", "b", "c"});
  set_warning_sink({});
  CHECK(m.at("recall") == 1.0);
  REQUIRE_FALSE(warnings.empty());
  CHECK(warnings[0].find("'c'") != std::string::npos);
}

TEST_CASE("regression metric examples") {
  const std::vector<double> truth{2, 4};
  const std::vector<double> pred{1, 2};
  const auto m = regression_metrics(truth, pred);
  CHECK(m.at("mae") == 1.5);
  CHECK(m.at("mse") == 2.5);
  const auto perfect = regression_metrics(truth, truth);
  CHECK(perfect.at("mae") == 0.0);
  CHECK(perfect.at("mse") == 0.0);
  CHECK(perfect.at("r2") == 1.0);
  const std::vector<double> mean{3, 3};
  CHECK(regression_metrics(truth, mean).at("r2") == 0.0);
  CHECK(metric_lower_better("mae"));
  CHECK_FALSE(metric_lower_better("auc"));
}

TEST_CASE("copied synthetic data reproduces the real-data baseline") {
  const auto [train, test] = split(make_toy_table(400, 8), 0.8, 1);
  const auto learners = default_learners(Task::classification);
  const auto tstr = run_tstr(train, train, test, learners, 5);
  for (std::size_t i = 0; i < tstr.size(); i += 2) CHECK(tstr[i].scores == tstr[i + 1].scores);
  const auto aug = run_augmentation(train, Table{train.schema, {}}, test, learners, 5);
  for (std::size_t i = 0; i < aug.size(); i += 2) CHECK(aug[i].scores == aug[i + 1].scores);
}

TEST_CASE("knn votes are invariant under duplicating the training set") {
  const auto [train, test] = split(make_toy_table(300, 2), 0.8, 3);
  const Learner knn = make(LearnerKind::knn);
  const auto base = evaluate_learner(knn, Protocol::trtr, train, test, 1);
  const auto doubled = evaluate_learner(knn, Protocol::augmentation, concat(train, train), test, 1);
  CHECK(base.scores == doubled.scores);
}

TEST_CASE("bootstrap resample stays close to the baseline") {
  const auto [train, test] = split(make_toy_table(1000, 12), 0.8, 2);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> pick(0, train.row_count() - 1);
  std::vector<std::size_t> idx(train.row_count());
  for (auto& i : idx) i = pick(rng);
  const Learner logit = make(LearnerKind::logistic_regression);
  const auto trtr = evaluate_learner(logit, Protocol::trtr, train, test, 1);
  const auto tstr = evaluate_learner(logit, Protocol::tstr, train.subset(idx), test, 1);
  CHECK(std::abs(trtr.scores.at("balanced_accuracy") - tstr.scores.at("balanced_accuracy")) <= 0.05);
}

TEST_CASE("untrained generator output does not beat real training data") {
  const auto [train, test] = split(make_toy_table(1000, 13), 0.8, 2);
  const Learner logit = make(LearnerKind::logistic_regression);
  const auto trtr = evaluate_learner(logit, Protocol::trtr, train, test, 1);
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GanConfig cfg;
    cfg.epochs = 1;
    cfg.optimizer.lr = 0.0;
    cfg.seed = seed;
    const auto g = train_gan(encode(train), cfg);
    const Table synth = sample(g, train.row_count(), seed);
    try {
      const auto tstr = evaluate_learner(logit, Protocol::tstr, synth, test, 1);
      if (tstr.scores.at("balanced_accuracy") <= trtr.scores.at("balanced_accuracy")) ++ok;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingleClassTrainingSet) throw;
      ++ok;  // nothing learnable at all
    }
  }
  CHECK(ok >= 4);
}

TEST_CASE("the shared suite computes each baseline once") {
  const auto [train, test] = split(make_toy_table(300, 14), 0.8, 4);
  const auto suite = run_efficacy(train, train, test, default_learners(Task::classification), 2);
  CHECK(suite.trtr.size() == 3);
  CHECK(suite.tstr.size() == 3);
  CHECK(suite.augmentation.size() == 3);
  const auto separate = run_tstr(train, train, test, default_learners(Task::classification), 2);
  for (std::size_t i = 0; i < suite.trtr.size(); ++i) CHECK(suite.trtr[i] == separate[2 * i]);
}
