#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <vector>

#include "affect/metrics.hpp"
#include "affect/rng.hpp"

using namespace affect;
using data::AuVector;

namespace {

AuVector row(std::initializer_list<int> bits) {
  AuVector v{};
  int i = 0;
  for (const int b : bits) v[static_cast<std::size_t>(i++)] = static_cast<std::uint8_t>(b);
  return v;
}

// Independent confusion-matrix oracle.
struct Confusion {
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

double oracle_f1(const Confusion& c, double degenerate) {
  if (c.tp + c.fp + c.fn == 0) return degenerate;
  const double precision = c.tp + c.fp == 0 ? 0.0 : double(c.tp) / double(c.tp + c.fp);
  const double recall = c.tp + c.fn == 0 ? 0.0 : double(c.tp) / double(c.tp + c.fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

TEST_CASE("threshold boundary rules") {
  std::vector<metrics::AuProbRow> probs(1);
  probs[0].fill(0.7f);
  probs[0][0] = 0.5f;
  probs[0][1] = 0.4999f;
  const auto out = metrics::threshold_au(probs, 0.5);
  CHECK(out[0][0] == 1);  // exactly at threshold
  CHECK(out[0][1] == 0);
  for (int j = 2; j < 12; ++j) CHECK(out[0][static_cast<std::size_t>(j)] == 1);
}

TEST_CASE("binary f1 hand cases") {
  // perfect prediction
  std::vector<AuVector> labels = {row({1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0}),
                                  row({0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1})};
  auto f1 = metrics::binary_f1_per_class(labels, labels);
  for (const double v : f1) CHECK(v == doctest::Approx(1.0));

  // class 0: preds 1,0,1 labels 1,1,0 -> TP=1 FP=1 FN=1 -> F1 = 0.5
  std::vector<AuVector> preds3 = {row({1}), row({0}), row({1})};
  std::vector<AuVector> labels3 = {row({1}), row({1}), row({0})};
  f1 = metrics::binary_f1_per_class(preds3, labels3);
  CHECK(f1[0] == doctest::Approx(0.5));
  // remaining classes all-negative on both sides -> degenerate convention
  for (int j = 1; j < 12; ++j) CHECK(f1[static_cast<std::size_t>(j)] == doctest::Approx(1.0));

  // degenerate convention configurable to 0
  f1 = metrics::binary_f1_per_class(preds3, labels3, 0.0);
  for (int j = 1; j < 12; ++j) CHECK(f1[static_cast<std::size_t>(j)] == doctest::Approx(0.0));
}

TEST_CASE("au total accuracy") {
  std::vector<AuVector> a = {row({1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0}),
                             row({0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0})};
  CHECK(metrics::total_accuracy_au(a, a) == doctest::Approx(1.0));

  std::vector<AuVector> complement = a;
  for (auto& r : complement)
    for (auto& v : r) v = v ? 0 : 1;
  CHECK(metrics::total_accuracy_au(complement, a) == doctest::Approx(0.0));

  // 3 wrong of 24 -> 21/24
  std::vector<AuVector> almost = a;
  almost[0][0] ^= 1;
  almost[0][5] ^= 1;
  almost[1][11] ^= 1;
  CHECK(metrics::total_accuracy_au(almost, a) == doctest::Approx(21.0 / 24.0));

  // exact-match variant: 2 frames, both touched -> 0
  CHECK(metrics::exact_match_accuracy_au(almost, a) == doctest::Approx(0.0));
  almost[1] = a[1];
  CHECK(metrics::exact_match_accuracy_au(almost, a) == doctest::Approx(0.5));
}

TEST_CASE("expression f1 and accuracy") {
  std::vector<int> all = {0, 1, 2, 3, 4, 5, 6};
  auto [f1, acc] = metrics::expr_f1_and_accuracy(all, all);
  for (const double v : f1) CHECK(v == doctest::Approx(1.0));
  CHECK(acc == doctest::Approx(1.0));

  auto [f1b, accb] = metrics::expr_f1_and_accuracy({0, 0}, {0, 1});
  CHECK(accb == doctest::Approx(0.5));
  // class 2..6 absent from preds and labels -> degenerate 1.0
  for (int j = 2; j < 7; ++j) CHECK(f1b[static_cast<std::size_t>(j)] == doctest::Approx(1.0));

  CHECK_THROWS_AS(metrics::expr_f1_and_accuracy({7}, {0}), ContractError);
}

TEST_CASE("composite reproduces reported table arithmetic") {
  CHECK(metrics::composite_score(Task::au, 0.545, 0.879) ==
        doctest::Approx(0.712).epsilon(5e-3));
  CHECK(metrics::composite_score(Task::expression, 0.402, 0.630) ==
        doctest::Approx(0.477).epsilon(5e-3));
  CHECK(metrics::composite_score(Task::au, 0.40, 0.22) == doctest::Approx(0.31).epsilon(5e-3));
  CHECK(metrics::composite_score(Task::expression, 0.30, 0.50) ==
        doctest::Approx(0.366).epsilon(5e-3));
  CHECK(metrics::composite_score(Task::au, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(metrics::composite_score(Task::au, -0.1, 0.5), ContractError);
}

TEST_CASE("composite is monotone in both arguments") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const double f1 = rng.uniform_double(0.0, 1.0);
    const double acc = rng.uniform_double(0.0, 1.0);
    const double df = rng.uniform_double(0.0, 1.0 - f1);
    const double da = rng.uniform_double(0.0, 1.0 - acc);
    for (const Task task : {Task::au, Task::expression}) {
      CHECK(metrics::composite_score(task, f1 + df, acc) >=
            metrics::composite_score(task, f1, acc));
      CHECK(metrics::composite_score(task, f1, acc + da) >=
            metrics::composite_score(task, f1, acc));
    }
  }
}

TEST_CASE("au metrics agree with confusion-matrix oracle on random instances") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(1, 1000);
    std::vector<AuVector> preds(static_cast<std::size_t>(n)),
        labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 12; ++j) {
        preds[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            rng.bernoulli(0.3) ? 1 : 0;
        labels[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            rng.bernoulli(0.3) ? 1 : 0;
      }

    std::array<Confusion, 12> oracle{};
    long correct = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 12; ++j) {
        const bool p = preds[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const bool l = labels[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        auto& c = oracle[static_cast<std::size_t>(j)];
        if (p && l) ++c.tp;
        if (p && !l) ++c.fp;
        if (!p && l) ++c.fn;
        if (!p && !l) ++c.tn;
        if (p == l) ++correct;
      }

    const auto f1 = metrics::binary_f1_per_class(preds, labels);
    for (int j = 0; j < 12; ++j)
      CHECK(std::abs(f1[static_cast<std::size_t>(j)] -
                     oracle_f1(oracle[static_cast<std::size_t>(j)], 1.0)) < 1e-12);
    CHECK(std::abs(metrics::total_accuracy_au(preds, labels) -
                   double(correct) / double(n * 12)) < 1e-12);
  }
}

TEST_CASE("expression metrics agree with confusion-matrix oracle") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(1, 1000);
    std::vector<int> preds(static_cast<std::size_t>(n)), labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      preds[static_cast<std::size_t>(i)] = rng.uniform_int(0, 6);
      labels[static_cast<std::size_t>(i)] = rng.uniform_int(0, 6);
    }
    std::array<Confusion, 7> oracle{};
    long correct = 0;
    for (int i = 0; i < n; ++i) {
      const int p = preds[static_cast<std::size_t>(i)], l = labels[static_cast<std::size_t>(i)];
      for (int c = 0; c < 7; ++c) {
        const bool pp = p == c, ll = l == c;
        auto& cc = oracle[static_cast<std::size_t>(c)];
        if (pp && ll) ++cc.tp;
        if (pp && !ll) ++cc.fp;
        if (!pp && ll) ++cc.fn;
      }
      if (p == l) ++correct;
    }
    const auto [f1, acc] = metrics::expr_f1_and_accuracy(preds, labels);
    for (int c = 0; c < 7; ++c)
      CHECK(std::abs(f1[static_cast<std::size_t>(c)] -
                     oracle_f1(oracle[static_cast<std::size_t>(c)], 1.0)) < 1e-12);
    CHECK(std::abs(acc - double(correct) / double(n)) < 1e-12);
  }
}

TEST_CASE("report internal consistency") {
  Rng rng(9);
  std::vector<AuVector> preds(50), labels(50);
  for (auto& r : preds)
    for (auto& v : r) v = rng.bernoulli(0.5) ? 1 : 0;
  for (auto& r : labels)
    for (auto& v : r) v = rng.bernoulli(0.5) ? 1 : 0;
  const auto report = metrics::evaluate_au(preds, labels);
  double mean = 0.0;
  for (const double v : report.per_class_f1) mean += v;
  mean /= 12.0;
  CHECK(report.macro_f1 == doctest::Approx(mean));
  CHECK(report.composite ==
        doctest::Approx(metrics::composite_score(Task::au, report.macro_f1,
                                                 report.total_accuracy)));
  CHECK(report.frames == 50);
  CHECK(report.decisions == 600);
}
