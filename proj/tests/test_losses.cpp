#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "affect/losses.hpp"
#include "affect/rng.hpp"

using namespace affect;
using Eigen::VectorXd;

namespace {

VectorXd constant(int n, double v) { return VectorXd::Constant(n, v); }

// reference BCE used as an independent oracle
double plain_bce(const VectorXd& probs, const VectorXd& targets) {
  double s = 0.0;
  for (int i = 0; i < probs.size(); ++i)
    s -= targets[i] * std::log(probs[i]) + (1.0 - targets[i]) * std::log(1.0 - probs[i]);
  return s / static_cast<double>(probs.size());
}

VectorXd random_distribution(Rng& rng, int n) {
  VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = rng.uniform_double(0.05, 1.0);
  return p / p.sum();
}

}  // namespace

TEST_CASE("weighted bce matches hand-evaluated values") {
  const auto params = losses::BceParams::uniform(12, 1.0);

  // all probs 0.5, all targets 1 -> -log 0.5
  CHECK(losses::weighted_bce(constant(12, 0.5), constant(12, 1.0), params) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-9));

  // near-perfect predictions -> loss near zero
  VectorXd probs(12), targets(12);
  for (int i = 0; i < 12; ++i) {
    targets[i] = i % 2;
    probs[i] = targets[i] == 1.0 ? 1.0 - 1e-7 : 1e-7;
  }
  CHECK(losses::weighted_bce(probs, targets, params) <
        12 * std::abs(std::log(1.0 - 1e-7)) + 1e-9);

  // single active term with w = 2: that term contributes 2 * (-log 0.5)
  auto weighted = losses::BceParams::uniform(12, 1.0);
  weighted.pos_weight[0] = 2.0;
  VectorXd p = constant(12, 1e-7);
  VectorXd t = constant(12, 0.0);
  p[0] = 0.5;
  t[0] = 1.0;
  const double loss = losses::weighted_bce(p, t, weighted);
  CHECK(loss * 12 == doctest::Approx(2 * 0.6931471805599453).epsilon(1e-5));
}

TEST_CASE("weighted bce contract errors") {
  const auto params = losses::BceParams::uniform(12, 1.0);
  CHECK_THROWS_AS(losses::weighted_bce(constant(7, 0.5), constant(12, 1.0), params),
                  ContractError);
  CHECK_THROWS_AS(losses::weighted_bce(constant(12, 0.5), constant(12, 0.5), params),
                  ContractError);  // non-binary target
  losses::BceParams bad;
  bad.pos_weight = constant(12, 0.0);
  CHECK_THROWS_AS(losses::weighted_bce(constant(12, 0.5), constant(12, 1.0), bad),
                  ContractError);
}

TEST_CASE("focal loss matches hand-evaluated values") {
  // gamma = 0, alpha = 1 reduces to cross-entropy
  auto ce_params = losses::FocalParams::uniform(7, 1.0, 0.0);
  VectorXd probs = constant(7, 0.125);
  probs[3] = 0.25;
  CHECK(probs.sum() == doctest::Approx(1.0));
  CHECK(losses::focal_loss(probs, 3, ce_params) ==
        doctest::Approx(1.3862943611198906).epsilon(1e-9));

  // p_t = 1 -> 0
  VectorXd sure = constant(7, 0.0);
  sure[2] = 1.0;
  CHECK(losses::focal_loss(sure, 2, ce_params) == doctest::Approx(0.0).epsilon(1e-6));

  // gamma = 2, p_t = 0.5 -> 0.25 * (-log 0.5)
  auto focal2 = losses::FocalParams::uniform(7, 1.0, 2.0);
  VectorXd half(7);
  half << 0.5, 0.5 / 6, 0.5 / 6, 0.5 / 6, 0.5 / 6, 0.5 / 6, 0.5 / 6;
  CHECK(losses::focal_loss(half, 0, focal2) ==
        doctest::Approx(0.25 * 0.6931471805599453).epsilon(1e-9));
}

TEST_CASE("focal loss contract errors") {
  auto params = losses::FocalParams::uniform(7, 1.0, 2.0);
  CHECK_THROWS_AS(losses::focal_loss(constant(7, 1.0 / 7), 7, params), ContractError);
  CHECK_THROWS_AS(losses::focal_loss(constant(7, 1.0 / 7), -1, params), ContractError);
  CHECK_THROWS_AS(losses::focal_loss(constant(7, 0.2), 0, params), ContractError);
  auto bad_alpha = losses::FocalParams::uniform(7, 1.5, 2.0);
  CHECK_THROWS_AS(losses::focal_loss(constant(7, 1.0 / 7), 0, bad_alpha), ContractError);
  auto bad_gamma = losses::FocalParams::uniform(7, 1.0, -0.5);
  CHECK_THROWS_AS(losses::focal_loss(constant(7, 1.0 / 7), 0, bad_gamma), ContractError);
}

TEST_CASE("focal with gamma 0 equals cross-entropy on 1000 random inputs") {
  Rng rng(101);
  const auto params = losses::FocalParams::uniform(7, 1.0, 0.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const VectorXd p = random_distribution(rng, 7);
    const int target = rng.uniform_int(0, 6);
    CHECK(losses::focal_loss(p, target, params) ==
          doctest::Approx(-std::log(p[target])).epsilon(1e-6));
  }
}

TEST_CASE("unit-weight bce equals plain bce on 1000 random inputs") {
  Rng rng(102);
  const auto params = losses::BceParams::uniform(12, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    VectorXd p(12), t(12);
    for (int i = 0; i < 12; ++i) {
      p[i] = rng.uniform_double(0.01, 0.99);
      t[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    CHECK(losses::weighted_bce(p, t, params) ==
          doctest::Approx(plain_bce(p, t)).epsilon(1e-6));
  }
}

TEST_CASE("focal loss strictly decreases in p_t") {
  Rng rng(103);
  const auto params = losses::FocalParams::uniform(7, 0.8, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    double a = rng.uniform_double(0.01, 0.98);
    double b = rng.uniform_double(0.01, 0.98);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const auto dist = [](double pt) {
      VectorXd p = constant(7, (1.0 - pt) / 6.0);
      p[4] = pt;
      return p;
    };
    CHECK(losses::focal_loss(dist(b), 4, params) < losses::focal_loss(dist(a), 4, params));
  }
}

TEST_CASE("losses are non-negative on random valid inputs") {
  Rng rng(104);
  auto bce = losses::BceParams::uniform(12, 1.0);
  for (int i = 0; i < 12; ++i) bce.pos_weight[i] = rng.uniform_double(0.5, 10.0);
  auto focal = losses::FocalParams::uniform(7, 1.0, 2.0);
  for (int i = 0; i < 7; ++i) focal.alpha[i] = rng.uniform_double(0.1, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    VectorXd p(12), t(12);
    for (int i = 0; i < 12; ++i) {
      p[i] = rng.uniform_double(0.001, 0.999);
      t[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    CHECK(losses::weighted_bce(p, t, bce) >= 0.0);
    CHECK(losses::focal_loss(random_distribution(rng, 7), rng.uniform_int(0, 6), focal) >=
          0.0);
  }
}

namespace {

// central finite differences on the logit-space losses
template <typename LossFn>
void check_gradient(const LossFn& fn, const VectorXd& logits) {
  VectorXd analytic;
  fn(logits, &analytic);
  const double h = 1e-4;
  for (int i = 0; i < logits.size(); ++i) {
    VectorXd plus = logits, minus = logits;
    plus[i] += h;
    minus[i] -= h;
    const double fd = (fn(plus, nullptr) - fn(minus, nullptr)) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
    CHECK(std::abs(analytic[i] - fd) / denom < 1e-4);
  }
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(105);
  for (int trial = 0; trial < 50; ++trial) {
    VectorXd logits(12), targets(12);
    for (int i = 0; i < 12; ++i) {
      logits[i] = rng.uniform_double(-3.0, 3.0);
      targets[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    auto bce = losses::BceParams::uniform(12, 1.0);
    for (int i = 0; i < 12; ++i) bce.pos_weight[i] = rng.uniform_double(1.0, 8.0);
    check_gradient(
        [&](const VectorXd& z, VectorXd* g) {
          return losses::weighted_bce_from_logits(z, targets, bce, g);
        },
        logits);

    VectorXd flogits(7);
    for (int i = 0; i < 7; ++i) flogits[i] = rng.uniform_double(-3.0, 3.0);
    const int target = rng.uniform_int(0, 6);
    losses::FocalParams focal = losses::FocalParams::uniform(7, 1.0, 2.0);
    for (int i = 0; i < 7; ++i) focal.alpha[i] = rng.uniform_double(0.2, 1.0);
    check_gradient(
        [&](const VectorXd& z, VectorXd* g) {
          return losses::focal_loss_from_logits(z, target, focal, g);
        },
        flogits);

    losses::FocalParams ce = losses::FocalParams::uniform(7, 1.0, 0.0);
    check_gradient(
        [&](const VectorXd& z, VectorXd* g) {
          return losses::focal_loss_from_logits(z, target, ce, g);
        },
        flogits);
  }
}
