#include "affect/losses.hpp"

#include <cmath>

#include "affect/errors.hpp"

namespace affect::losses {

namespace {

double clamp_prob(double p) {
  return std::min(std::max(p, kProbEpsilon), 1.0 - kProbEpsilon);
}

}  // namespace

void BceParams::validate() const {
  for (Eigen::Index i = 0; i < pos_weight.size(); ++i)
    if (!(pos_weight[i] > 0.0))
      throw ContractError("bce pos_weight components must be > 0");
}

void FocalParams::validate() const {
  if (gamma < 0.0) throw ContractError("focal gamma must be >= 0");
  for (Eigen::Index i = 0; i < alpha.size(); ++i)
    if (!(alpha[i] > 0.0) || alpha[i] > 1.0)
      throw ContractError("focal alpha components must be in (0, 1]");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  Eigen::VectorXd p(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) p[i] = sigmoid(z[i]);
  return p;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  const double mx = z.maxCoeff();
  Eigen::VectorXd e = (z.array() - mx).exp();
  return e / e.sum();
}

double weighted_bce(const Eigen::VectorXd& probs, const Eigen::VectorXd& targets,
                    const BceParams& params) {
  params.validate();
  const Eigen::Index n = probs.size();
  if (targets.size() != n || params.pos_weight.size() != n)
    throw ContractError("weighted_bce: probs, targets, pos_weight lengths differ");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = targets[i];
    if (t != 0.0 && t != 1.0) throw ContractError("weighted_bce targets must be 0 or 1");
    const double p = clamp_prob(probs[i]);
    sum -= params.pos_weight[i] * t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return sum / static_cast<double>(n);
}

double focal_loss(const Eigen::VectorXd& probs, int target, const FocalParams& params) {
  params.validate();
  if (target < 0 || target >= probs.size())
    throw ContractError("focal_loss target out of range");
  if (params.alpha.size() != probs.size())
    throw ContractError("focal_loss: alpha length must match probs length");
  if (std::abs(probs.sum() - 1.0) > 1e-6)
    throw ContractError("focal_loss probs must sum to 1");
  const double pt = clamp_prob(probs[target]);
  return -params.alpha[target] * std::pow(1.0 - pt, params.gamma) * std::log(pt);
}

double weighted_bce_from_logits(const Eigen::VectorXd& logits,
                                const Eigen::VectorXd& targets,
                                const BceParams& params,
                                Eigen::VectorXd* grad_logits) {
  params.validate();
  const Eigen::Index n = logits.size();
  if (targets.size() != n || params.pos_weight.size() != n)
    throw ContractError("weighted_bce: logits, targets, pos_weight lengths differ");
  double sum = 0.0;
  if (grad_logits) grad_logits->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = targets[i];
    const double w = params.pos_weight[i];
    const double p = clamp_prob(sigmoid(logits[i]));
    sum -= w * t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    if (grad_logits)
      (*grad_logits)[i] = (w * t * (p - 1.0) + (1.0 - t) * p) / static_cast<double>(n);
  }
  return sum / static_cast<double>(n);
}

double focal_loss_from_logits(const Eigen::VectorXd& logits, int target,
                              const FocalParams& params,
                              Eigen::VectorXd* grad_logits) {
  params.validate();
  if (target < 0 || target >= logits.size())
    throw ContractError("focal_loss target out of range");
  if (params.alpha.size() != logits.size())
    throw ContractError("focal_loss: alpha length must match logits length");
  const Eigen::VectorXd p = softmax(logits);
  const double a = params.alpha[target];
  const double g = params.gamma;
  const double pt = clamp_prob(p[target]);
  const double one_minus = 1.0 - pt;
  const double loss = -a * std::pow(one_minus, g) * std::log(pt);
  if (grad_logits) {
    // dL/dp_t, with the gamma term dropped entirely when gamma == 0.
    double dl_dpt = -a * std::pow(one_minus, g) / pt;
    if (g > 0.0) dl_dpt += a * g * std::pow(one_minus, g - 1.0) * std::log(pt);
    grad_logits->resize(logits.size());
    for (Eigen::Index j = 0; j < logits.size(); ++j) {
      const double indicator = (j == target) ? 1.0 : 0.0;
      (*grad_logits)[j] = dl_dpt * pt * (indicator - p[j]);
    }
  }
  return loss;
}

}  // namespace affect::losses
