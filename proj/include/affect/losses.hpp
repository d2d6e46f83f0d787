#pragma once

#include <Eigen/Dense>

namespace affect::losses {

// Probabilities are clamped into [kProbEpsilon, 1 - kProbEpsilon] before any
// logarithm so saturated predictions stay finite.
inline constexpr double kProbEpsilon = 1e-7;

// Per-class positive weights for binary cross-entropy; all components > 0.
struct BceParams {
  Eigen::VectorXd pos_weight;

  static BceParams uniform(int n, double w = 1.0) {
    BceParams p;
    p.pos_weight = Eigen::VectorXd::Constant(n, w);
    return p;
  }
  void validate() const;
};

// Focal loss parameters: per-class alpha in (0, 1], gamma >= 0.
struct FocalParams {
  Eigen::VectorXd alpha;
  double gamma = 2.0;

  static FocalParams uniform(int n, double alpha = 1.0, double gamma = 2.0) {
    FocalParams p;
    p.alpha = Eigen::VectorXd::Constant(n, alpha);
    p.gamma = gamma;
    return p;
  }
  void validate() const;
};

// Mean over components of -[w_i t_i log p_i + (1 - t_i) log(1 - p_i)].
double weighted_bce(const Eigen::VectorXd& probs, const Eigen::VectorXd& targets,
                    const BceParams& params);

// -alpha_t (1 - p_t)^gamma log(p_t); probs must sum to 1 within 1e-6.
double focal_loss(const Eigen::VectorXd& probs, int target, const FocalParams& params);

// Same losses evaluated from pre-sigmoid / pre-softmax logits, optionally
// producing the analytic gradient with respect to those logits.
double weighted_bce_from_logits(const Eigen::VectorXd& logits,
                                const Eigen::VectorXd& targets,
                                const BceParams& params,
                                Eigen::VectorXd* grad_logits = nullptr);

double focal_loss_from_logits(const Eigen::VectorXd& logits, int target,
                              const FocalParams& params,
                              Eigen::VectorXd* grad_logits = nullptr);

double sigmoid(double z);
Eigen::VectorXd sigmoid(const Eigen::VectorXd& z);
Eigen::VectorXd softmax(const Eigen::VectorXd& z);

}  // namespace affect::losses
