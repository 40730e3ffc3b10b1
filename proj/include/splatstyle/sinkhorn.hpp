#pragma once

#include "splatstyle/features.hpp"
#include "splatstyle/parallel.hpp"
#include "splatstyle/types.hpp"

namespace splatstyle {

// Entropic regularization weight, iteration budget and stopping tolerance.
// gamma is in squared normalized-feature units; tol bounds the largest
// absolute potential update. With anneal set, epsilon scales from the squared
// feature diameter down to gamma by halving, two rounds per stage, then runs
// to convergence at gamma.
struct SinkhornParams {
  double gamma = 0.05;
  int max_iter = 500;
  double tol = 1e-6;
  bool anneal = true;
};

struct SinkhornResult {
  VecX f;  // potential on the first measure
  VecX g;  // potential on the second measure
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct DivergenceReport {
  double sd_value = 0.0;
  SinkhornResult cross;
  SinkhornResult self_a;
  SinkhornResult self_b;
};

// Squared bounding-box diagonal of the joint support; the annealing start and
// the reference "diameter" used when picking gamma relative to an instance.
double squared_diameter(const FeatureCloud& a, const FeatureCloud& b);

// Entropy-regularized optimal transport with cost C(x,y) = 0.5 |x-y|^2,
// solved by symmetric log-domain updates
//   f_i <- 0.5 (f_i + softmin_eps_j [C_ij - g_j]),
// both potentials updated simultaneously from the previous pair. The value is
// sum_i a_i f_i + sum_j b_j g_j.
SinkhornResult entropic_ot(const FeatureCloud& a, const FeatureCloud& b, const SinkhornParams& params,
                           Exec exec = default_exec());

// Self transport OT_eps(a, a); exploits f = g.
SinkhornResult self_transport(const FeatureCloud& a, const SinkhornParams& params,
                              Exec exec = default_exec());

// Debiased divergence SD = OT_eps(a,b) - 0.5 OT_eps(a,a) - 0.5 OT_eps(b,b).
DivergenceReport sinkhorn_divergence(const FeatureCloud& a, const FeatureCloud& b,
                                     const SinkhornParams& params, Exec exec = default_exec());

// Envelope-theorem gradient of the divergence with respect to a's support:
//   grad_i = sum_j pi_ab_ij (x_i - y_j) - sum_k pi_aa_ik (x_i - x_k),
// plans reconstructed from the converged potentials. If the solves hit the
// iteration cap the gradient is still returned; the caller can inspect the
// converged flags through report_out.
MatX sd_gradient(const FeatureCloud& a, const FeatureCloud& b, const SinkhornParams& params,
                 DivergenceReport* report_out = nullptr, Exec exec = default_exec());

// Repeated SD(a, target) evaluations against a fixed target while a's support
// drifts (one gradient-flow trajectory). The target self term is solved once;
// cross and self potentials warm-start from the previous call, so late calls
// converge in a few rounds.
class SinkhornFlowSolver {
 public:
  SinkhornFlowSolver(FeatureCloud target, SinkhornParams params, Exec exec = default_exec());

  // Divergence value; when grad is non-null it receives d(SD)/d(a.points).
  double evaluate(const FeatureCloud& a, MatX* grad = nullptr);

  bool last_converged() const { return last_converged_; }
  double target_self_value() const { return self_b_value_; }

 private:
  FeatureCloud target_;
  VecX log_wb_;
  SinkhornParams params_;
  Exec exec_;
  double self_b_value_ = 0.0;
  VecX f_ab_, g_ab_, f_aa_;
  bool warm_ = false;
  bool last_converged_ = false;
};

}  // namespace splatstyle
