#include "splatstyle/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace splatstyle {
namespace {

// Cost matrix C_ij = 0.5 |x_i - y_j|^2, evaluated entrywise so that swapping
// the arguments yields the exact transpose bit for bit; the solver's symmetry
// in its two measures then holds exactly, not just to tolerance.
MatX cost_matrix(const MatX& X, const MatX& Y, Exec exec) {
  MatX C(X.rows(), Y.rows());
  parallel_for(static_cast<std::size_t>(X.rows()), exec, [&](std::size_t i) {
    const auto xi = X.row(static_cast<Eigen::Index>(i));
    C.row(static_cast<Eigen::Index>(i)) =
        0.5 * (Y.rowwise() - xi).rowwise().squaredNorm().transpose();
  });
  return C;
}

// out_i = -eps * log sum_j exp(logw_j + (pot_j - C_ij) / eps), max-shifted.
void softmin_rows(const MatX& C, const VecX& pot, const VecX& logw, double eps, VecX& out,
                  Exec exec) {
  const VecX shifted = pot + logw * eps;  // fold the log weights into the potential
  parallel_for(static_cast<std::size_t>(C.rows()), exec, [&](std::size_t i) {
    thread_local VecX buf;
    buf = (shifted - C.row(static_cast<Eigen::Index>(i)).transpose()) / eps;
    const double shift = buf.maxCoeff();
    const double total = (buf.array() - shift).exp().sum();
    out[static_cast<Eigen::Index>(i)] = -eps * (shift + std::log(total));
  });
}

std::vector<double> epsilon_ladder(double gamma, double diam2, bool anneal) {
  if (!anneal || !(diam2 > gamma) || !(diam2 > 0.0)) return {gamma};
  std::vector<double> ladder;
  for (double eps = diam2; eps > gamma; eps *= 0.5) ladder.push_back(eps);
  ladder.push_back(gamma);
  return ladder;
}

// Symmetric Jacobi rounds over the epsilon ladder; both potentials are
// refreshed from the previous pair so the two measures play identical roles.
SinkhornResult solve_cross(const MatX& C, const MatX& Ct, const VecX& wa, const VecX& wb,
                           const VecX& log_wa, const VecX& log_wb, double diam2,
                           const SinkhornParams& params, VecX* warm_f, VecX* warm_g, Exec exec) {
  SinkhornResult res;
  const bool warm = warm_f != nullptr && warm_f->size() == C.rows() && warm_g != nullptr &&
                    warm_g->size() == C.cols();
  res.f = warm ? *warm_f : VecX::Zero(C.rows());
  res.g = warm ? *warm_g : VecX::Zero(C.cols());
  const std::vector<double> ladder = epsilon_ladder(params.gamma, diam2, params.anneal && !warm);

  VecX f_half(C.rows()), g_half(C.cols());
  for (std::size_t stage = 0; stage < ladder.size() && res.iterations < params.max_iter; ++stage) {
    const double eps = ladder[stage];
    const bool last_stage = stage + 1 == ladder.size();
    const int rounds = last_stage ? params.max_iter - res.iterations : 2;
    for (int r = 0; r < rounds; ++r) {
      softmin_rows(C, res.g, log_wb, eps, f_half, exec);
      softmin_rows(Ct, res.f, log_wa, eps, g_half, exec);
      f_half = 0.5 * (res.f + f_half);
      g_half = 0.5 * (res.g + g_half);
      const double delta = std::max((f_half - res.f).cwiseAbs().maxCoeff(),
                                    (g_half - res.g).cwiseAbs().maxCoeff());
      res.f.swap(f_half);
      res.g.swap(g_half);
      ++res.iterations;
      if (!std::isfinite(delta)) throw NumericError("transport potentials diverged");
      if (last_stage && delta < params.tol) {
        res.converged = true;
        break;
      }
    }
  }
  res.value = wa.dot(res.f) + wb.dot(res.g);
  if (warm_f != nullptr) *warm_f = res.f;
  if (warm_g != nullptr) *warm_g = res.g;
  return res;
}

// Self transport keeps a single potential: the symmetric update preserves
// f = g, and the value collapses to 2 sum_i a_i f_i.
SinkhornResult solve_self(const MatX& C, const VecX& wa, const VecX& log_wa, double diam2,
                          const SinkhornParams& params, VecX* warm_f, Exec exec) {
  SinkhornResult res;
  const bool warm = warm_f != nullptr && warm_f->size() == C.rows();
  res.f = warm ? *warm_f : VecX::Zero(C.rows());
  const std::vector<double> ladder = epsilon_ladder(params.gamma, diam2, params.anneal && !warm);

  VecX f_half(C.rows());
  for (std::size_t stage = 0; stage < ladder.size() && res.iterations < params.max_iter; ++stage) {
    const double eps = ladder[stage];
    const bool last_stage = stage + 1 == ladder.size();
    const int rounds = last_stage ? params.max_iter - res.iterations : 2;
    for (int r = 0; r < rounds; ++r) {
      softmin_rows(C, res.f, log_wa, eps, f_half, exec);
      f_half = 0.5 * (res.f + f_half);
      const double delta = (f_half - res.f).cwiseAbs().maxCoeff();
      res.f.swap(f_half);
      ++res.iterations;
      if (!std::isfinite(delta)) throw NumericError("transport potentials diverged");
      if (last_stage && delta < params.tol) {
        res.converged = true;
        break;
      }
    }
  }
  res.g = res.f;
  res.value = 2.0 * wa.dot(res.f);
  if (warm_f != nullptr) *warm_f = res.f;
  return res;
}

VecX log_weights(const VecX& w) {
  VecX lw(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] < 0.0) throw ContractError("negative point weight");
    lw[i] = std::log(w[i]);
  }
  return lw;
}

void check_pair(const FeatureCloud& a, const FeatureCloud& b) {
  if (a.size() == 0 || b.size() == 0) throw ContractError("transport requires nonempty clouds");
  if (a.dim() != b.dim()) {
    throw ContractError("feature dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()));
  }
  if (!a.points.allFinite() || !b.points.allFinite())
    throw NumericError("non-finite feature coordinates");
}

void check_params(const SinkhornParams& params) {
  if (!(params.gamma > 0.0)) throw ContractError("gamma must be positive");
  if (!(params.tol > 0.0)) throw ContractError("tol must be positive");
  if (params.max_iter < 1) throw ContractError("max_iter must be at least 1");
}

// grad_out.row(i) += sign * sum_j pi_ij (x_i - y_j), with
// pi_ij = a_i b_j exp((f_i + g_j - C_ij) / eps).
void accumulate_plan_gradient(const MatX& C, const MatX& X, const MatX& Y, const VecX& f,
                              const VecX& g, const VecX& wa, const VecX& log_wb, double eps,
                              double sign, MatX& grad_out, Exec exec) {
  parallel_for(static_cast<std::size_t>(C.rows()), exec, [&](std::size_t si) {
    const auto i = static_cast<Eigen::Index>(si);
    thread_local VecX w;
    w = (((f[i] - C.row(i).transpose().array()) + g.array()) / eps + log_wb.array()).exp() * wa[i];
    const double mass = w.sum();
    grad_out.row(i) += sign * (mass * X.row(i) - w.transpose() * Y);
  });
}

double pair_diameter(const FeatureCloud& a, const FeatureCloud& b) {
  const VecX lo = a.points.colwise().minCoeff().cwiseMin(b.points.colwise().minCoeff());
  const VecX hi = a.points.colwise().maxCoeff().cwiseMax(b.points.colwise().maxCoeff());
  return (hi - lo).squaredNorm();
}

}  // namespace

double squared_diameter(const FeatureCloud& a, const FeatureCloud& b) {
  check_pair(a, b);
  return pair_diameter(a, b);
}

SinkhornResult entropic_ot(const FeatureCloud& a, const FeatureCloud& b,
                           const SinkhornParams& params, Exec exec) {
  check_pair(a, b);
  check_params(params);
  const MatX C = cost_matrix(a.points, b.points, exec);
  const MatX Ct = C.transpose();
  return solve_cross(C, Ct, a.weights, b.weights, log_weights(a.weights), log_weights(b.weights),
                     pair_diameter(a, b), params, nullptr, nullptr, exec);
}

SinkhornResult self_transport(const FeatureCloud& a, const SinkhornParams& params, Exec exec) {
  check_pair(a, a);
  check_params(params);
  const MatX C = cost_matrix(a.points, a.points, exec);
  return solve_self(C, a.weights, log_weights(a.weights), pair_diameter(a, a), params, nullptr,
                    exec);
}

DivergenceReport sinkhorn_divergence(const FeatureCloud& a, const FeatureCloud& b,
                                     const SinkhornParams& params, Exec exec) {
  DivergenceReport report;
  report.cross = entropic_ot(a, b, params, exec);
  report.self_a = self_transport(a, params, exec);
  report.self_b = self_transport(b, params, exec);
  report.sd_value = report.cross.value - 0.5 * report.self_a.value - 0.5 * report.self_b.value;
  return report;
}

MatX sd_gradient(const FeatureCloud& a, const FeatureCloud& b, const SinkhornParams& params,
                 DivergenceReport* report_out, Exec exec) {
  check_pair(a, b);
  check_params(params);
  const VecX log_wa = log_weights(a.weights);
  const VecX log_wb = log_weights(b.weights);

  const MatX C_ab = cost_matrix(a.points, b.points, exec);
  const MatX C_ab_t = C_ab.transpose();
  const MatX C_aa = cost_matrix(a.points, a.points, exec);

  DivergenceReport report;
  report.cross = solve_cross(C_ab, C_ab_t, a.weights, b.weights, log_wa, log_wb,
                             pair_diameter(a, b), params, nullptr, nullptr, exec);
  report.self_a = solve_self(C_aa, a.weights, log_wa, pair_diameter(a, a), params, nullptr, exec);

  MatX grad = MatX::Zero(a.points.rows(), a.points.cols());
  accumulate_plan_gradient(C_ab, a.points, b.points, report.cross.f, report.cross.g, a.weights,
                           log_wb, params.gamma, 1.0, grad, exec);
  accumulate_plan_gradient(C_aa, a.points, a.points, report.self_a.f, report.self_a.f, a.weights,
                           log_wa, params.gamma, -1.0, grad, exec);

  if (report_out != nullptr) {
    report.self_b = self_transport(b, params, exec);
    report.sd_value = report.cross.value - 0.5 * report.self_a.value - 0.5 * report.self_b.value;
    *report_out = report;
  }
  return grad;
}

SinkhornFlowSolver::SinkhornFlowSolver(FeatureCloud target, SinkhornParams params, Exec exec)
    : target_(std::move(target)), params_(params), exec_(exec) {
  check_pair(target_, target_);
  check_params(params_);
  log_wb_ = log_weights(target_.weights);
  self_b_value_ = self_transport(target_, params_, exec_).value;
}

double SinkhornFlowSolver::evaluate(const FeatureCloud& a, MatX* grad) {
  check_pair(a, target_);
  const VecX log_wa = log_weights(a.weights);

  const MatX C_ab = cost_matrix(a.points, target_.points, exec_);
  const MatX C_ab_t = C_ab.transpose();
  const MatX C_aa = cost_matrix(a.points, a.points, exec_);

  if (!warm_) {
    f_ab_.resize(0);
    g_ab_.resize(0);
    f_aa_.resize(0);
  }
  const SinkhornResult cross =
      solve_cross(C_ab, C_ab_t, a.weights, target_.weights, log_wa, log_wb_,
                  pair_diameter(a, target_), params_, &f_ab_, &g_ab_, exec_);
  const SinkhornResult self_a =
      solve_self(C_aa, a.weights, log_wa, pair_diameter(a, a), params_, &f_aa_, exec_);
  warm_ = true;
  last_converged_ = cross.converged && self_a.converged;

  if (grad != nullptr) {
    grad->setZero(a.points.rows(), a.points.cols());
    accumulate_plan_gradient(C_ab, a.points, target_.points, cross.f, cross.g, a.weights, log_wb_,
                             params_.gamma, 1.0, *grad, exec_);
    accumulate_plan_gradient(C_aa, a.points, a.points, self_a.f, self_a.f, a.weights, log_wa,
                             params_.gamma, -1.0, *grad, exec_);
  }
  return cross.value - 0.5 * self_a.value - 0.5 * self_b_value_;
}

}  // namespace splatstyle
