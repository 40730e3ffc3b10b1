#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "splatstyle/features.hpp"
#include "splatstyle/parallel.hpp"
#include "splatstyle/registration.hpp"
#include "splatstyle/sinkhorn.hpp"
#include "splatstyle/types.hpp"

namespace splatstyle {

struct StylizationConfig {
  int K = 400;                       // content cluster count
  double gamma = 0.05;               // entropic regularization, normalized units
  FeatureMode feature_mode = FeatureMode::coords_luminance(0.3);
  int knn_k = 3;                     // style selection neighbors per content point
  int steps = 200;                   // gradient-flow steps per cluster
  double lr = 0.02;                  // Adam learning rate, normalized units
  double surface_energy_weight = 0.0;
  std::uint64_t seed = 0;
  std::pair<double, double> scale_adjust_clamp{0.5, 2.0};
  double opacity_min = 0.3;          // resampling: opacity floor
  double outlier_sigma = 3.0;        // resampling: MAD multiplier (infinity disables)

  double kmeans_color_weight = 0.3;  // RGB weight in the clustering features
  int kmeans_max_iter = 100;
  std::size_t min_cluster_size = 16;
  FitOptions fit;                    // per-cluster registration options
  int scale_adjust_k = 8;
  int sinkhorn_max_iter = 300;
  double sinkhorn_tol = 1e-5;
};

// One cluster's optimizable snapshot: the inverse-transformed style fragment
// with positions (normalized content frame) and an auxiliary color channel as
// free variables; shapes, opacities and rotations stay frozen in `fragment`.
struct ClusterFlowState {
  GaussianCloud fragment;
  FeatureMode mode = FeatureMode::coords();
  NormFrame frame;
  MatX positions;          // p x 3, normalized
  MatX aux;                // p x {0,1,3}, unweighted channel values in [0,1]
  MatX initial_positions;  // snapshot at construction
  std::vector<int> neighbor_graph;  // p x k_neighbors, flattened row-major
  int k_neighbors = 0;
  std::vector<double> sd_history;
  int steps_run = 0;
  bool aborted = false;

  std::size_t size() const { return static_cast<std::size_t>(positions.rows()); }
};

struct ClusterReport {
  int cluster = -1;
  int content_size = 0;
  int fragment_size = 0;
  int k_used = 0;
  double fit_objective = 0.0;
  bool degenerate_fit = false;
  double initial_sd = 0.0;
  double final_sd = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  int steps = 0;
  bool failed = false;
  std::string error;
  std::vector<int> style_indices;  // provenance: which style Gaussians were used
};

struct StylizationReport {
  std::vector<ClusterReport> clusters;
  int content_size = 0;
  int resampled_size = 0;
  int style_size = 0;
  int K = 0;
  int failed_clusters = 0;
  double initial_loss = 0.0;  // sum of per-cluster initial divergences
  double final_loss = 0.0;    // sum of per-cluster returned divergences
  double wall_seconds = 0.0;
};

GaussianCloud subset_cloud(const GaussianCloud& cloud, const std::vector<int>& indices);

// Builds the optimizable state from an inverse-transformed fragment: positions
// normalized into `frame`, aux channel extracted per `mode`, and the neighbor
// graph frozen to the 8 nearest neighbors at initialization.
ClusterFlowState make_flow_state(const GaussianCloud& fragment, FeatureMode mode,
                                 const NormFrame& frame);

// Deformation energy against the initial configuration,
//   E = sum_g sum_{h in N(g)} | |g0-h0| - |g-h| |,
// zero exactly for rigid motions of the whole cluster.
double surface_energy(const ClusterFlowState& state);

// Analytic subgradient of E with respect to current positions (zero at
// absolute-value ties and at coincident points).
MatX surface_energy_gradient(const ClusterFlowState& state);

// Adam descent (beta 0.9/0.999, eps 1e-8) on positions and aux channel under
// the divergence gradient plus surface_energy_weight times the energy
// subgradient, cosine learning-rate decay to 0.1*lr, aux clamped to [0,1]
// after every step. Returns the iterate with the lowest recorded divergence;
// a non-finite gradient aborts the cluster back to its initial state.
ClusterFlowState flow_cluster(ClusterFlowState state, const FeatureCloud& target,
                              const StylizationConfig& cfg, Exec exec = default_exec());

// Converts the optimized state back into a Gaussian fragment: positions are
// denormalized, and the aux channel is folded into the stored colors
// (luminance rescales RGB with channel clamping; RGB mode replaces it).
GaussianCloud writeback_aux(const ClusterFlowState& state, FeatureMode mode);

// Isotropic per-Gaussian rescale by the clamped ratio of mean k-nearest
// distances after vs before the flow (fresh graph for the "after" side).
GaussianCloud adjust_scales(const ClusterFlowState& state, GaussianCloud fragment, int k = 8,
                            std::pair<double, double> clamp = {0.5, 2.0},
                            Exec exec = default_exec());

// Full pipeline: resample -> cluster -> per cluster (register, select,
// inverse-map, flow, writeback, rescale) -> concatenate fragments in cluster
// order. A failing cluster falls back to its un-flowed fragment and is
// recorded; more than 25% failures aborts with a pipeline error.
std::pair<GaussianCloud, StylizationReport> stylize_scene(const GaussianCloud& content,
                                                          const GaussianCloud& style,
                                                          const StylizationConfig& cfg,
                                                          Exec exec = default_exec());

}  // namespace splatstyle
