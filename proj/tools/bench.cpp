// Benchmarks the hot kernels with the serial reference path against the
// OpenMP path and checks that both produce identical bits.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "splatstyle/features.hpp"
#include "splatstyle/knn.hpp"
#include "splatstyle/parallel.hpp"
#include "splatstyle/partition.hpp"
#include "splatstyle/render.hpp"
#include "splatstyle/rng.hpp"
#include "splatstyle/sinkhorn.hpp"

namespace {

using namespace splatstyle;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FeatureCloud random_features(std::size_t n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  FeatureCloud fc;
  fc.points.resize(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index i = 0; i < fc.points.rows(); ++i)
    for (int d = 0; d < dim; ++d) fc.points(i, d) = rng.uniform();
  fc.weights = VecX::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  return fc;
}

template <typename F>
double timed(F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return seconds_since(t0);
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-18s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  bits %s\n", name, serial,
              parallel, serial / parallel, identical ? "identical" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  int workers = 0;
  std::size_t n = 3000;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc) workers = std::atoi(argv[++i]);
    if (std::strcmp(argv[i], "--n") == 0 && i + 1 < argc) n = std::strtoull(argv[++i], nullptr, 10);
  }
  if (workers > 0) set_worker_count(workers);
  std::printf("benchmark: n=%zu workers=%d\n", n, worker_count());

  {
    const FeatureCloud a = random_features(n, 4, 11);
    const FeatureCloud b = random_features(n, 4, 12);
    SinkhornParams params;
    params.gamma = 0.05;
    SinkhornResult rs, rp;
    const double ts = timed([&] { rs = entropic_ot(a, b, params, Exec::Serial); });
    const double tp = timed([&] { rp = entropic_ot(a, b, params, Exec::Parallel); });
    report("entropic_ot", ts, tp,
           rs.f == rp.f && rs.g == rp.g && rs.value == rp.value);
  }

  {
    const FeatureCloud pts = random_features(n * 4, 3, 21);
    const KdTree tree(pts.points);
    std::vector<int> is, ip;
    std::vector<double> ds, dp;
    const double ts = timed([&] { tree.knn_batch(pts.points, 8, is, ds, Exec::Serial); });
    const double tp = timed([&] { tree.knn_batch(pts.points, 8, ip, dp, Exec::Parallel); });
    report("knn_batch", ts, tp, is == ip && ds == dp);
  }

  {
    const FeatureCloud pts = random_features(n * 4, 6, 31);
    Partition ps, pp;
    const double ts = timed([&] { ps = kmeans(pts, 64, 7, 50, Exec::Serial); });
    const double tp = timed([&] { pp = kmeans(pts, 64, 7, 50, Exec::Parallel); });
    report("kmeans", ts, tp,
           ps.labels == pp.labels && ps.centroids == pp.centroids && ps.inertia == pp.inertia);
  }

  {
    Rng rng(41);
    GaussianCloud cloud;
    cloud.layout = PlyLayout::standard();
    cloud.gaussians.resize(n * 4);
    for (Gaussian& g : cloud.gaussians) {
      g.position = rng.normal3();
      g.color = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
      g.log_scale = Vec3::Constant(-3.0);
      g.rotation = rng.rotation();
      g.opacity = 0.8;
    }
    Camera cam;
    cam.eye = Vec3(0, 0, -6);
    Image im_s, im_p;
    const double ts = timed([&] { im_s = render(cloud, cam, Exec::Serial); });
    const double tp = timed([&] { im_p = render(cloud, cam, Exec::Parallel); });
    report("render", ts, tp, im_s.rgb == im_p.rgb);
  }
  return 0;
}
