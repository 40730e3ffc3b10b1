#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "splatstyle/features.hpp"
#include "splatstyle/ply_io.hpp"
#include "splatstyle/resample.hpp"
#include "splatstyle/rng.hpp"
#include "support/helpers.hpp"

using namespace splatstyle;
using namespace testsupport;

namespace {

void put_f32(std::string& buf, double v) {
  const float f = static_cast<float>(v);
  char b[4];
  std::memcpy(b, &f, sizeof(f));
  buf.append(b, 4);
}

float get_f32(const std::string& buf, std::size_t word) {
  float f;
  std::memcpy(&f, buf.data() + 4 * word, sizeof(f));
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string payload_after_header(const std::string& bytes) {
  const std::string marker = "end_header\n";
  const auto at = bytes.find(marker);
  REQUIRE(at != std::string::npos);
  return bytes.substr(at + marker.size());
}

// Minimal 14-property fixture: three vertices with hand-picked raw values,
// so every decoded field can be recomputed right here from first principles.
struct Fixture {
  std::string path;
  // raw property values per vertex, in header order:
  // x y z f_dc_0 f_dc_1 f_dc_2 opacity scale_0 scale_1 scale_2 rot_0..3
  std::vector<std::vector<double>> rows;
};

Fixture write_minimal_fixture(const std::string& path) {
  Fixture fx;
  fx.path = path;
  fx.rows = {
      {1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0},
      {-1.0, 0.5, 2.0, 4.0, -4.0, 0.25, -2.0, -2.0, -2.0, -2.0, 2.0, 0.0, 0.0, 0.0},
      {0.0, -3.0, 1.5, 0.1, -0.2, 0.3, 3.0, 0.25, -0.5, 1.0, 0.5, 0.5, 0.5, 0.5},
  };

  std::string header =
      "ply\n"
      "format binary_little_endian 1.0\n"
      "comment hand-written test fixture\n"
      "element vertex 3\n";
  for (const char* name : {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0",
                           "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"})
    header += std::string("property float ") + name + "\n";
  header += "end_header\n";

  std::string payload;
  for (const auto& row : fx.rows)
    for (double v : row) put_f32(payload, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << header << payload;
  REQUIRE(out.good());
  return fx;
}

// Standard 62-property layout with varied bit patterns in every field,
// including the pass-through normals and f_rest bands.
std::string write_standard_fixture(const std::string& path, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::string header =
      "ply\n"
      "format binary_little_endian 1.0\n"
      "element vertex " +
      std::to_string(n) + "\n";
  for (const std::string& name : PlyLayout::standard().properties)
    header += "property float " + name + "\n";
  header += "end_header\n";

  std::string payload;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < PlyLayout::standard().properties.size(); ++p)
      put_f32(payload, 4.0 * rng.uniform() - 2.0);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << header << payload;
  REQUIRE(out.good());
  return payload;
}

double oracle_decode_color(double f_dc) {
  const double v = 0.5 + 0.28209479177387814 * f_dc;
  return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

double oracle_decode_opacity(double raw) { return 1.0 / (1.0 + std::exp(-raw)); }

GaussianCloud synthetic_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  GaussianCloud cloud;
  cloud.gaussians.resize(n);
  for (auto& g : cloud.gaussians) {
    g.position = Vec3(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4));
    g.color = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    g.log_scale = Vec3(rng.uniform(-3, 1), rng.uniform(-3, 1), rng.uniform(-3, 1));
    g.rotation = rng.rotation();
    g.opacity = rng.uniform();
  }
  return cloud;
}

}  // namespace

TEST_CASE("decode formulas on the hand-written fixture match direct evaluation") {
  const Fixture fx = write_minimal_fixture("fixture_minimal.ply");
  const GaussianCloud cloud = load_ply(fx.path);
  REQUIRE(cloud.size() == 3);
  CHECK(cloud.layout.properties.size() == 14);

  for (std::size_t i = 0; i < 3; ++i) {
    const auto& row = fx.rows[i];
    const Gaussian& g = cloud.gaussians[i];
    // float32 storage then double decode: compare against the same formulas
    // applied to the float-rounded raw values
    CHECK(g.position.x() == doctest::Approx(row[0]).epsilon(1e-7));
    CHECK(g.position.y() == doctest::Approx(row[1]).epsilon(1e-7));
    CHECK(g.position.z() == doctest::Approx(row[2]).epsilon(1e-7));
    for (int a = 0; a < 3; ++a)
      CHECK(g.color[a] ==
            doctest::Approx(oracle_decode_color(static_cast<float>(row[3 + a]))).epsilon(1e-9));
    CHECK(g.opacity ==
          doctest::Approx(oracle_decode_opacity(static_cast<float>(row[6]))).epsilon(1e-9));
    for (int a = 0; a < 3; ++a) CHECK(g.log_scale[a] == doctest::Approx(row[7 + a]).epsilon(1e-7));
    CHECK(g.rotation.norm() == doctest::Approx(1.0).epsilon(1e-6));
  }

  // named spot checks: DC zero is mid-gray, logistic(0) = 1/2
  CHECK(cloud.gaussians[0].color == Vec3(0.5, 0.5, 0.5));
  CHECK(cloud.gaussians[0].opacity == doctest::Approx(0.5).epsilon(1e-12));
  // saturating DC bands clamp to [0,1]
  CHECK(cloud.gaussians[1].color.x() == 1.0);
  CHECK(cloud.gaussians[1].color.y() == 0.0);
  // non-unit quaternion (2,0,0,0) normalizes to identity
  CHECK(cloud.gaussians[1].rotation.w() == doctest::Approx(1.0).epsilon(1e-12));
  // (.5,.5,.5,.5) is already unit
  CHECK(cloud.gaussians[2].rotation.x() == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("round-trip of untouched gaussians is byte-exact") {
  write_minimal_fixture("fixture_minimal.ply");
  const GaussianCloud cloud = load_ply("fixture_minimal.ply");
  save_ply(cloud, "fixture_minimal_copy.ply");
  CHECK(payload_after_header(read_file("fixture_minimal.ply")) ==
        payload_after_header(read_file("fixture_minimal_copy.ply")));

  const std::string payload = write_standard_fixture("fixture_standard.ply", 17, 99);
  const GaussianCloud full = load_ply("fixture_standard.ply");
  REQUIRE(full.size() == 17);
  save_ply(full, "fixture_standard_copy.ply");
  CHECK(payload_after_header(read_file("fixture_standard_copy.ply")) == payload);
}

TEST_CASE("modified gaussians re-encode via the inverse formulas") {
  write_minimal_fixture("fixture_minimal.ply");
  GaussianCloud cloud = load_ply("fixture_minimal.ply");
  cloud.gaussians[0].color = Vec3(1.0, 0.5, 0.25);
  cloud.gaussians[0].opacity = 0.5;
  cloud.gaussians[0].dirty = true;
  cloud.gaussians[0].color_dirty = true;
  save_ply(cloud, "fixture_modified.ply");

  const std::string payload = payload_after_header(read_file("fixture_modified.ply"));
  CHECK(get_f32(payload, 3) == doctest::Approx((1.0 - 0.5) / 0.28209479177387814).epsilon(1e-6));
  CHECK(get_f32(payload, 3) == doctest::Approx(1.77245).epsilon(1e-4));
  CHECK(get_f32(payload, 4) == doctest::Approx(0.0).epsilon(1e-12));  // color 0.5 -> DC 0
  CHECK(get_f32(payload, 6) == 0.0f);                                 // logit(0.5) = 0

  const GaussianCloud back = load_ply("fixture_modified.ply");
  CHECK(back.gaussians[0].color.x() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(back.gaussians[0].opacity == doctest::Approx(0.5).epsilon(1e-6));
  // untouched vertices still byte-identical
  const std::string original = payload_after_header(read_file("fixture_minimal.ply"));
  CHECK(payload.substr(14 * 4) == original.substr(14 * 4));
}

TEST_CASE("color_dirty zeroes the higher SH bands, plain dirty keeps them") {
  write_standard_fixture("fixture_standard.ply", 4, 7);
  GaussianCloud cloud = load_ply("fixture_standard.ply");
  const std::string before = payload_after_header(read_file("fixture_standard.ply"));

  cloud.gaussians[0].position += Vec3(1, 0, 0);
  cloud.gaussians[0].dirty = true;  // geometry only: f_rest must survive
  cloud.gaussians[1].color = Vec3(0.2, 0.4, 0.6);
  cloud.gaussians[1].color_dirty = true;
  save_ply(cloud, "fixture_standard_mod.ply");
  const std::string after = payload_after_header(read_file("fixture_standard_mod.ply"));

  const int width = 62;
  const auto rest = PlyLayout::standard().indices_with_prefix("f_rest_");
  REQUIRE(rest.size() == 45);
  for (int idx : rest) {
    CHECK(get_f32(after, static_cast<std::size_t>(idx)) ==
          get_f32(before, static_cast<std::size_t>(idx)));
    CHECK(get_f32(after, static_cast<std::size_t>(width + idx)) == 0.0f);
  }
  // normals ride along untouched in both
  for (int v = 0; v < 2; ++v)
    for (int p = 3; p < 6; ++p)
      CHECK(get_f32(after, static_cast<std::size_t>(v * width + p)) ==
            get_f32(before, static_cast<std::size_t>(v * width + p)));
}

TEST_CASE("load_ply rejects malformed inputs with specific errors") {
  SUBCASE("missing required property") {
    std::string content =
        "ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
        "property float x\nproperty float y\nproperty float z\nend_header\n";
    put_f32(content, 0);
    put_f32(content, 0);
    put_f32(content, 0);
    std::ofstream("bad_missing.ply", std::ios::binary) << content;
    CHECK_THROWS_WITH_AS(load_ply("bad_missing.ply"),
                         doctest::Contains("f_dc_0"), FormatError);
  }
  SUBCASE("ASCII rejected") {
    std::ofstream("bad_ascii.ply") << "ply\nformat ascii 1.0\nelement vertex 1\n"
                                      "property float x\nend_header\n0\n";
    CHECK_THROWS_AS(load_ply("bad_ascii.ply"), FormatError);
  }
  SUBCASE("zero vertices") {
    std::string content = "ply\nformat binary_little_endian 1.0\nelement vertex 0\n";
    for (const std::string& name : PlyLayout::standard().properties)
      content += "property float " + name + "\n";
    content += "end_header\n";
    std::ofstream("bad_empty.ply", std::ios::binary) << content;
    CHECK_THROWS_WITH_AS(load_ply("bad_empty.ply"), doctest::Contains("empty"), FormatError);
  }
  SUBCASE("truncated payload") {
    write_minimal_fixture("fixture_minimal.ply");
    const std::string bytes = read_file("fixture_minimal.ply");
    std::ofstream("bad_trunc.ply", std::ios::binary)
        << bytes.substr(0, bytes.size() - 10);
    CHECK_THROWS_WITH_AS(load_ply("bad_trunc.ply"), doctest::Contains("truncated"), FormatError);
  }
  SUBCASE("not a ply") {
    std::ofstream("bad_magic.ply", std::ios::binary) << "obj\n";
    CHECK_THROWS_AS(load_ply("bad_magic.ply"), FormatError);
    CHECK_THROWS_AS(load_ply("no_such_file.ply"), IoError);
  }
}

TEST_CASE("decode and encode are mutual inverses on random gaussians") {
  GaussianCloud cloud = synthetic_cloud(64, 11);
  // include the opacity extremes, which encode through the logit clamp
  cloud.gaussians[0].opacity = 0.0;
  cloud.gaussians[1].opacity = 1.0;
  save_ply(cloud, "roundtrip_synth.ply");
  const GaussianCloud back = load_ply("roundtrip_synth.ply");
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Gaussian& a = cloud.gaussians[i];
    const Gaussian& b = back.gaussians[i];
    CHECK((a.position - b.position).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((a.color - b.color).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((a.log_scale - b.log_scale).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(a.opacity - b.opacity) < 1e-6);
    CHECK((a.rotation.coeffs() - b.rotation.coeffs()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(b.rotation.norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(b.scale().minCoeff() > 0.0);
  }
}

TEST_CASE("luminance formula") {
  CHECK(luminance(Vec3(1, 1, 1)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(luminance(Vec3(0, 0, 0)) == 0.0);
  CHECK(luminance(Vec3(1, 0, 0)) == doctest::Approx(0.299).epsilon(1e-12));
  CHECK(luminance(Vec3(0, 1, 0)) == doctest::Approx(0.587).epsilon(1e-12));
  CHECK(luminance(Vec3(0, 0, 1)) == doctest::Approx(0.114).epsilon(1e-12));

  // affine in each channel and bounded by [0,1]
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 c(rng.uniform(), rng.uniform(), rng.uniform());
    const double y = luminance(c);
    CHECK(y >= 0.0);
    CHECK(y <= 1.0);
    const double expect = 0.299 * c.x() + 0.587 * c.y() + 0.114 * c.z();
    CHECK(y == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("assemble_features modes and normalization") {
  GaussianCloud two;
  two.gaussians.resize(2);
  two.gaussians[0].position = Vec3(1, 0, 0);
  two.gaussians[1].position = Vec3(-1, 0, 0);
  for (auto& g : two.gaussians) g.color = Vec3(0.5, 0.5, 0.5);

  SUBCASE("coords on unit-RMS pair is the identity") {
    const FeatureCloud fc = assemble_features(two, FeatureMode::coords());
    CHECK(fc.dim() == 3);
    CHECK(fc.points(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fc.points(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fc.points.col(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(fc.weights[0] == doctest::Approx(0.5));
    CHECK(fc.weights[1] == doctest::Approx(0.5));
    CHECK(fc.weights.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("luminance channel carries weight * luma") {
    const FeatureCloud fc = assemble_features(two, FeatureMode::coords_luminance(0.3));
    CHECK(fc.dim() == 4);
    CHECK(fc.points(0, 3) == doctest::Approx(0.15).epsilon(1e-12));  // 0.3 * 0.5
    CHECK(fc.points(1, 3) == doctest::Approx(0.15).epsilon(1e-12));
  }
  SUBCASE("rgb channels carry weight * color") {
    GaussianCloud colored = two;
    colored.gaussians[0].color = Vec3(1.0, 0.25, 0.0);
    const FeatureCloud fc = assemble_features(colored, FeatureMode::coords_rgb(0.3));
    CHECK(fc.dim() == 6);
    CHECK(fc.points(0, 3) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(fc.points(0, 4) == doctest::Approx(0.075).epsilon(1e-12));
    CHECK(fc.points(0, 5) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("shared normalization preserves pairwise distance ratios") {
    const GaussianCloud a = synthetic_cloud(20, 5);
    const GaussianCloud b = synthetic_cloud(20, 6);
    const FeatureCloud fa = assemble_features(a, FeatureMode::coords());
    const FeatureCloud fb = assemble_features(b, FeatureMode::coords(), &fa);
    CHECK(fb.frame.center == fa.frame.center);
    CHECK(fb.frame.radius == fa.frame.radius);
    // one global scale maps originals to features: cross ratios preserved
    const MatX pa = a.positions();
    const MatX pb = b.positions();
    const double d_orig = (pa.row(0) - pb.row(0)).norm();
    const double d_feat = (fa.points.row(0) - fb.points.row(0)).norm();
    for (int i = 1; i < 20; ++i) {
      const double o = (pa.row(i) - pb.row(i)).norm();
      const double f = (fa.points.row(i) - fb.points.row(i)).norm();
      CHECK(f * d_orig == doctest::Approx(o * d_feat).epsilon(1e-9));
    }
  }
  SUBCASE("degenerate cloud raises") {
    GaussianCloud flat;
    flat.gaussians.resize(3);
    for (auto& g : flat.gaussians) g.position = Vec3(1, 2, 3);
    CHECK_THROWS_AS(assemble_features(flat, FeatureMode::coords()), DegeneracyError);
  }
  SUBCASE("opacity-proportional weights") {
    GaussianCloud pair = two;
    pair.gaussians[0].opacity = 0.75;
    pair.gaussians[1].opacity = 0.25;
    FeatureCloud fc = assemble_features(pair, FeatureMode::coords());
    apply_opacity_weights(fc, pair);
    CHECK(fc.weights[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(fc.weights[1] == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("surface_resample") {
  SUBCASE("no-op thresholds give back the identical cloud") {
    const GaussianCloud cloud = synthetic_cloud(50, 21);
    const GaussianCloud out =
        surface_resample(cloud, 0.0, std::numeric_limits<double>::infinity());
    REQUIRE(out.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
      CHECK(out.gaussians[i].position == cloud.gaussians[i].position);
  }

  SUBCASE("opacity floor drops exactly the translucent gaussians") {
    GaussianCloud cloud = synthetic_cloud(40, 22);
    for (std::size_t i = 0; i < cloud.size(); ++i)
      cloud.gaussians[i].opacity = (i % 4 == 0) ? 0.1 : 0.9;
    const GaussianCloud out =
        surface_resample(cloud, 0.3, std::numeric_limits<double>::infinity());
    CHECK(out.size() == 30);
    for (const auto& g : out.gaussians) CHECK(g.opacity >= 0.3);
  }

  SUBCASE("kNN outlier pass matches the brute-force oracle on a sphere plus floater") {
    Rng rng(23);
    GaussianCloud cloud;
    cloud.gaussians.resize(201);
    for (std::size_t i = 0; i < 200; ++i) {
      Vec3 dir = rng.normal3();
      dir.normalize();
      cloud.gaussians[i].position = dir * (1.0 + 0.01 * rng.normal());
      cloud.gaussians[i].opacity = 1.0;
    }
    cloud.gaussians[200].position = Vec3(50, 50, 50);
    cloud.gaussians[200].opacity = 1.0;

    const GaussianCloud out = surface_resample(cloud, 0.0, 3.0);

    // oracle: mean distance to 8 nearest by O(n^2) scan, median + 3 MAD rule
    const MatX pos = cloud.positions();
    std::vector<double> mean_dist(201);
    for (int i = 0; i < 201; ++i) {
      const auto nn = brute_knn(pos, pos.row(i).transpose(), 9);  // includes self
      double sum = 0.0;
      for (int j = 1; j < 9; ++j) sum += (pos.row(nn[j]) - pos.row(i)).norm();
      mean_dist[static_cast<std::size_t>(i)] = sum / 8.0;
    }
    std::vector<double> sorted = mean_dist;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[100];  // odd count: middle element
    std::vector<double> dev(201);
    for (std::size_t i = 0; i < 201; ++i) dev[i] = std::abs(mean_dist[i] - med);
    std::sort(dev.begin(), dev.end());
    const double mad = dev[100];
    std::vector<int> expect;
    for (int i = 0; i < 201; ++i)
      if (mean_dist[static_cast<std::size_t>(i)] <= med + 3.0 * mad) expect.push_back(i);

    REQUIRE(out.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
      CHECK(out.gaussians[i].position ==
            cloud.gaussians[static_cast<std::size_t>(expect[i])].position);
    // the far floater is gone
    for (const auto& g : out.gaussians) CHECK(g.position.norm() < 2.0);
  }

  SUBCASE("target_count = n keeps everything; smaller counts subsample deterministically") {
    const GaussianCloud cloud = synthetic_cloud(30, 24);
    const GaussianCloud all =
        surface_resample(cloud, 0.0, std::numeric_limits<double>::infinity(), 30, 7);
    CHECK(all.size() == 30);

    const GaussianCloud sub1 =
        surface_resample(cloud, 0.0, std::numeric_limits<double>::infinity(), 10, 7);
    const GaussianCloud sub2 =
        surface_resample(cloud, 0.0, std::numeric_limits<double>::infinity(), 10, 7);
    REQUIRE(sub1.size() == 10);
    for (std::size_t i = 0; i < 10; ++i)
      CHECK(sub1.gaussians[i].position == sub2.gaussians[i].position);

    // survivors keep input order: positions appear in the same relative order
    std::size_t cursor = 0;
    for (const auto& g : sub1.gaussians) {
      while (cursor < cloud.size() && cloud.gaussians[cursor].position != g.position) ++cursor;
      CHECK(cursor < cloud.size());
    }
  }

  SUBCASE("all-filtered raises with counts") {
    const GaussianCloud cloud = synthetic_cloud(5, 25);
    CHECK_THROWS_AS(surface_resample(cloud, 2.0, 3.0), DegeneracyError);
  }
}
