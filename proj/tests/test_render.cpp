#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "splatstyle/render.hpp"
#include "splatstyle/rng.hpp"
#include "support/helpers.hpp"

using namespace splatstyle;
using namespace testsupport;

namespace {

Gaussian splat(const Vec3& pos, const Vec3& color, double opacity, double scale) {
  Gaussian g;
  g.position = pos;
  g.color = color;
  g.opacity = opacity;
  g.log_scale = Vec3::Constant(std::log(scale));
  return g;
}

Camera head_on(int size) {
  Camera cam;
  cam.eye = Vec3(0, 0, -5);
  cam.look_at = Vec3::Zero();
  cam.width = size;
  cam.height = size;
  return cam;
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return (std::uint32_t(b[at]) << 24) | (std::uint32_t(b[at + 1]) << 16) |
         (std::uint32_t(b[at + 2]) << 8) | std::uint32_t(b[at + 3]);
}

// Minimal independent PNG reader for the subset we emit: 8-bit RGB, stored
// (uncompressed) deflate blocks, filter type 0 on every scanline.
struct ParsedPng {
  std::uint32_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // RGB rows
};

ParsedPng parse_png(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  REQUIRE(bytes.size() > 8);
  REQUIRE(std::memcmp(bytes.data(), sig, 8) == 0);

  ParsedPng out;
  std::vector<std::uint8_t> idat;
  std::size_t at = 8;
  bool saw_end = false;
  while (at + 8 <= bytes.size()) {
    const std::uint32_t len = be32(bytes, at);
    const std::string type(bytes.begin() + static_cast<std::ptrdiff_t>(at) + 4,
                           bytes.begin() + static_cast<std::ptrdiff_t>(at) + 8);
    const std::size_t data = at + 8;
    if (type == "IHDR") {
      REQUIRE(len == 13);
      out.width = be32(bytes, data);
      out.height = be32(bytes, data + 4);
      CHECK(bytes[data + 8] == 8);   // bit depth
      CHECK(bytes[data + 9] == 2);   // truecolor
      CHECK(bytes[data + 10] == 0);  // deflate
      CHECK(bytes[data + 12] == 0);  // no interlace
    } else if (type == "IDAT") {
      idat.insert(idat.end(), bytes.begin() + static_cast<std::ptrdiff_t>(data),
                  bytes.begin() + static_cast<std::ptrdiff_t>(data + len));
    } else if (type == "IEND") {
      saw_end = true;
    }
    at = data + len + 4;  // skip crc
  }
  REQUIRE(saw_end);

  // zlib: 2-byte header, then stored deflate blocks (type 0), 4-byte adler
  REQUIRE(idat.size() > 6);
  std::vector<std::uint8_t> raw;
  std::size_t z = 2;
  bool last = false;
  while (!last) {
    REQUIRE(z + 5 <= idat.size());
    const std::uint8_t header = idat[z];
    last = (header & 1u) != 0;
    REQUIRE((header >> 1) == 0);  // stored block
    const std::size_t n = idat[z + 1] | (std::size_t(idat[z + 2]) << 8);
    const std::size_t nlen = idat[z + 3] | (std::size_t(idat[z + 4]) << 8);
    REQUIRE(((n ^ nlen) & 0xFFFF) == 0xFFFF);
    raw.insert(raw.end(), idat.begin() + static_cast<std::ptrdiff_t>(z + 5),
               idat.begin() + static_cast<std::ptrdiff_t>(z + 5 + n));
    z += 5 + n;
  }

  const std::size_t stride = 1 + 3 * static_cast<std::size_t>(out.width);
  REQUIRE(raw.size() == stride * out.height);
  for (std::uint32_t y = 0; y < out.height; ++y) {
    REQUIRE(raw[y * stride] == 0);  // filter: none
    out.pixels.insert(out.pixels.end(), raw.begin() + static_cast<std::ptrdiff_t>(y * stride + 1),
                      raw.begin() + static_cast<std::ptrdiff_t>((y + 1) * stride));
  }
  return out;
}

}  // namespace

TEST_CASE("a single centered gaussian paints color times opacity at its mean") {
  GaussianCloud cloud;
  cloud.gaussians = {splat(Vec3(0, 0, 0), Vec3(0.8, 0.2, 0.1), 0.6, 0.05)};
  const Camera cam = head_on(65);  // odd size: center pixel sits on the axis
  const Image img = render(cloud, cam);
  CHECK(img.at(32, 32, 0) == doctest::Approx(0.8 * 0.6).epsilon(1e-6));
  CHECK(img.at(32, 32, 1) == doctest::Approx(0.2 * 0.6).epsilon(1e-6));
  CHECK(img.at(32, 32, 2) == doctest::Approx(0.1 * 0.6).epsilon(1e-6));
  // far corner is beyond 3 sigma: untouched background
  CHECK(img.at(0, 0, 0) == 0.0f);
  CHECK(img.at(64, 64, 2) == 0.0f);
}

TEST_CASE("two coincident gaussians composite front over back") {
  GaussianCloud cloud;
  cloud.gaussians = {splat(Vec3(0, 0, -0.1), Vec3(1, 0, 0), 0.5, 0.05),   // red, nearer eye
                     splat(Vec3(0, 0, 0.1), Vec3(0, 0, 1), 0.5, 0.05)};   // blue, behind
  const Camera cam = head_on(65);
  const Image img = render(cloud, cam);
  CHECK(img.at(32, 32, 0) == doctest::Approx(0.5).epsilon(1e-6));         // 0.5 * red
  CHECK(img.at(32, 32, 2) == doctest::Approx(0.25).epsilon(1e-6));        // 0.5 * 0.5 * blue
  CHECK(img.at(32, 32, 1) == doctest::Approx(0.0).epsilon(1e-9));

  // input order must not matter: depth sorting puts red in front either way
  GaussianCloud swapped;
  swapped.gaussians = {cloud.gaussians[1], cloud.gaussians[0]};
  const Image img2 = render(swapped, cam);
  CHECK(img.rgb == img2.rgb);
}

TEST_CASE("renders are insensitive to input permutation and execution policy") {
  set_worker_count(4);
  // Depth ties break by input index, so permutation invariance needs a scene
  // with distinct view depths; the bump field's continuous z guarantees that
  // (the cube cloud puts whole faces at bit-identical depth).
  const GaussianCloud cloud = bump_field_cloud(400, 5);
  const Camera cam = head_on(96);

  const Image a = render(cloud, cam, Exec::Serial);
  const Image b = render(cloud, cam, Exec::Parallel);
  CHECK(a.rgb == b.rgb);

  GaussianCloud permuted = cloud;
  Rng rng(6);
  for (std::size_t i = permuted.size() - 1; i > 0; --i)
    std::swap(permuted.gaussians[i], permuted.gaussians[rng.index(i + 1)]);
  const Image c = render(permuted, cam);
  CHECK(a.rgb == c.rgb);
}

TEST_CASE("pixel values stay inside the compositing bounds") {
  GaussianCloud cloud = cube_surface_cloud(500, 7);
  for (auto& g : cloud.gaussians) g.opacity = 1.0;  // worst case for saturation
  const Image img = render(cloud, head_on(64));
  float lo = 0.0f, hi = 0.0f;
  for (float v : img.rgb) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    CHECK(std::isfinite(v));
  }
  CHECK(lo >= 0.0f);
  CHECK(hi <= 1.0f + 1e-5f);
}

TEST_CASE("degenerate footprints are regularized instead of exploding") {
  GaussianCloud cloud;
  cloud.gaussians = {splat(Vec3(0, 0, 0), Vec3(1, 1, 1), 1.0, 1e-12)};
  const Image img = render(cloud, head_on(33));
  for (float v : img.rgb) CHECK(std::isfinite(v));
  CHECK(img.at(16, 16, 0) > 0.0f);  // the splat still lands on its pixel
}

TEST_CASE("gaussians behind the camera are ignored") {
  GaussianCloud cloud;
  cloud.gaussians = {splat(Vec3(0, 0, -10), Vec3(1, 1, 1), 1.0, 0.1)};  // behind eye
  const Image img = render(cloud, head_on(33));
  for (float v : img.rgb) CHECK(v == 0.0f);
}

TEST_CASE("orthographic projection hits the center pixel too") {
  GaussianCloud cloud;
  cloud.gaussians = {splat(Vec3(0, 0, 0), Vec3(0.3, 0.9, 0.5), 0.7, 0.02)};
  Camera cam = head_on(33);
  cam.orthographic = true;
  cam.ortho_half_height = 1.0;
  const Image img = render(cloud, cam);
  CHECK(img.at(16, 16, 1) == doctest::Approx(0.9 * 0.7).epsilon(1e-6));
}

TEST_CASE("camera contract violations raise") {
  const GaussianCloud cloud = cube_surface_cloud(10, 8);
  Camera cam = head_on(32);
  cam.fov_deg = 0.0;
  CHECK_THROWS_AS(render(cloud, cam), ContractError);
  cam = head_on(32);
  cam.width = 0;
  CHECK_THROWS_AS(render(cloud, cam), ContractError);
  cam = head_on(32);
  cam.eye = cam.look_at;
  CHECK_THROWS_AS(render(cloud, cam), ContractError);
  cam = head_on(32);
  cam.up = Vec3(0, 0, 1);  // parallel to the view direction
  CHECK_THROWS_AS(render(cloud, cam), ContractError);
}

TEST_CASE("png encoding is a faithful, deterministic container") {
  SUBCASE("black image round-trips to all-zero pixels") {
    const Image black(7, 5);
    const ParsedPng png = parse_png(encode_png(black));
    CHECK(png.width == 7);
    CHECK(png.height == 5);
    REQUIRE(png.pixels.size() == 7u * 5u * 3u);
    for (std::uint8_t v : png.pixels) CHECK(v == 0);
  }

  SUBCASE("quantization is round-half-up on the clamped value") {
    Image img(2, 1);
    img.at(0, 0, 0) = 0.5f;       // -> round(127.5) = 128
    img.at(0, 0, 1) = -0.25f;     // clamps to 0
    img.at(0, 0, 2) = 2.0f;       // clamps to 255
    img.at(1, 0, 0) = 1.0f / 255.0f;
    const ParsedPng png = parse_png(encode_png(img));
    CHECK(png.pixels[0] == 128);
    CHECK(png.pixels[1] == 0);
    CHECK(png.pixels[2] == 255);
    CHECK(png.pixels[3] == 1);
  }

  SUBCASE("a rendered fixture encodes to identical bytes across runs") {
    const GaussianCloud cloud = cube_surface_cloud(200, 9);
    const Camera cam = head_on(48);
    const std::vector<std::uint8_t> once = encode_png(render(cloud, cam));
    const std::vector<std::uint8_t> again = encode_png(render(cloud, cam));
    CHECK(once == again);

    save_png(render(cloud, cam), "render_fixture.png");
    std::ifstream in("render_fixture.png", std::ios::binary);
    const std::vector<std::uint8_t> disk((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
    CHECK(disk == once);

    const ParsedPng png = parse_png(once);
    CHECK(png.width == 48);
    CHECK(png.height == 48);
  }

  SUBCASE("unwritable path raises an io error") {
    CHECK_THROWS_AS(save_png(Image(2, 2), "/no_such_dir/out.png"), IoError);
  }
}
