#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "chlu/data.hpp"
#include "support/oracles.hpp"

using namespace chlu;

// ---------------------------------------------------------------------------
// Lemniscate

TEST_CASE("lemniscate hits its anchor points") {
  const Trajectory traj = lemniscate_series(1.0, 200, 0.01);
  REQUIRE(traj.states.size() == 201);

  // t = 0: q = (1, 0), p = (-sin 0, cos 0) = (0, 1).
  CHECK(traj.states[0].q(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(traj.states[0].q(1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(traj.states[0].p(0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(traj.states[0].p(1) == doctest::Approx(1.0).epsilon(1e-15));

  // t = pi/2 (a quarter cycle in): the crossing point q = (0, 0).
  const PhaseState& quarter = traj.states[50];
  CHECK(std::abs(quarter.q(0)) < 1e-12);
  CHECK(std::abs(quarter.q(1)) < 1e-12);
  CHECK(quarter.p(0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(quarter.p(1) == doctest::Approx(-1.0).epsilon(1e-12));

  CHECK(traj.times[3] == 3 * 0.01);
  CHECK(traj.steps[3] == 3);
}

TEST_CASE("lemniscate is periodic over whole cycles") {
  const Trajectory traj = lemniscate_series(3.0, 128, 0.05);
  REQUIRE(traj.states.size() == 3 * 128 + 1);
  for (std::size_t k = 0; k + 128 < traj.states.size(); k += 17) {
    CHECK(oracles::max_abs_diff(traj.states[k].q, traj.states[k + 128].q) < 1e-9);
    CHECK(oracles::max_abs_diff(traj.states[k].p, traj.states[k + 128].p) < 1e-9);
  }
}

TEST_CASE("lemniscate dataset carries its provenance") {
  const TrajectoryDataset ds = lemniscate_dataset(2.0, 100, 0.02);
  ds.require_valid();
  REQUIRE(ds.items.size() == 1);
  CHECK(ds.dim() == 2);
  CHECK(ds.generator == "lemniscate");
  CHECK(ds.epsilon == 0.02);
  CHECK(oracles::max_abs_diff(ds.items[0].z0.q, ds.items[0].target.states[0].q) == 0.0);
}

// ---------------------------------------------------------------------------
// Sine family

TEST_CASE("sine items live on their phase circle") {
  const TrajectoryDataset ds = sine_dataset(6, 40, 0.7, 2.3, 99, 0.05);
  ds.require_valid();
  REQUIRE(ds.items.size() == 6);
  CHECK(ds.generator == "sine");

  for (const TrajectoryDataset::Item& item : ds.items) {
    REQUIRE(item.target.states.size() == 40);
    // Recover omega from the first step: p(0) = omega cos(0) = omega.
    const double omega = item.target.states[0].p(0);
    CHECK(omega >= 0.7);
    CHECK(omega <= 2.3);
    for (std::size_t k = 0; k < item.target.states.size(); ++k) {
      const double q = item.target.states[k].q(0);
      const double p = item.target.states[k].p(0);
      CHECK(std::abs(q * q + (p / omega) * (p / omega) - 1.0) < 1e-12);
      const double t = static_cast<double>(k) * 0.05;
      CHECK(q == doctest::Approx(std::sin(omega * t)).epsilon(1e-12));
    }
  }

  // Frequencies differ across items and are seed stable.
  const TrajectoryDataset again = sine_dataset(6, 40, 0.7, 2.3, 99, 0.05);
  CHECK(again.items[3].target.states[0].p(0) == ds.items[3].target.states[0].p(0));
  CHECK(ds.items[0].target.states[0].p(0) != ds.items[1].target.states[0].p(0));
}

// ---------------------------------------------------------------------------
// IDX container

namespace {

std::vector<std::uint8_t> idx_fixture() {
  // Two 2x2 images: [0, 255, 0, 255] and [255, 0, 255, 0].
  return {0x00, 0x00, 0x08, 0x03, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02,
          0x00, 0x00, 0x00, 0x02, 0,    255,  0,    255,  255,  0,    255,  0};
}

} // namespace

TEST_CASE("idx fixture decodes to signed pixel values") {
  const ImageDataset ds = parse_idx(idx_fixture());
  REQUIRE(ds.count() == 2);
  CHECK(ds.width == 2);
  CHECK(ds.height == 2);
  Vec first(4), second(4);
  first << -1.0, 1.0, -1.0, 1.0;
  second << 1.0, -1.0, 1.0, -1.0;
  CHECK(oracles::max_abs_diff(ds.images[0], first) == 0.0);
  CHECK(oracles::max_abs_diff(ds.images[1], second) == 0.0);
}

TEST_CASE("every byte value survives the signed round trip") {
  ImageDataset ds;
  ds.width = 16;
  ds.height = 16;
  Vec img(256);
  for (int u = 0; u < 256; ++u) img(u) = u / 127.5 - 1.0;
  ds.images.push_back(img);

  const std::vector<std::uint8_t> bytes = write_idx(ds);
  const ImageDataset back = parse_idx(bytes);
  REQUIRE(back.count() == 1);
  CHECK(oracles::max_abs_diff(back.images[0], img) == 0.0);
  for (int u = 0; u < 256; ++u)
    CHECK(bytes[16 + u] == static_cast<std::uint8_t>(u));
}

TEST_CASE("idx rejects a wrong magic with its offset") {
  std::vector<std::uint8_t> bytes = idx_fixture();
  bytes[2] = 0x07;
  try {
    parse_idx(bytes);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    const std::string what = e.what();
    CHECK(what.find("bad magic") != std::string::npos);
    CHECK(what.find("0x00000703") != std::string::npos);
    CHECK(what.find("byte offset 0") != std::string::npos);
  }
}

TEST_CASE("idx rejects truncated payloads with the byte position") {
  std::vector<std::uint8_t> bytes = idx_fixture();
  bytes.resize(bytes.size() - 3);
  try {
    parse_idx(bytes);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    const std::string what = e.what();
    CHECK(what.find("unexpected end of data") != std::string::npos);
    CHECK(what.find("byte offset 21") != std::string::npos);
  }

  // Header alone is also too short.
  std::vector<std::uint8_t> header = idx_fixture();
  header.resize(10);
  CHECK_THROWS_AS(parse_idx(header), FormatError);
}

TEST_CASE("idx rejects zero dimensions") {
  std::vector<std::uint8_t> bytes = idx_fixture();
  bytes[11] = 0; // rows = 0
  bytes.resize(16);
  CHECK_THROWS_AS(parse_idx(bytes), FormatError);
}

// ---------------------------------------------------------------------------
// Synthetic digits

TEST_CASE("synthetic digits are deterministic and bounded") {
  const ImageDataset a = synthetic_digits(20, 28, 28, 4);
  const ImageDataset b = synthetic_digits(20, 28, 28, 4);
  const ImageDataset c = synthetic_digits(20, 28, 28, 5);
  a.require_valid();
  REQUIRE(a.count() == 20);
  CHECK(a.width == 28);
  CHECK(a.height == 28);

  double lo = 1e9, hi = -1e9;
  for (std::size_t i = 0; i < a.count(); ++i) {
    CHECK(oracles::max_abs_diff(a.images[i], b.images[i]) == 0.0);
    lo = std::min(lo, a.images[i].minCoeff());
    hi = std::max(hi, a.images[i].maxCoeff());
  }
  CHECK(lo >= -1.0);
  CHECK(hi <= 1.0);
  CHECK(hi > 0.0); // glyph strokes are lit
  CHECK(oracles::max_abs_diff(a.images[0], c.images[0]) > 0.0);

  // Same digit class every ten images, but the jitter differs per image.
  CHECK(oracles::max_abs_diff(a.images[0], a.images[10]) > 0.0);
  CHECK_THROWS_AS(synthetic_digits(1, 4, 4, 0), InvalidArgument);
}

TEST_CASE("digit classes have distinct glyphs") {
  const ImageDataset ds = synthetic_digits(10, 28, 28, 0);
  for (int i = 1; i < 10; ++i)
    CHECK(oracles::max_abs_diff(ds.images[0], ds.images[i]) > 0.1);
}

// ---------------------------------------------------------------------------
// Pooling, centroid, perturbation

TEST_CASE("mean pooling averages 2x2 blocks") {
  ImageDataset ds;
  ds.width = 4;
  ds.height = 2;
  Vec img(8);
  img << 0.0, 1.0, 0.5, -0.5, 0.0, -1.0, 0.5, 0.5;
  ds.images.push_back(img);

  const ImageDataset pooled = mean_pool2(ds);
  CHECK(pooled.width == 2);
  CHECK(pooled.height == 1);
  REQUIRE(pooled.images[0].size() == 2);
  CHECK(pooled.images[0](0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(pooled.images[0](1) == doctest::Approx(0.25).epsilon(1e-15));

  ImageDataset odd;
  odd.width = 3;
  odd.height = 2;
  odd.images.push_back(Vec::Zero(6));
  CHECK_THROWS_AS(mean_pool2(odd), InvalidArgument);
}

TEST_CASE("centroid with and without noise") {
  ImageDataset ds;
  ds.width = 2;
  ds.height = 1;
  Vec a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  ds.images = {a, b};

  const Vec exact = centroid_with_noise(ds, 0.0, 1);
  CHECK(exact(0) == 0.5);
  CHECK(exact(1) == 0.5);

  const Vec noisy = centroid_with_noise(ds, 0.3, 1);
  const Vec noisy_again = centroid_with_noise(ds, 0.3, 1);
  CHECK(oracles::max_abs_diff(noisy, exact) > 0.0);
  CHECK(oracles::max_abs_diff(noisy, noisy_again) == 0.0);

  CHECK_THROWS_AS(centroid_with_noise(ImageDataset{}, 0.0, 1), InvalidArgument);
}

TEST_CASE("state perturbation at zero sigma is the identity") {
  Vec q(2), p(2);
  q << 0.3, -0.7;
  p << 1.0, 0.0;
  const PhaseState z(q, p);
  const PhaseState same = perturb_state(z, 0.0, 5);
  CHECK(oracles::max_abs_diff(same.q, z.q) == 0.0);
  CHECK(oracles::max_abs_diff(same.p, z.p) == 0.0);

  const PhaseState moved = perturb_state(z, 0.5, 5);
  CHECK(oracles::max_abs_diff(moved.q, z.q) > 0.0);
  const PhaseState moved_again = perturb_state(z, 0.5, 5);
  CHECK(oracles::max_abs_diff(moved.q, moved_again.q) == 0.0);
}

// ---------------------------------------------------------------------------
// Batch builders

TEST_CASE("trajectory windows align head states and length") {
  const TrajectoryDataset ds = lemniscate_dataset(2.0, 50, 0.1);
  Rng rng(7);
  const std::vector<TrainItem> batch = sample_windows(ds, 8, 10, rng);
  REQUIRE(batch.size() == 8);
  for (const TrainItem& item : batch) {
    REQUIRE(item.target.states.size() == 11);
    CHECK(oracles::max_abs_diff(item.z0.q, item.target.states[0].q) == 0.0);
    CHECK(oracles::max_abs_diff(item.z0.p, item.target.states[0].p) == 0.0);
  }

  const TrajectoryDataset tiny = sine_dataset(1, 5, 1.0, 2.0, 0);
  CHECK_THROWS_AS(sample_windows(tiny, 1, 10, rng), InvalidArgument);
}

TEST_CASE("static batches pin the target and jitter the start") {
  const ImageDataset digits = synthetic_digits(4, 8, 8, 3);
  Rng rng(8);
  const std::vector<TrainItem> batch = sample_static_batch(digits, 5, 6, 0.1, rng);
  REQUIRE(batch.size() == 5);
  for (const TrainItem& item : batch) {
    REQUIRE(item.target.states.size() == 7);
    CHECK(item.z0.dim() == 64);
    CHECK(item.z0.p.norm() == 0.0);
    const Vec& x = item.target.states[0].q;
    for (const PhaseState& s : item.target.states) {
      CHECK(oracles::max_abs_diff(s.q, x) == 0.0);
      CHECK(s.p.norm() == 0.0);
    }
    // Start jittered around the pinned image.
    CHECK(oracles::max_abs_diff(item.z0.q, x) > 0.0);
    CHECK(oracles::max_abs_diff(item.z0.q, x) < 1.0);
  }

  const std::vector<TrainItem> clean = sample_static_batch(digits, 2, 6, 0.0, rng);
  CHECK(oracles::max_abs_diff(clean[0].z0.q, clean[0].target.states[0].q) == 0.0);
}
