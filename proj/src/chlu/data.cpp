#include "chlu/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "chlu/text.hpp"

namespace chlu {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

std::uint8_t quantize_unit(double v) {
  // [-1, 1] -> [0, 255], round half up.
  double u = std::floor((v + 1.0) * 127.5 + 0.5);
  if (u < 0.0) u = 0.0;
  if (u > 255.0) u = 255.0;
  return static_cast<std::uint8_t>(u);
}

} // namespace

void TrajectoryDataset::require_valid() const {
  if (items.empty()) throw InvalidArgument("trajectory dataset: no items");
  if (!(epsilon > 0.0)) throw InvalidArgument("trajectory dataset: epsilon must be > 0");
  const Eigen::Index d = items.front().z0.dim();
  for (const Item& it : items) {
    it.z0.require_valid();
    if (it.z0.dim() != d)
      throw InvalidArgument("trajectory dataset: mixed dimensions");
    if (it.target.states.empty())
      throw InvalidArgument("trajectory dataset: empty target");
    for (const PhaseState& z : it.target.states) {
      z.require_valid();
      if (z.dim() != d) throw InvalidArgument("trajectory dataset: mixed dimensions");
    }
  }
}

void ImageDataset::require_valid() const {
  if (width < 1 || height < 1)
    throw InvalidArgument("image dataset: width and height must be >= 1");
  const Eigen::Index n = static_cast<Eigen::Index>(width) * height;
  for (const Vec& img : images) {
    if (img.size() != n) throw InvalidArgument("image dataset: pixel count mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(img(i) >= -1.0 && img(i) <= 1.0))
        throw InvalidArgument("image dataset: pixel out of [-1, 1]");
  }
}

// ---------------------------------------------------------------------------
// Trajectory generators

Trajectory lemniscate_series(double cycles, std::uint64_t samples_per_cycle,
                             double epsilon) {
  if (!(cycles > 0.0)) throw InvalidArgument("lemniscate: cycles must be > 0");
  if (samples_per_cycle < 8)
    throw InvalidArgument("lemniscate: samples_per_cycle must be >= 8");
  if (!(epsilon > 0.0)) throw InvalidArgument("lemniscate: epsilon must be > 0");

  const double dphase = kTau / static_cast<double>(samples_per_cycle);
  const std::uint64_t n =
      static_cast<std::uint64_t>(
          std::llround(cycles * static_cast<double>(samples_per_cycle))) +
      1;

  Trajectory traj;
  traj.states.reserve(n);
  traj.times.reserve(n);
  traj.steps.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dphase;
    Vec q(2), p(2);
    q << std::cos(t), std::sin(t) * std::cos(t);
    p << -std::sin(t), std::cos(2.0 * t);
    traj.states.emplace_back(std::move(q), std::move(p));
    traj.times.push_back(static_cast<double>(k) * epsilon);
    traj.steps.push_back(k);
  }
  return traj;
}

TrajectoryDataset lemniscate_dataset(double cycles, std::uint64_t samples_per_cycle,
                                     double epsilon) {
  TrajectoryDataset ds;
  ds.epsilon = epsilon;
  ds.generator = "lemniscate";
  ds.params = "cycles=" + format_double(cycles) +
              ";samples_per_cycle=" + format_u64(samples_per_cycle);
  Trajectory traj = lemniscate_series(cycles, samples_per_cycle, epsilon);
  TrajectoryDataset::Item item;
  item.z0 = traj.states.front();
  item.target = std::move(traj);
  ds.items.push_back(std::move(item));
  return ds;
}

TrajectoryDataset sine_dataset(std::size_t count, std::size_t length,
                               double omega_lo, double omega_hi,
                               std::uint64_t seed, double epsilon) {
  if (count < 1 || length < 1)
    throw InvalidArgument("sine: count and length must be >= 1");
  if (!(omega_lo < omega_hi))
    throw InvalidArgument("sine: need omega_lo < omega_hi");
  if (!(epsilon > 0.0)) throw InvalidArgument("sine: epsilon must be > 0");

  Rng rng = Rng::stream(seed, "sine-omega");
  TrajectoryDataset ds;
  ds.epsilon = epsilon;
  ds.generator = "sine";
  ds.params = "count=" + format_u64(count) + ";length=" + format_u64(length) +
              ";omega=" + format_double(omega_lo) + ":" + format_double(omega_hi);
  ds.seed = seed;
  ds.items.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double omega = rng.uniform(omega_lo, omega_hi);
    TrajectoryDataset::Item item;
    item.target.states.reserve(length);
    item.target.times.reserve(length);
    item.target.steps.reserve(length);
    for (std::size_t k = 0; k < length; ++k) {
      const double t = static_cast<double>(k) * epsilon;
      Vec q(1), p(1);
      q << std::sin(omega * t);
      p << omega * std::cos(omega * t);
      item.target.states.emplace_back(std::move(q), std::move(p));
      item.target.times.push_back(t);
      item.target.steps.push_back(k);
    }
    item.z0 = item.target.states.front();
    ds.items.push_back(std::move(item));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Images

ImageDataset parse_idx(const std::uint8_t* data, std::size_t size) {
  auto need = [&](std::size_t offset, std::size_t n) {
    if (n > size || offset > size - n)
      throw FormatError("idx: unexpected end of data at byte offset " +
                        std::to_string(size) + " (need " +
                        std::to_string(offset + n) + " bytes)");
  };
  auto read_u32 = [&](std::size_t offset) -> std::uint32_t {
    need(offset, 4);
    return (static_cast<std::uint32_t>(data[offset]) << 24) |
           (static_cast<std::uint32_t>(data[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(data[offset + 2]) << 8) |
           static_cast<std::uint32_t>(data[offset + 3]);
  };

  const std::uint32_t magic = read_u32(0);
  if (magic != 0x00000803u) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "idx: bad magic 0x%08x at byte offset 0", magic);
    throw FormatError(buf);
  }
  const std::uint32_t count = read_u32(4);
  const std::uint32_t rows = read_u32(8);
  const std::uint32_t cols = read_u32(12);
  if (rows == 0 || cols == 0)
    throw FormatError("idx: zero image dimensions at byte offset 8");

  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  need(16, static_cast<std::size_t>(count) * pixels);

  ImageDataset ds;
  ds.width = static_cast<int>(cols);
  ds.height = static_cast<int>(rows);
  ds.images.reserve(count);
  std::size_t offset = 16;
  for (std::uint32_t i = 0; i < count; ++i) {
    Vec img(static_cast<Eigen::Index>(pixels));
    for (std::size_t j = 0; j < pixels; ++j)
      img(static_cast<Eigen::Index>(j)) =
          static_cast<double>(data[offset + j]) / 127.5 - 1.0;
    offset += pixels;
    ds.images.push_back(std::move(img));
  }
  return ds;
}

ImageDataset parse_idx(const std::vector<std::uint8_t>& bytes) {
  return parse_idx(bytes.data(), bytes.size());
}

std::vector<std::uint8_t> write_idx(const ImageDataset& ds) {
  ds.require_valid();
  const std::size_t pixels = static_cast<std::size_t>(ds.width) * ds.height;
  std::vector<std::uint8_t> out;
  out.reserve(16 + ds.images.size() * pixels);
  auto push_u32 = [&](std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  };
  push_u32(0x00000803u);
  push_u32(static_cast<std::uint32_t>(ds.images.size()));
  push_u32(static_cast<std::uint32_t>(ds.height));
  push_u32(static_cast<std::uint32_t>(ds.width));
  for (const Vec& img : ds.images)
    for (Eigen::Index i = 0; i < img.size(); ++i)
      out.push_back(quantize_unit(img(i)));
  return out;
}

ImageDataset synthetic_digits(std::size_t count, int width, int height,
                              std::uint64_t seed) {
  if (width < 8 || height < 8)
    throw InvalidArgument("synthetic digits: need at least 8x8 pixels");

  // Seven-segment endpoints in unit coordinates (y grows downward).
  struct Seg { double x0, y0, x1, y1; };
  static const Seg segs[7] = {
      {0.25, 0.15, 0.75, 0.15}, // A top
      {0.75, 0.15, 0.75, 0.50}, // B top right
      {0.75, 0.50, 0.75, 0.85}, // C bottom right
      {0.25, 0.85, 0.75, 0.85}, // D bottom
      {0.25, 0.50, 0.25, 0.85}, // E bottom left
      {0.25, 0.15, 0.25, 0.50}, // F top left
      {0.25, 0.50, 0.75, 0.50}, // G middle
  };
  static const std::uint8_t masks[10] = {
      0b0111111, // 0: ABCDEF
      0b0000110, // 1: BC
      0b1011011, // 2: ABDEG
      0b1001111, // 3: ABCDG
      0b1100110, // 4: BCFG
      0b1101101, // 5: ACDFG
      0b1111101, // 6: ACDEFG
      0b0000111, // 7: ABC
      0b1111111, // 8
      0b1101111, // 9: ABCDFG
  };

  Rng rng = Rng::stream(seed, "synthetic-images");
  ImageDataset ds;
  ds.width = width;
  ds.height = height;
  ds.images.reserve(count);

  const double sigma = 0.055;
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> intensity(static_cast<std::size_t>(width) * height);

  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t mask = masks[i % 10];
    const double dx = rng.uniform(-0.06, 0.06);
    const double dy = rng.uniform(-0.06, 0.06);
    const double scale = rng.uniform(0.85, 1.1);
    const double theta = rng.uniform(-0.12, 0.12);
    const double ct = std::cos(theta), st = std::sin(theta);
    auto map_x = [&](double x, double y) {
      return 0.5 + scale * (ct * (x - 0.5) - st * (y - 0.5)) + dx;
    };
    auto map_y = [&](double x, double y) {
      return 0.5 + scale * (st * (x - 0.5) + ct * (y - 0.5)) + dy;
    };

    std::fill(intensity.begin(), intensity.end(), 0.0);
    for (int s = 0; s < 7; ++s) {
      if (!(mask & (1u << s))) continue;
      const double ax = map_x(segs[s].x0, segs[s].y0), ay = map_y(segs[s].x0, segs[s].y0);
      const double bx = map_x(segs[s].x1, segs[s].y1), by = map_y(segs[s].x1, segs[s].y1);
      const int samples = 48;
      for (int k = 0; k < samples; ++k) {
        const double f = static_cast<double>(k) / (samples - 1);
        const double cx = ax + f * (bx - ax);
        const double cy = ay + f * (by - ay);
        const int px_lo = std::max(0, static_cast<int>(std::floor((cx - 3 * sigma) * width)));
        const int px_hi = std::min(width - 1, static_cast<int>(std::ceil((cx + 3 * sigma) * width)));
        const int py_lo = std::max(0, static_cast<int>(std::floor((cy - 3 * sigma) * height)));
        const int py_hi = std::min(height - 1, static_cast<int>(std::ceil((cy + 3 * sigma) * height)));
        for (int py = py_lo; py <= py_hi; ++py) {
          const double yy = (py + 0.5) / height - cy;
          for (int px = px_lo; px <= px_hi; ++px) {
            const double xx = (px + 0.5) / width - cx;
            intensity[static_cast<std::size_t>(py) * width + px] +=
                std::exp(-(xx * xx + yy * yy) * inv2s2);
          }
        }
      }
    }

    Vec img(static_cast<Eigen::Index>(intensity.size()));
    for (std::size_t j = 0; j < intensity.size(); ++j) {
      const double u = std::floor(255.0 * std::min(1.0, intensity[j]) + 0.5);
      img(static_cast<Eigen::Index>(j)) = u / 127.5 - 1.0;
    }
    ds.images.push_back(std::move(img));
  }
  return ds;
}

ImageDataset mean_pool2(const ImageDataset& ds) {
  ds.require_valid();
  if (ds.width % 2 != 0 || ds.height % 2 != 0)
    throw InvalidArgument("mean pool: width and height must be even");
  ImageDataset out;
  out.width = ds.width / 2;
  out.height = ds.height / 2;
  out.images.reserve(ds.images.size());
  for (const Vec& img : ds.images) {
    Vec pooled(static_cast<Eigen::Index>(out.width) * out.height);
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x) {
        const auto at = [&](int yy, int xx) {
          return img(static_cast<Eigen::Index>(yy) * ds.width + xx);
        };
        pooled(static_cast<Eigen::Index>(y) * out.width + x) =
            0.25 * (at(2 * y, 2 * x) + at(2 * y, 2 * x + 1) +
                    at(2 * y + 1, 2 * x) + at(2 * y + 1, 2 * x + 1));
      }
    out.images.push_back(std::move(pooled));
  }
  return out;
}

Vec centroid_with_noise(const ImageDataset& ds, double sigma, std::uint64_t seed) {
  if (ds.images.empty()) throw InvalidArgument("centroid: empty dataset");
  if (!(sigma >= 0.0)) throw InvalidArgument("centroid: sigma must be >= 0");
  Vec mean = Vec::Zero(ds.images.front().size());
  for (const Vec& img : ds.images) {
    if (img.size() != mean.size())
      throw InvalidArgument("centroid: pixel count mismatch");
    mean += img;
  }
  mean /= static_cast<double>(ds.images.size());
  if (sigma > 0.0) {
    Rng rng = Rng::stream(seed, "centroid-noise");
    for (Eigen::Index i = 0; i < mean.size(); ++i) mean(i) += sigma * rng.normal();
  }
  return mean;
}

PhaseState perturb_state(const PhaseState& z, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("perturb: sigma must be >= 0");
  z.require_valid();
  PhaseState out = z;
  if (sigma > 0.0) {
    Rng rng = Rng::stream(seed, "perturb-state");
    for (Eigen::Index i = 0; i < out.q.size(); ++i) out.q(i) += sigma * rng.normal();
    for (Eigen::Index i = 0; i < out.p.size(); ++i) out.p(i) += sigma * rng.normal();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch construction

std::vector<TrainItem> sample_windows(const TrajectoryDataset& ds, std::size_t batch,
                                      std::uint64_t wake_steps, Rng& rng) {
  ds.require_valid();
  if (batch < 1) throw InvalidArgument("window batch: batch must be >= 1");

  std::vector<TrainItem> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const TrajectoryDataset::Item& item = ds.items[rng.index(ds.items.size())];
    const std::size_t len = item.target.states.size();
    if (len < wake_steps + 1)
      throw InvalidArgument("window batch: target shorter than wake window");
    const std::size_t start = rng.index(len - wake_steps);
    TrainItem ti;
    ti.z0 = item.target.states[start];
    ti.target.states.assign(item.target.states.begin() + start,
                            item.target.states.begin() + start + wake_steps + 1);
    out.push_back(std::move(ti));
  }
  return out;
}

std::vector<TrainItem> sample_static_batch(const ImageDataset& ds, std::size_t batch,
                                           std::uint64_t wake_steps, double sigma,
                                           Rng& rng) {
  if (ds.images.empty()) throw InvalidArgument("static batch: empty dataset");
  if (batch < 1) throw InvalidArgument("static batch: batch must be >= 1");
  if (!(sigma >= 0.0)) throw InvalidArgument("static batch: sigma must be >= 0");

  std::vector<TrainItem> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const Vec& x = ds.images[rng.index(ds.images.size())];
    PhaseState rest(x, Vec::Zero(x.size()));
    TrainItem ti;
    ti.target.states.assign(wake_steps + 1, rest);
    ti.z0 = rest;
    if (sigma > 0.0)
      for (Eigen::Index j = 0; j < ti.z0.q.size(); ++j)
        ti.z0.q(j) += sigma * rng.normal();
    out.push_back(std::move(ti));
  }
  return out;
}

} // namespace chlu
