#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chlu/train.hpp"

namespace chlu {

// A generated corpus of target trajectories plus the integrator step size the
// samples are spaced by. Metadata travels with the file cache.
struct TrajectoryDataset {
  struct Item {
    PhaseState z0;
    Trajectory target;
  };

  std::vector<Item> items;
  double epsilon = 0.0;
  std::string generator; // "lemniscate", "sine"
  std::string params;    // generator parameter summary, "key=value;..." form
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return items.empty() ? 0 : items.front().z0.dim(); }
  void require_valid() const;
};

// Images as flat row-major vectors with pixels scaled to [-1, 1].
struct ImageDataset {
  std::vector<Vec> images;
  int width = 0;
  int height = 0;

  std::size_t count() const { return images.size(); }
  void require_valid() const;
};

// ---------------------------------------------------------------------------
// Trajectory generators

// Gerono lemniscate q(t) = (cos t, sin t cos t), p = dq/dt, with the phase
// advancing 2 pi / samples_per_cycle per sample. Returned times use epsilon
// so the series aligns with integrator steps when epsilon matches the phase
// spacing.
Trajectory lemniscate_series(double cycles, std::uint64_t samples_per_cycle,
                             double epsilon);

TrajectoryDataset lemniscate_dataset(double cycles, std::uint64_t samples_per_cycle,
                                     double epsilon);

// One-dimensional sine family: q(t) = sin(omega t), p(t) = omega cos(omega t)
// sampled at t_k = k epsilon, one frequency drawn uniformly per item.
TrajectoryDataset sine_dataset(std::size_t count, std::size_t length,
                               double omega_lo, double omega_hi,
                               std::uint64_t seed, double epsilon = 0.05);

// ---------------------------------------------------------------------------
// Images

// IDX ubyte image container: big-endian magic 0x00000803, three dimension
// sizes (count, rows, cols), then raw pixels. Bytes map to [-1, 1] via
// u / 127.5 - 1.
ImageDataset parse_idx(const std::uint8_t* data, std::size_t size);
ImageDataset parse_idx(const std::vector<std::uint8_t>& bytes);

// Inverse of parse_idx; pixel u = round((v + 1) * 127.5), round half up.
std::vector<std::uint8_t> write_idx(const ImageDataset& ds);

// Deterministic stand-in corpus: seven-segment digit glyphs (balanced classes,
// digit = index mod 10) with per-image shift, scale, and rotation jitter.
ImageDataset synthetic_digits(std::size_t count, int width, int height,
                              std::uint64_t seed);

// 2x2 mean pooling; requires even width and height.
ImageDataset mean_pool2(const ImageDataset& ds);

// Component-wise mean of all images plus sigma N(0, I).
Vec centroid_with_noise(const ImageDataset& ds, double sigma, std::uint64_t seed);

// Adds independent N(0, sigma^2) noise to every q and p component.
PhaseState perturb_state(const PhaseState& z, double sigma, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Batch construction

// Random contiguous windows of wake_steps + 1 states; z0 is the window head.
std::vector<TrainItem> sample_windows(const TrajectoryDataset& ds, std::size_t batch,
                                      std::uint64_t wake_steps, Rng& rng);

// Static wake items: the target holds (q = x, p = 0) at every compared step;
// the start state jitters q by sigma N(0, I).
std::vector<TrainItem> sample_static_batch(const ImageDataset& ds, std::size_t batch,
                                           std::uint64_t wake_steps, double sigma,
                                           Rng& rng);

} // namespace chlu
