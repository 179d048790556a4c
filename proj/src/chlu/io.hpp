#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chlu/data.hpp"

namespace chlu {

// ---------------------------------------------------------------------------
// Files

std::string read_text_file(const std::string& path);
std::vector<std::uint8_t> read_binary_file(const std::string& path);

// Writes to path + ".tmp" and renames, so readers never observe a partial
// file and a crashed write leaves the previous artifact intact.
void write_file_atomic(const std::string& path, const std::string& bytes);
void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& bytes);

// ---------------------------------------------------------------------------
// Key-value documents
//
// Line-oriented "key = value" text with a fixed first line "chlu-kv 1".
// Keys are dotted paths; values are raw strings, numbers at 17 significant
// digits, or length-prefixed number lists. Serialization preserves insertion
// order, so documents are byte deterministic.
class KvFile {
public:
  static KvFile parse(const std::string& text);
  static KvFile load(const std::string& path);

  std::string serialize() const;
  void save(const std::string& path) const;

  bool has(const std::string& key) const;
  std::size_t size() const { return entries_.size(); }

  void set(const std::string& key, std::string value);
  void set_double(const std::string& key, double v);
  void set_u64(const std::string& key, std::uint64_t v);
  void set_vec(const std::string& key, const Vec& v);       // "n v0 .. v{n-1}"
  void set_mat(const std::string& key, const Mat& m);       // "r c row-major"
  void set_ints(const std::string& key, const std::vector<int>& v);

  // Insertion-ordered view, for callers that validate every key.
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  const std::string& get(const std::string& key) const;     // FormatError if absent
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  Vec get_vec(const std::string& key) const;
  Mat get_mat(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;

  // Typed lookups that fall back to a default when the key is absent.
  double get_double_or(const std::string& key, double fallback) const;
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;

private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Checkpoints

struct CheckpointMeta {
  std::uint64_t format_version = 1;
  std::uint64_t epoch = 0;
  std::uint64_t seed = 0;
  std::string generator;     // dataset kind the model was trained on
  TrainConfig config;
  std::uint64_t created_unix = 0; // CHLU_CREATED_UNIX overrides, default 0
  Vec start_centroid;        // optional reference start for generation
};

// Single text document, bit-exact parameter round-trip. The creation
// timestamp defaults to 0 so identical runs produce identical bytes; set
// CHLU_CREATED_UNIX to stamp wall-clock time.
void save_checkpoint(const Model& m, const CheckpointMeta& meta,
                     const std::string& path);

struct LoadedCheckpoint {
  Model model;
  CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// CSV artifacts

// Header "step,t,q0..q{d-1},p0..p{d-1},H,T,V,C", one row per recorded step.
std::string trajectory_csv(const Trajectory& traj);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

// Dataset cache: "# chlu-dataset ..." metadata line, then
// "item,step,t,q0..q{d-1},p0..p{d-1}" rows.
std::string dataset_csv(const TrajectoryDataset& ds);
void write_dataset_csv(const TrajectoryDataset& ds, const std::string& path);
TrajectoryDataset parse_dataset_csv(const std::string& text);
TrajectoryDataset load_dataset_csv(const std::string& path);

// Reads one data row (0-based, metadata and header skipped) of a trajectory
// or dataset CSV back into a state.
PhaseState state_from_csv(const std::string& text, std::size_t row);

// ---------------------------------------------------------------------------
// Images

// Binary PGM (P5, maxval 255), images tiled left to right, cols per row.
// pixel = round(255 (x + 1) / 2), round half up, with x = tanh(q) when
// display_tanh else clamp(q, -1, 1).
std::string pgm_grid(const std::vector<Vec>& images, int w, int h, int cols,
                     bool display_tanh);
void write_pgm_grid(const std::vector<Vec>& images, int w, int h, int cols,
                    const std::string& path, bool display_tanh);

ImageDataset load_idx(const std::string& path);
void save_idx(const ImageDataset& ds, const std::string& path);

// ---------------------------------------------------------------------------
// Potential probing

struct ProbeSample {
  double x = 0, y = 0;
  double V = 0;          // learned potential plus confinement
  double fx = 0, fy = 0; // force components
};

// Regular resolution x resolution grid over [lo, hi]^2; planar models only.
std::vector<ProbeSample> probe_potential(const Model& m, double lo, double hi,
                                         int resolution);
std::string probe_csv(const std::vector<ProbeSample>& samples);

} // namespace chlu
