#include "chlu/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <utility>

#include "chlu/text.hpp"

namespace chlu {

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_char(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string_view> split_lines(const std::string& text) {
  std::vector<std::string_view> lines = split_char(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (std::string_view& line : lines)
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return lines;
}

void write_raw(const std::string& path, const char* data, std::size_t n) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out.write(data, static_cast<std::streamsize>(n));
    out.flush();
    if (!out.good()) throw IoError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
}

} // namespace

// ---------------------------------------------------------------------------
// Files

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string out((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return out;
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  const std::string text = read_text_file(path);
  return std::vector<std::uint8_t>(text.begin(), text.end());
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  write_raw(path, bytes.data(), bytes.size());
}

void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  write_raw(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

// ---------------------------------------------------------------------------
// KvFile

KvFile KvFile::parse(const std::string& text) {
  const std::vector<std::string_view> lines = split_lines(text);
  if (lines.empty() || lines[0] != "chlu-kv 1")
    throw FormatError("not a chlu-kv file (bad header line)");

  KvFile kv;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.empty() || line.front() == '#') continue;
    const std::size_t pos = line.find(" = ");
    if (pos == std::string_view::npos || pos == 0)
      throw FormatError("key-value file: bad line " + format_u64(i + 1));
    std::string key(line.substr(0, pos));
    if (kv.index_.count(key))
      throw FormatError("key-value file: duplicate key '" + key + "'");
    kv.set(std::move(key), std::string(line.substr(pos + 3)));
  }
  return kv;
}

KvFile KvFile::load(const std::string& path) { return parse(read_text_file(path)); }

std::string KvFile::serialize() const {
  std::string out = "chlu-kv 1\n";
  for (const auto& [key, value] : entries_) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

void KvFile::save(const std::string& path) const {
  write_file_atomic(path, serialize());
}

bool KvFile::has(const std::string& key) const { return index_.count(key) > 0; }

void KvFile::set(const std::string& key, std::string value) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    entries_[it->second].second = std::move(value);
    return;
  }
  index_.emplace(key, entries_.size());
  entries_.emplace_back(key, std::move(value));
}

void KvFile::set_double(const std::string& key, double v) { set(key, format_double_17(v)); }
void KvFile::set_u64(const std::string& key, std::uint64_t v) { set(key, format_u64(v)); }

void KvFile::set_vec(const std::string& key, const Vec& v) {
  std::string s = format_u64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    s += ' ';
    s += format_double_17(v(i));
  }
  set(key, std::move(s));
}

void KvFile::set_mat(const std::string& key, const Mat& m) {
  std::string s = format_u64(static_cast<std::uint64_t>(m.rows())) + " " +
                  format_u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      s += ' ';
      s += format_double_17(m(r, c));
    }
  set(key, std::move(s));
}

void KvFile::set_ints(const std::string& key, const std::vector<int>& v) {
  std::string s = format_u64(v.size());
  for (int x : v) {
    s += ' ';
    s += format_u64(static_cast<std::uint64_t>(x));
  }
  set(key, std::move(s));
}

const std::string& KvFile::get(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw FormatError("missing key '" + key + "'");
  return entries_[it->second].second;
}

double KvFile::get_double(const std::string& key) const {
  return parse_double(get(key));
}

std::uint64_t KvFile::get_u64(const std::string& key) const {
  return parse_u64(get(key));
}

Vec KvFile::get_vec(const std::string& key) const {
  const std::vector<std::string_view> tok = split_ws(get(key));
  if (tok.empty()) throw FormatError("key '" + key + "': empty vector value");
  const std::uint64_t n = parse_u64(tok[0]);
  if (tok.size() != n + 1)
    throw FormatError("key '" + key + "': expected " + format_u64(n) + " values, found " +
                      format_u64(tok.size() - 1));
  Vec v(static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i)
    v(static_cast<Eigen::Index>(i)) = parse_double(tok[i + 1]);
  return v;
}

Mat KvFile::get_mat(const std::string& key) const {
  const std::vector<std::string_view> tok = split_ws(get(key));
  if (tok.size() < 2) throw FormatError("key '" + key + "': bad matrix value");
  const std::uint64_t r = parse_u64(tok[0]);
  const std::uint64_t c = parse_u64(tok[1]);
  if (tok.size() != r * c + 2)
    throw FormatError("key '" + key + "': expected " + format_u64(r * c) +
                      " values, found " + format_u64(tok.size() - 2));
  Mat m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  std::size_t k = 2;
  for (std::uint64_t i = 0; i < r; ++i)
    for (std::uint64_t j = 0; j < c; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_double(tok[k++]);
  return m;
}

std::vector<int> KvFile::get_ints(const std::string& key) const {
  const std::vector<std::string_view> tok = split_ws(get(key));
  if (tok.empty()) throw FormatError("key '" + key + "': empty list value");
  const std::uint64_t n = parse_u64(tok[0]);
  if (tok.size() != n + 1)
    throw FormatError("key '" + key + "': expected " + format_u64(n) + " values, found " +
                      format_u64(tok.size() - 1));
  std::vector<int> v(n);
  for (std::uint64_t i = 0; i < n; ++i)
    v[i] = static_cast<int>(parse_i64(tok[i + 1]));
  return v;
}

double KvFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::uint64_t KvFile::get_u64_or(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_u64(key) : fallback;
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(const Model& m, const CheckpointMeta& meta,
                     const std::string& path) {
  m.require_valid();
  const PotentialNet* net = m.net();
  if (!net) throw InvalidArgument("checkpoint: model has no trainable potential");

  KvFile kv;
  kv.set("format", "chlu-checkpoint");
  kv.set_u64("format_version", meta.format_version);

  std::uint64_t created = meta.created_unix;
  if (const char* env = std::getenv("CHLU_CREATED_UNIX")) created = parse_u64(env);
  kv.set_u64("created_unix", created);

  kv.set_u64("model.d", static_cast<std::uint64_t>(m.dim()));
  kv.set_ints("model.layer_dims", net->layer_dims());
  kv.set_double("model.c", m.governor.c);
  kv.set_double("model.m0", m.governor.m0);
  kv.set_double("model.alpha", m.alpha);
  kv.set_vec("model.log_mass", m.governor.log_mass);

  for (std::size_t l = 0; l < net->weights().size(); ++l) {
    kv.set_mat("param.w" + format_u64(l), net->weights()[l]);
    kv.set_vec("param.b" + format_u64(l), net->biases()[l]);
  }

  kv.set("train.generator", meta.generator.empty() ? "none" : meta.generator);
  kv.set_u64("train.epoch", meta.epoch);
  kv.set_u64("train.seed", meta.seed);
  const TrainConfig& c = meta.config;
  kv.set_double("train.eta", c.eta);
  kv.set_double("train.lambda", c.lambda);
  kv.set_double("train.beta_mse", c.beta_mse);
  kv.set_double("train.beta_cd", c.beta_cd);
  kv.set_double("train.epsilon", c.epsilon);
  kv.set_u64("train.wake_steps", c.wake_steps);
  kv.set_u64("train.sleep_steps", c.sleep_steps);
  kv.set_u64("train.buffer_capacity", c.buffer_capacity);
  kv.set_double("train.buffer_reinit_prob", c.buffer_reinit_prob);
  kv.set_u64("train.epochs", c.epochs);
  kv.set_u64("train.batch_size", c.batch_size);
  kv.set_double("train.grad_clip", c.grad_clip);
  kv.set_double("train.lyap_delta", c.lyap_delta);
  kv.set_double("train.sigma_init", c.sigma_init);

  if (meta.start_centroid.size() > 0)
    kv.set_vec("start.centroid", meta.start_centroid);

  kv.save(path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const KvFile kv = KvFile::load(path);
  if (!kv.has("format") || kv.get("format") != "chlu-checkpoint")
    throw FormatError("not a checkpoint file");
  const std::uint64_t version = kv.get_u64("format_version");
  if (version != 1)
    throw FormatError("unsupported checkpoint format_version " + format_u64(version));

  const std::uint64_t d = kv.get_u64("model.d");
  const std::vector<int> layer_dims = kv.get_ints("model.layer_dims");
  if (layer_dims.empty() || layer_dims.front() != static_cast<int>(d))
    throw FormatError("checkpoint shape inconsistency: layer_dims do not start at d");

  PotentialNet net(layer_dims);
  for (std::size_t l = 0; l < net.weights().size(); ++l) {
    Mat w = kv.get_mat("param.w" + format_u64(l));
    Vec b = kv.get_vec("param.b" + format_u64(l));
    if (w.rows() != net.weights()[l].rows() || w.cols() != net.weights()[l].cols() ||
        b.size() != net.biases()[l].size())
      throw FormatError("checkpoint shape inconsistency: param layer " + format_u64(l) +
                        " does not match layer_dims");
    net.weights()[l] = std::move(w);
    net.biases()[l] = std::move(b);
  }

  Vec log_mass = kv.get_vec("model.log_mass");
  if (log_mass.size() != static_cast<Eigen::Index>(d))
    throw FormatError("checkpoint shape inconsistency: log_mass length");

  LoadedCheckpoint out;
  out.model = Model(
      KineticGovernor(kv.get_double("model.c"), kv.get_double("model.m0"),
                      std::move(log_mass)),
      std::make_shared<PotentialNet>(std::move(net)), kv.get_double("model.alpha"));

  CheckpointMeta& meta = out.meta;
  meta.format_version = version;
  meta.created_unix = kv.get_u64_or("created_unix", 0);
  meta.generator = kv.has("train.generator") ? kv.get("train.generator") : "none";
  meta.epoch = kv.get_u64_or("train.epoch", 0);
  meta.seed = kv.get_u64_or("train.seed", 0);
  TrainConfig defaults;
  meta.config.eta = kv.get_double_or("train.eta", defaults.eta);
  meta.config.lambda = kv.get_double_or("train.lambda", defaults.lambda);
  meta.config.beta_mse = kv.get_double_or("train.beta_mse", defaults.beta_mse);
  meta.config.beta_cd = kv.get_double_or("train.beta_cd", defaults.beta_cd);
  meta.config.epsilon = kv.get_double_or("train.epsilon", defaults.epsilon);
  meta.config.wake_steps = kv.get_u64_or("train.wake_steps", defaults.wake_steps);
  meta.config.sleep_steps = kv.get_u64_or("train.sleep_steps", defaults.sleep_steps);
  meta.config.buffer_capacity =
      kv.get_u64_or("train.buffer_capacity", defaults.buffer_capacity);
  meta.config.buffer_reinit_prob =
      kv.get_double_or("train.buffer_reinit_prob", defaults.buffer_reinit_prob);
  meta.config.epochs = kv.get_u64_or("train.epochs", defaults.epochs);
  meta.config.batch_size = kv.get_u64_or("train.batch_size", defaults.batch_size);
  meta.config.seed = meta.seed;
  meta.config.grad_clip = kv.get_double_or("train.grad_clip", defaults.grad_clip);
  meta.config.lyap_delta = kv.get_double_or("train.lyap_delta", defaults.lyap_delta);
  meta.config.sigma_init = kv.get_double_or("train.sigma_init", defaults.sigma_init);
  if (kv.has("start.centroid")) meta.start_centroid = kv.get_vec("start.centroid");
  return out;
}

// ---------------------------------------------------------------------------
// CSV artifacts

std::string trajectory_csv(const Trajectory& traj) {
  if (traj.states.empty()) throw InvalidArgument("trajectory csv: empty trajectory");
  if (traj.energies.size() != traj.states.size() ||
      traj.times.size() != traj.states.size() ||
      traj.steps.size() != traj.states.size())
    throw InvalidArgument("trajectory csv: incomplete records");
  const Eigen::Index d = traj.states.front().dim();

  std::string out = "step,t";
  for (Eigen::Index i = 0; i < d; ++i) out += ",q" + format_u64(i);
  for (Eigen::Index i = 0; i < d; ++i) out += ",p" + format_u64(i);
  out += ",H,T,V,C\n";

  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const PhaseState& z = traj.states[k];
    if (z.dim() != d) throw InvalidArgument("trajectory csv: mixed dimensions");
    out += format_u64(traj.steps[k]);
    out += ',';
    out += format_double(traj.times[k]);
    for (Eigen::Index i = 0; i < d; ++i) {
      out += ',';
      out += format_double(z.q(i));
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      out += ',';
      out += format_double(z.p(i));
    }
    const EnergyBreakdown& e = traj.energies[k];
    out += ',' + format_double(e.H) + ',' + format_double(e.T) + ',' +
           format_double(e.V) + ',' + format_double(e.C) + '\n';
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  write_file_atomic(path, trajectory_csv(traj));
}

std::string dataset_csv(const TrajectoryDataset& ds) {
  ds.require_valid();
  const Eigen::Index d = ds.dim();

  std::string out = "# chlu-dataset generator=" +
                    (ds.generator.empty() ? std::string("custom") : ds.generator) +
                    " d=" + format_u64(static_cast<std::uint64_t>(d)) +
                    " epsilon=" + format_double(ds.epsilon) +
                    " seed=" + format_u64(ds.seed) +
                    " items=" + format_u64(ds.items.size());
  if (!ds.params.empty()) out += " params=" + ds.params;
  out += "\nitem,step,t";
  for (Eigen::Index i = 0; i < d; ++i) out += ",q" + format_u64(i);
  for (Eigen::Index i = 0; i < d; ++i) out += ",p" + format_u64(i);
  out += '\n';

  for (std::size_t item = 0; item < ds.items.size(); ++item) {
    const Trajectory& traj = ds.items[item].target;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      out += format_u64(item);
      out += ',';
      out += format_u64(k < traj.steps.size() ? traj.steps[k] : k);
      out += ',';
      out += format_double(k < traj.times.size() ? traj.times[k]
                                                 : static_cast<double>(k) * ds.epsilon);
      const PhaseState& z = traj.states[k];
      for (Eigen::Index i = 0; i < d; ++i) {
        out += ',';
        out += format_double(z.q(i));
      }
      for (Eigen::Index i = 0; i < d; ++i) {
        out += ',';
        out += format_double(z.p(i));
      }
      out += '\n';
    }
  }
  return out;
}

void write_dataset_csv(const TrajectoryDataset& ds, const std::string& path) {
  write_file_atomic(path, dataset_csv(ds));
}

TrajectoryDataset parse_dataset_csv(const std::string& text) {
  const std::vector<std::string_view> lines = split_lines(text);
  if (lines.empty() || lines[0].rfind("# chlu-dataset ", 0) != 0)
    throw FormatError("not a dataset csv (bad metadata line)");

  TrajectoryDataset ds;
  Eigen::Index d = -1;
  std::uint64_t declared_items = 0;
  for (std::string_view tok : split_ws(lines[0].substr(15))) {
    const std::size_t eq = tok.find('=');
    if (eq == std::string_view::npos)
      throw FormatError("dataset csv: bad metadata token '" + std::string(tok) + "'");
    const std::string_view key = tok.substr(0, eq);
    const std::string_view value = tok.substr(eq + 1);
    if (key == "generator") ds.generator = std::string(value);
    else if (key == "d") d = static_cast<Eigen::Index>(parse_u64(value));
    else if (key == "epsilon") ds.epsilon = parse_double(value);
    else if (key == "seed") ds.seed = parse_u64(value);
    else if (key == "items") declared_items = parse_u64(value);
    else if (key == "params") ds.params = std::string(value);
    else throw FormatError("dataset csv: unknown metadata key '" + std::string(key) + "'");
  }
  if (d < 1) throw FormatError("dataset csv: missing dimension");
  if (lines.size() < 2) throw FormatError("dataset csv: missing header");

  std::string header = "item,step,t";
  for (Eigen::Index i = 0; i < d; ++i) header += ",q" + format_u64(i);
  for (Eigen::Index i = 0; i < d; ++i) header += ",p" + format_u64(i);
  if (lines[1] != header) throw FormatError("dataset csv: bad column header");

  for (std::size_t n = 2; n < lines.size(); ++n) {
    const std::vector<std::string_view> cells = split_char(lines[n], ',');
    if (cells.size() != static_cast<std::size_t>(3 + 2 * d))
      throw FormatError("dataset csv: bad row at line " + format_u64(n + 1));
    const std::uint64_t item = parse_u64(cells[0]);
    if (item == ds.items.size()) ds.items.emplace_back();
    else if (item != ds.items.size() - 1)
      throw FormatError("dataset csv: non-contiguous item index at line " +
                        format_u64(n + 1));
    Trajectory& traj = ds.items.back().target;
    traj.steps.push_back(parse_u64(cells[1]));
    traj.times.push_back(parse_double(cells[2]));
    Vec q(d), p(d);
    for (Eigen::Index i = 0; i < d; ++i) q(i) = parse_double(cells[3 + i]);
    for (Eigen::Index i = 0; i < d; ++i) p(i) = parse_double(cells[3 + d + i]);
    traj.states.emplace_back(std::move(q), std::move(p));
  }
  if (ds.items.size() != declared_items)
    throw FormatError("dataset csv: item count mismatch (header says " +
                      format_u64(declared_items) + ", found " +
                      format_u64(ds.items.size()) + ")");
  for (TrajectoryDataset::Item& item : ds.items) {
    if (item.target.states.empty())
      throw FormatError("dataset csv: empty item");
    item.z0 = item.target.states.front();
  }
  ds.require_valid();
  return ds;
}

TrajectoryDataset load_dataset_csv(const std::string& path) {
  return parse_dataset_csv(read_text_file(path));
}

PhaseState state_from_csv(const std::string& text, std::size_t row) {
  const std::vector<std::string_view> lines = split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() &&
         (lines[first].empty() || lines[first].front() == '#'))
    ++first;
  if (first >= lines.size()) throw FormatError("csv: no header line");

  const std::vector<std::string_view> cols = split_char(lines[first], ',');
  std::size_t q0 = cols.size(), p0 = cols.size();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "q0") q0 = i;
    if (cols[i] == "p0") p0 = i;
  }
  if (q0 == cols.size() || p0 == cols.size() || p0 <= q0)
    throw FormatError("csv: no q/p columns in header");
  const std::size_t d = p0 - q0;

  const std::size_t line_index = first + 1 + row;
  if (line_index >= lines.size())
    throw FormatError("csv: row " + format_u64(row) + " out of range");
  const std::vector<std::string_view> cells = split_char(lines[line_index], ',');
  if (cells.size() != cols.size())
    throw FormatError("csv: bad row " + format_u64(row));

  Vec q(static_cast<Eigen::Index>(d)), p(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    q(static_cast<Eigen::Index>(i)) = parse_double(cells[q0 + i]);
    p(static_cast<Eigen::Index>(i)) = parse_double(cells[p0 + i]);
  }
  return PhaseState(std::move(q), std::move(p));
}

// ---------------------------------------------------------------------------
// Images

std::string pgm_grid(const std::vector<Vec>& images, int w, int h, int cols,
                     bool display_tanh) {
  if (images.empty()) throw InvalidArgument("pgm: no images");
  if (w < 1 || h < 1 || cols < 1)
    throw InvalidArgument("pgm: width, height, and cols must be >= 1");
  const Eigen::Index pixels = static_cast<Eigen::Index>(w) * h;
  for (const Vec& img : images)
    if (img.size() != pixels) throw InvalidArgument("pgm: image size mismatch");

  const int grid_cols = static_cast<int>(
      std::min<std::size_t>(images.size(), static_cast<std::size_t>(cols)));
  const int grid_rows =
      static_cast<int>((images.size() + grid_cols - 1) / grid_cols);
  const int W = grid_cols * w;
  const int H = grid_rows * h;

  std::string out = "P5\n" + format_u64(W) + " " + format_u64(H) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + static_cast<std::size_t>(W) * H, '\0');

  for (std::size_t n = 0; n < images.size(); ++n) {
    const int cell_x = static_cast<int>(n) % grid_cols;
    const int cell_y = static_cast<int>(n) / grid_cols;
    const Vec& img = images[n];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double v = img(static_cast<Eigen::Index>(y) * w + x);
        if (std::isnan(v)) throw InvalidArgument("pgm: non-finite pixel");
        const double mapped =
            display_tanh ? std::tanh(v) : std::clamp(v, -1.0, 1.0);
        double byte = std::floor(255.0 * (mapped + 1.0) / 2.0 + 0.5);
        if (byte < 0.0) byte = 0.0;
        if (byte > 255.0) byte = 255.0;
        const std::size_t px = static_cast<std::size_t>(cell_y * h + y) * W +
                               static_cast<std::size_t>(cell_x * w + x);
        out[header + px] = static_cast<char>(static_cast<unsigned char>(byte));
      }
  }
  return out;
}

void write_pgm_grid(const std::vector<Vec>& images, int w, int h, int cols,
                    const std::string& path, bool display_tanh) {
  write_file_atomic(path, pgm_grid(images, w, h, cols, display_tanh));
}

ImageDataset load_idx(const std::string& path) {
  return parse_idx(read_binary_file(path));
}

void save_idx(const ImageDataset& ds, const std::string& path) {
  write_file_atomic(path, write_idx(ds));
}

// ---------------------------------------------------------------------------
// Potential probing

std::vector<ProbeSample> probe_potential(const Model& m, double lo, double hi,
                                         int resolution) {
  m.require_valid();
  if (m.dim() != 2) throw InvalidArgument("probe requires 2-dimensional latent");
  if (resolution < 1) throw InvalidArgument("probe: resolution must be >= 1");
  if (!(lo < hi)) throw InvalidArgument("probe: need lo < hi");

  std::vector<ProbeSample> out;
  out.reserve(static_cast<std::size_t>(resolution) * resolution);
  const double span = hi - lo;
  auto coordinate = [&](int i) {
    return resolution == 1
               ? lo
               : lo + span * static_cast<double>(i) / (resolution - 1);
  };
  Vec q(2);
  for (int ix = 0; ix < resolution; ++ix)
    for (int iy = 0; iy < resolution; ++iy) {
      ProbeSample s;
      s.x = coordinate(ix);
      s.y = coordinate(iy);
      q << s.x, s.y;
      s.V = m.potential->value(q) + m.confinement_energy(q);
      const Vec f = m.force(q);
      s.fx = f(0);
      s.fy = f(1);
      out.push_back(s);
    }
  return out;
}

std::string probe_csv(const std::vector<ProbeSample>& samples) {
  std::string out = "x,y,V,fx,fy\n";
  for (const ProbeSample& s : samples)
    out += format_double(s.x) + ',' + format_double(s.y) + ',' + format_double(s.V) +
           ',' + format_double(s.fx) + ',' + format_double(s.fy) + '\n';
  return out;
}

} // namespace chlu
