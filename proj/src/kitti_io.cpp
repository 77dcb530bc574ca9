#include "lidarsynth/kitti_io.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lidarsynth {

namespace fs = std::filesystem;

namespace {

void put_u32_le(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(const char* p) {
  const auto b = [p](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])); };
  return b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
}

void put_f32_le(std::string& buf, float v) { put_u32_le(buf, std::bit_cast<std::uint32_t>(v)); }

float get_f32_le(const char* p) { return std::bit_cast<float>(get_u32_le(p)); }

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

// Round-trippable decimal formatting; prints 1.0 as "1" and 0.0 as "0".
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    // Prefer the shortest representation that still round-trips.
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

}  // namespace

void write_scan(const Scan& scan, const fs::path& path) {
  std::string buf;
  buf.reserve(scan.points.size() * 16);
  for (const ScanPoint& p : scan.points) {
    put_f32_le(buf, p.x);
    put_f32_le(buf, p.y);
    put_f32_le(buf, p.z);
    put_f32_le(buf, p.intensity);
  }
  write_file(path, buf);
}

std::vector<ScanPoint> read_scan(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() % 16 != 0) {
    throw FormatError("point file length not divisible by 16: " + path.string());
  }
  std::vector<ScanPoint> points(bytes.size() / 16);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const char* p = bytes.data() + i * 16;
    points[i] = {get_f32_le(p), get_f32_le(p + 4), get_f32_le(p + 8), get_f32_le(p + 12)};
  }
  return points;
}

void write_labels(const std::vector<PointLabel>& labels, const fs::path& path) {
  std::string buf;
  buf.reserve(labels.size() * 4);
  for (const PointLabel& label : labels) put_u32_le(buf, pack_label(label));
  write_file(path, buf);
}

std::vector<PointLabel> read_labels(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() % 4 != 0) {
    throw FormatError("label file length not divisible by 4: " + path.string());
  }
  std::vector<PointLabel> labels(bytes.size() / 4);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = unpack_label(get_u32_le(bytes.data() + i * 4));
  }
  return labels;
}

void write_poses(const std::vector<RigidTransform>& poses, const fs::path& path) {
  std::string buf;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const RigidTransform& tf = poses[i];
    if (!is_rigid(tf)) {
      throw FormatError("pose " + std::to_string(i) + " is not a rigid transform");
    }
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        if (row != 0 || col != 0) buf += ' ';
        buf += format_double(tf.r[3 * row + col]);
      }
      buf += ' ';
      buf += format_double(row == 0 ? tf.t.x : (row == 1 ? tf.t.y : tf.t.z));
    }
    buf += '\n';
  }
  write_file(path, buf);
}

std::vector<RigidTransform> read_poses(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open: " + path.string());
  std::vector<RigidTransform> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double v[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ss >> v[i])) {
        throw FormatError(path.string() + " line " + std::to_string(line_no) +
                          ": expected 12 values");
      }
    }
    double extra;
    if (ss >> extra) {
      throw FormatError(path.string() + " line " + std::to_string(line_no) + ": trailing values");
    }
    RigidTransform tf;
    tf.r = {v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10]};
    tf.t = {v[3], v[7], v[11]};
    poses.push_back(tf);
  }
  return poses;
}

void write_calib(const fs::path& path) {
  const std::string row = "1 0 0 0 0 1 0 0 0 0 1 0";
  std::string buf;
  for (const char* key : {"P0", "P1", "P2", "P3", "Tr"}) {
    buf += key;
    buf += ": ";
    buf += row;
    buf += '\n';
  }
  write_file(path, buf);
}

void write_times(int scan_count, double rotation_rate, const fs::path& path) {
  std::string buf;
  char line[40];
  for (int i = 0; i < scan_count; ++i) {
    std::snprintf(line, sizeof(line), "%.6e\n", static_cast<double>(i) / rotation_rate);
    buf += line;
  }
  write_file(path, buf);
}

fs::path sequence_dir(const fs::path& root, const std::string& id) {
  return root / "sequences" / id;
}

std::string scan_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", index);
  return buf;
}

std::vector<std::string> list_sequences(const fs::path& root) {
  const fs::path seq_root = root / "sequences";
  if (!fs::is_directory(seq_root)) {
    throw FormatError("no sequences directory under " + root.string());
  }
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(seq_root)) {
    if (entry.is_directory()) ids.push_back(entry.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

int LayoutReport::scan_total() const {
  int total = 0;
  for (const auto& seq : sequences) total += seq.scan_count;
  return total;
}

std::uint64_t LayoutReport::point_total() const {
  std::uint64_t total = 0;
  for (const auto& seq : sequences) total += seq.point_total;
  return total;
}

LayoutReport validate_layout(const fs::path& root, const std::vector<std::string>& sequences) {
  const std::vector<std::string> ids = sequences.empty() ? list_sequences(root) : sequences;
  LayoutReport report;

  for (const std::string& id : ids) {
    const fs::path dir = sequence_dir(root, id);
    const fs::path velodyne = dir / "velodyne";
    const fs::path labels = dir / "labels";
    if (!fs::is_directory(velodyne)) {
      throw FormatError("sequence " + id + ": missing velodyne directory");
    }
    if (!fs::is_directory(labels)) {
      throw FormatError("sequence " + id + ": missing labels directory");
    }

    int bin_count = 0;
    for (const auto& entry : fs::directory_iterator(velodyne)) {
      if (entry.path().extension() == ".bin") ++bin_count;
    }

    SequenceInfo info;
    info.id = id;
    info.scan_count = bin_count;
    for (int i = 0; i < bin_count; ++i) {
      const std::string name = scan_name(i);
      const fs::path bin_path = velodyne / (name + ".bin");
      const fs::path label_path = labels / (name + ".label");
      if (!fs::is_regular_file(bin_path)) {
        throw FormatError("sequence " + id + " scan " + name + ": missing " +
                          bin_path.filename().string() + " (indices must be contiguous)");
      }
      if (!fs::is_regular_file(label_path)) {
        throw FormatError("sequence " + id + " scan " + name + ": missing label file");
      }
      const auto bin_size = fs::file_size(bin_path);
      const auto label_size = fs::file_size(label_path);
      if (bin_size % 16 != 0) {
        throw FormatError("sequence " + id + " scan " + name +
                          ": length not divisible by 16");
      }
      if (label_size % 4 != 0) {
        throw FormatError("sequence " + id + " scan " + name +
                          ": label length not divisible by 4");
      }
      if (bin_size / 16 != label_size / 4) {
        throw FormatError("sequence " + id + " scan " + name + ": point count mismatch (" +
                          std::to_string(bin_size / 16) + " points vs " +
                          std::to_string(label_size / 4) + " labels)");
      }
      info.point_total += bin_size / 16;
    }

    const fs::path poses_path = dir / "poses.txt";
    if (!fs::is_regular_file(poses_path)) {
      throw FormatError("sequence " + id + ": missing poses.txt");
    }
    const auto poses = read_poses(poses_path);
    if (static_cast<int>(poses.size()) != bin_count) {
      throw FormatError("sequence " + id + ": poses.txt has " + std::to_string(poses.size()) +
                        " lines for " + std::to_string(bin_count) + " scans");
    }

    report.sequences.push_back(std::move(info));
  }
  return report;
}

std::vector<IndexRange> select_lt(const std::vector<int>& sequence_lengths) {
  std::vector<IndexRange> ranges;
  ranges.reserve(sequence_lengths.size());
  for (int length : sequence_lengths) {
    ranges.push_back({0, std::min(2000, std::max(0, length))});
  }
  return ranges;
}

}  // namespace lidarsynth
