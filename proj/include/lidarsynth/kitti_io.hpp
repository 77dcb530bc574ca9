#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lidarsynth/geometry.hpp"
#include "lidarsynth/sensor.hpp"

namespace lidarsynth {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// On-disk label word: low 16 bits semantic, high 16 bits instance.
inline std::uint32_t pack_label(PointLabel label) {
  return static_cast<std::uint32_t>(label.semantic) |
         (static_cast<std::uint32_t>(label.instance) << 16);
}

inline PointLabel unpack_label(std::uint32_t word) {
  return {static_cast<std::uint16_t>(word & 0xffff), static_cast<std::uint16_t>(word >> 16)};
}

// Point binary: N x 16 bytes, four little-endian IEEE-754 floats
// (x, y, z, intensity) per point, no header.
void write_scan(const Scan& scan, const std::filesystem::path& path);
std::vector<ScanPoint> read_scan(const std::filesystem::path& path);

// Label binary: N x 4 bytes, little-endian 32-bit words.
void write_labels(const std::vector<PointLabel>& labels, const std::filesystem::path& path);
std::vector<PointLabel> read_labels(const std::filesystem::path& path);

// One line per scan: the row-major 3x4 transform from that scan's frame to
// the first scan's frame, twelve decimal floats. Values round-trip exactly.
// Throws FormatError if a pose is not a rigid transform.
void write_poses(const std::vector<RigidTransform>& poses, const std::filesystem::path& path);
std::vector<RigidTransform> read_poses(const std::filesystem::path& path);

// Minimal placeholder files some loaders insist on.
void write_calib(const std::filesystem::path& path);
void write_times(int scan_count, double rotation_rate, const std::filesystem::path& path);

struct SequenceInfo {
  std::string id;        // two-digit, zero-padded
  int scan_count = 0;
  std::uint64_t point_total = 0;
};

struct LayoutReport {
  std::vector<SequenceInfo> sequences;
  int scan_total() const;
  std::uint64_t point_total() const;
};

std::filesystem::path sequence_dir(const std::filesystem::path& root, const std::string& id);
std::string scan_name(int index);  // six digits, zero-padded

// Checks root/sequences/SS/{velodyne,labels}/NNNNNN.{bin,label}: contiguous
// indices from 000000, matching point counts and a poses.txt with one line
// per scan. Throws FormatError naming the sequence and scan on the first
// violation. With an empty `sequences` list, every directory under
// root/sequences is checked.
LayoutReport validate_layout(const std::filesystem::path& root,
                             const std::vector<std::string>& sequences = {});

// Lists the sequence ids present under root/sequences, ascending.
std::vector<std::string> list_sequences(const std::filesystem::path& root);

struct IndexRange {
  int begin = 0;
  int end = 0;  // exclusive

  int size() const { return end - begin; }
};

// The reduced-subset rule: the first 2000 scans of each sequence.
std::vector<IndexRange> select_lt(const std::vector<int>& sequence_lengths);

}  // namespace lidarsynth
