#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lidarsynth {

// Validation class ids are 1..19 in the fixed evaluation order below;
// slot 0 is the ignore class and is excluded from all statistics and metrics.
inline constexpr int kIgnore = 0;
inline constexpr int kValidationClassCount = 19;

const std::vector<std::string>& validation_class_names();

// 1..19 for a known name, -1 otherwise. "IGNORE" maps to kIgnore.
int validation_id(std::string_view name);
const std::string& validation_name(int id);

enum class ClassKind { kStaticWorld, kDynamicActor };

struct ClassDef {
  std::uint16_t raw_id = 0;
  std::string name;
  ClassKind kind = ClassKind::kStaticWorld;
  int remap_target = kIgnore;  // validation id or kIgnore
  bool adjustable = false;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immutable after load; safe to share read-only across scan workers.
class Taxonomy {
 public:
  // Parses the line-oriented config format: one class per line,
  // `raw_id  name  kind  remap_target  adjustable`, '#' comments.
  static Taxonomy load(std::string_view config_text);

  const std::vector<ClassDef>& classes() const { return classes_; }

  // Total over all 16-bit ids; unknown ids map to kIgnore.
  int remap(std::uint16_t raw_id) const { return remap_lut_[raw_id]; }

  const ClassDef* find_raw(std::uint16_t raw_id) const;
  const ClassDef* find_name(std::string_view name) const;

  // Distinct non-ignore validation ids reachable from some raw class,
  // ascending.
  std::vector<int> covered_validation_ids() const;

  std::vector<const ClassDef*> adjustable_classes() const;

 private:
  std::vector<ClassDef> classes_;
  std::vector<int> remap_lut_;  // 65536 entries
};

// The shipped default taxonomy (30 raw classes, 15 covered validation
// classes). The embedded text is generated from data/taxonomy.default.cfg at
// build time; the file is the source of truth.
std::string_view default_taxonomy_text();
const Taxonomy& default_taxonomy();

}  // namespace lidarsynth
