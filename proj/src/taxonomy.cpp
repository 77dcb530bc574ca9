#include "lidarsynth/taxonomy.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace lidarsynth {

const std::vector<std::string>& validation_class_names() {
  static const std::vector<std::string> names = {
      "car",   "bicycle", "motorcycle",   "truck",    "other-vehicle", "person",  "bicyclist",
      "motorcyclist", "road", "parking", "sidewalk", "other-ground", "building", "fence",
      "vegetation", "trunk", "terrain", "pole", "traffic-sign"};
  return names;
}

int validation_id(std::string_view name) {
  if (name == "IGNORE") return kIgnore;
  const auto& names = validation_class_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i) + 1;
  }
  return -1;
}

const std::string& validation_name(int id) {
  static const std::string ignore = "IGNORE";
  if (id <= kIgnore || id > kValidationClassCount) return ignore;
  return validation_class_names()[static_cast<std::size_t>(id - 1)];
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    if (tok[0] == '#') break;
    fields.push_back(tok);
  }
  return fields;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw ConfigError("taxonomy config line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Taxonomy Taxonomy::load(std::string_view config_text) {
  Taxonomy tax;
  tax.remap_lut_.assign(65536, kIgnore);

  std::istringstream stream{std::string(config_text)};
  std::string line;
  int line_no = 0;
  std::set<std::uint16_t> seen_ids;
  std::set<std::string> seen_names;

  while (std::getline(stream, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 5) {
      fail(line_no, "expected 5 fields (raw_id name kind remap_target adjustable), got " +
                        std::to_string(fields.size()));
    }

    ClassDef def;
    try {
      const long id = std::stol(fields[0]);
      if (id < 0 || id > 0xffff) fail(line_no, "raw_id out of 16-bit range: " + fields[0]);
      def.raw_id = static_cast<std::uint16_t>(id);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      fail(line_no, "raw_id is not an integer: " + fields[0]);
    }
    if (!seen_ids.insert(def.raw_id).second) {
      fail(line_no, "duplicate raw_id " + fields[0]);
    }

    def.name = fields[1];
    if (!seen_names.insert(def.name).second) {
      fail(line_no, "duplicate class name '" + def.name + "'");
    }

    if (fields[2] == "static" || fields[2] == "static-world") {
      def.kind = ClassKind::kStaticWorld;
    } else if (fields[2] == "dynamic" || fields[2] == "dynamic-actor") {
      def.kind = ClassKind::kDynamicActor;
    } else {
      fail(line_no, "unknown kind '" + fields[2] + "' (want static|dynamic)");
    }

    def.remap_target = validation_id(fields[3]);
    if (def.remap_target < 0) {
      fail(line_no, "class '" + def.name + "': remap target '" + fields[3] +
                        "' is not a validation class");
    }

    if (fields[4] == "1" || fields[4] == "true" || fields[4] == "yes") {
      def.adjustable = true;
    } else if (fields[4] == "0" || fields[4] == "false" || fields[4] == "no") {
      def.adjustable = false;
    } else {
      fail(line_no, "adjustable must be 0/1, got '" + fields[4] + "'");
    }

    if (def.kind == ClassKind::kDynamicActor && !def.adjustable) {
      fail(line_no, "dynamic class '" + def.name + "' must be adjustable");
    }

    tax.remap_lut_[def.raw_id] = def.remap_target;
    tax.classes_.push_back(std::move(def));
  }

  return tax;
}

const ClassDef* Taxonomy::find_raw(std::uint16_t raw_id) const {
  for (const auto& def : classes_) {
    if (def.raw_id == raw_id) return &def;
  }
  return nullptr;
}

const ClassDef* Taxonomy::find_name(std::string_view name) const {
  for (const auto& def : classes_) {
    if (def.name == name) return &def;
  }
  return nullptr;
}

std::vector<int> Taxonomy::covered_validation_ids() const {
  std::set<int> covered;
  for (const auto& def : classes_) {
    if (def.remap_target != kIgnore) covered.insert(def.remap_target);
  }
  return {covered.begin(), covered.end()};
}

std::vector<const ClassDef*> Taxonomy::adjustable_classes() const {
  std::vector<const ClassDef*> out;
  for (const auto& def : classes_) {
    if (def.adjustable) out.push_back(&def);
  }
  return out;
}

const Taxonomy& default_taxonomy() {
  static const Taxonomy tax = Taxonomy::load(default_taxonomy_text());
  return tax;
}

}  // namespace lidarsynth
