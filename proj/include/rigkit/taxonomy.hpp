#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigkit/core.hpp"
#include "rigkit/skeleton.hpp"

namespace rigkit {

struct TaxonomyEntry {
  int fine = 0;
  std::string name;
  CoarseLabel coarse = CoarseLabel::Main;
};

// Fine-label table for one category. The built-in tables are placeholders with
// descriptive names; projects with their own annotation conventions replace
// them via a taxonomy JSON file (list of {fine, name, coarse}).
struct Taxonomy {
  Category category = Category::Humanoid;
  std::vector<TaxonomyEntry> entries;  // indexed by fine id: entries[i].fine == i

  int size() const { return int(entries.size()); }
  bool valid_fine(int fine) const { return fine >= 0 && fine < size(); }

  CoarseLabel coarse_of(int fine) const {
    if (!valid_fine(fine))
      throw Error(ErrorCode::UnknownFineId,
                  "fine id " + std::to_string(fine) + " outside [0, " +
                      std::to_string(size() - 1) + "]");
    return entries[fine].coarse;
  }

  SemanticLabel label_of(int fine) const { return {coarse_of(fine), fine}; }

  int find_by_name(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return e.fine;
    throw Error(ErrorCode::UnknownFineId, "no taxonomy entry named " + name);
  }
};

inline Taxonomy humanoid_taxonomy() {
  Taxonomy t;
  t.category = Category::Humanoid;
  auto add = [&t](const char* name, CoarseLabel c) {
    t.entries.push_back({int(t.entries.size()), name, c});
  };
  add("pelvis", CoarseLabel::Main);
  add("spine", CoarseLabel::Main);
  add("chest", CoarseLabel::Main);
  add("neck", CoarseLabel::Main);
  add("head", CoarseLabel::Main);
  add("shoulder_l", CoarseLabel::Main);
  add("shoulder_r", CoarseLabel::Main);
  add("upper_arm_l", CoarseLabel::Main);
  add("upper_arm_r", CoarseLabel::Main);
  add("forearm_l", CoarseLabel::Main);
  add("forearm_r", CoarseLabel::Main);
  add("hand_l", CoarseLabel::Main);
  add("hand_r", CoarseLabel::Main);
  add("thigh_l", CoarseLabel::Main);
  add("thigh_r", CoarseLabel::Main);
  add("calf_l", CoarseLabel::Main);
  add("calf_r", CoarseLabel::Main);
  add("foot_l", CoarseLabel::Main);
  add("foot_r", CoarseLabel::Main);
  add("toes_l", CoarseLabel::Main);
  add("toes_r", CoarseLabel::Main);
  add("hair_front", CoarseLabel::Hair);
  add("hair_back", CoarseLabel::Hair);
  add("ponytail", CoarseLabel::Hair);
  add("skirt", CoarseLabel::Cloth);
  add("cape", CoarseLabel::Cloth);
  add("sleeve", CoarseLabel::Cloth);
  add("backpack", CoarseLabel::Other);
  add("accessory", CoarseLabel::Other);
  return t;  // 29 fine categories
}

inline Taxonomy tetrapod_taxonomy() {
  Taxonomy t;
  t.category = Category::Tetrapod;
  auto add = [&t](const char* name, CoarseLabel c) {
    t.entries.push_back({int(t.entries.size()), name, c});
  };
  add("pelvis", CoarseLabel::Main);
  add("spine_front", CoarseLabel::Main);
  add("spine_back", CoarseLabel::Main);
  add("chest", CoarseLabel::Main);
  add("neck", CoarseLabel::Main);
  add("head", CoarseLabel::Main);
  add("jaw", CoarseLabel::Main);
  add("tail_base", CoarseLabel::Main);
  add("tail_tip", CoarseLabel::Main);
  add("front_upper_leg_l", CoarseLabel::Main);
  add("front_upper_leg_r", CoarseLabel::Main);
  add("front_lower_leg_l", CoarseLabel::Main);
  add("front_lower_leg_r", CoarseLabel::Main);
  add("front_foot_l", CoarseLabel::Main);
  add("front_foot_r", CoarseLabel::Main);
  add("hind_upper_leg_l", CoarseLabel::Main);
  add("hind_upper_leg_r", CoarseLabel::Main);
  add("hind_lower_leg_l", CoarseLabel::Main);
  add("hind_lower_leg_r", CoarseLabel::Main);
  add("hind_foot_l", CoarseLabel::Main);
  add("hind_foot_r", CoarseLabel::Main);
  add("ear_l", CoarseLabel::Auxiliary);
  add("ear_r", CoarseLabel::Auxiliary);
  add("horn_l", CoarseLabel::Auxiliary);
  add("horn_r", CoarseLabel::Auxiliary);
  add("wing_l", CoarseLabel::Auxiliary);
  add("wing_r", CoarseLabel::Auxiliary);
  add("fin_dorsal", CoarseLabel::Auxiliary);
  add("fin_tail", CoarseLabel::Auxiliary);
  add("mane", CoarseLabel::Auxiliary);
  add("rein", CoarseLabel::Auxiliary);
  return t;  // 31 fine categories
}

inline Taxonomy taxonomy_for(Category c) {
  switch (c) {
    case Category::Humanoid: return humanoid_taxonomy();
    case Category::Tetrapod: return tetrapod_taxonomy();
    default:
      throw Error(ErrorCode::UnknownFineId, "category 'other' carries no taxonomy");
  }
}

inline CoarseLabel coarse_from_string(const std::string& s) {
  if (s == "Main") return CoarseLabel::Main;
  if (s == "Hair") return CoarseLabel::Hair;
  if (s == "Cloth") return CoarseLabel::Cloth;
  if (s == "Other") return CoarseLabel::Other;
  if (s == "Auxiliary") return CoarseLabel::Auxiliary;
  throw Error(ErrorCode::ParseError, "unknown coarse label '" + s + "'");
}

inline Category category_from_string(const std::string& s) {
  if (s == "humanoid") return Category::Humanoid;
  if (s == "tetrapod") return Category::Tetrapod;
  if (s == "other") return Category::Other;
  throw Error(ErrorCode::ParseError, "unknown category '" + s + "'");
}

inline nlohmann::ordered_json taxonomy_to_json(const Taxonomy& t) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : t.entries) {
    arr.push_back({{"fine", e.fine}, {"name", e.name}, {"coarse", to_string(e.coarse)}});
  }
  return nlohmann::ordered_json{{"category", to_string(t.category)}, {"entries", arr}};
}

inline Taxonomy taxonomy_from_json(const nlohmann::json& j) {
  Taxonomy t;
  try {
    t.category = category_from_string(j.at("category").get<std::string>());
    for (const auto& e : j.at("entries")) {
      TaxonomyEntry entry;
      entry.fine = e.at("fine").get<int>();
      entry.name = e.at("name").get<std::string>();
      entry.coarse = coarse_from_string(e.at("coarse").get<std::string>());
      if (entry.fine != int(t.entries.size()))
        throw Error(ErrorCode::ParseError, "taxonomy fine ids must be contiguous from 0");
      t.entries.push_back(entry);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("taxonomy: ") + e.what());
  }
  if (t.entries.empty()) throw Error(ErrorCode::ParseError, "taxonomy has no entries");
  return t;
}

inline Taxonomy read_taxonomy_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return taxonomy_from_json(j);
}

}  // namespace rigkit
