#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <unordered_set>

#include <json.hpp>

#include "rigkit/core.hpp"
#include "rigkit/skeleton.hpp"
#include "rigkit/taxonomy.hpp"

namespace rigkit {

// Nearest double to the 9-significant-digit decimal rendering; keeps the JSON
// output stable and compact.
inline double round_9sig(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

// Schema (field order fixed):
// { "joints": [ {"id", "position":[x,y,z], "parent": int|null,
//                "label": {"coarse": str, "fine": int}|null } ],
//   "root": int, "category": "humanoid"|"tetrapod"|"other" }
inline nlohmann::ordered_json skeleton_to_json(const Skeleton& s) {
  nlohmann::ordered_json joints = nlohmann::ordered_json::array();
  for (const auto& j : s.joints) {
    nlohmann::ordered_json jj;
    jj["id"] = j.id;
    jj["position"] = {round_9sig(j.position.x), round_9sig(j.position.y),
                      round_9sig(j.position.z)};
    if (j.parent)
      jj["parent"] = *j.parent;
    else
      jj["parent"] = nullptr;
    if (j.label)
      jj["label"] = {{"coarse", to_string(j.label->coarse)}, {"fine", j.label->fine}};
    else
      jj["label"] = nullptr;
    joints.push_back(jj);
  }
  nlohmann::ordered_json out;
  out["joints"] = joints;
  out["root"] = s.joints.empty() ? 0 : s.joints[size_t(s.root)].id;
  out["category"] = to_string(s.category);
  return out;
}

inline Skeleton skeleton_from_json(const nlohmann::json& j) {
  Skeleton s;
  try {
    std::unordered_set<int> seen_ids;
    for (const auto& jj : j.at("joints")) {
      Joint joint;
      joint.id = jj.at("id").get<int>();
      if (!seen_ids.insert(joint.id).second)
        throw Error(ErrorCode::ParseError, "duplicate joint id " + std::to_string(joint.id));
      const auto& pos = jj.at("position");
      if (!pos.is_array() || pos.size() != 3)
        throw Error(ErrorCode::ParseError, "position must be [x, y, z]");
      joint.position = {pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()};
      if (!joint.position.finite())
        throw Error(ErrorCode::ParseError, "non-finite joint position");
      if (jj.contains("parent") && !jj.at("parent").is_null())
        joint.parent = jj.at("parent").get<int>();
      if (jj.contains("label") && !jj.at("label").is_null()) {
        const auto& lab = jj.at("label");
        joint.label = SemanticLabel{coarse_from_string(lab.at("coarse").get<std::string>()),
                                    lab.at("fine").get<int>()};
      }
      s.joints.push_back(joint);
    }
    if (s.joints.empty()) throw Error(ErrorCode::ParseError, "skeleton has no joints");
    int root_id = j.at("root").get<int>();
    auto idx = s.id_to_index();
    auto it = idx.find(root_id);
    if (it == idx.end())
      throw Error(ErrorCode::ParseError, "root id " + std::to_string(root_id) + " not found");
    s.root = it->second;
    s.category = category_from_string(j.at("category").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("skeleton: ") + e.what());
  }
  return s;
}

inline void write_skeleton_file(const std::string& path, const Skeleton& s) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  f << skeleton_to_json(s).dump(2) << '\n';
}

inline Skeleton read_skeleton_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return skeleton_from_json(j);
}

// Annotation file: JSON object mapping joint id -> fine id.
inline std::vector<std::pair<int, int>> read_annotation_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, path + ": expected an object");
  std::vector<std::pair<int, int>> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    try {
      out.emplace_back(std::stoi(it.key()), it.value().get<int>());
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, path + ": bad annotation entry '" + it.key() + "'");
    }
  }
  return out;
}

inline void write_annotation_file(const std::string& path,
                                  const std::vector<std::pair<int, int>>& entries) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [id, fine] : entries) j[std::to_string(id)] = fine;
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  f << j.dump(2) << '\n';
}

}  // namespace rigkit
