#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "spatialbias/error.hpp"

namespace spatialbias::detail {

struct YamlDocument {
  YAML::Node root;
  std::string text;
  std::filesystem::path dir;
};

inline YamlDocument load_yaml(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IOError, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  YamlDocument doc;
  doc.text = buf.str();
  doc.dir = std::filesystem::absolute(path).parent_path();
  try {
    doc.root = YAML::Load(doc.text);
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::SchemaError, path + ": " + e.what());
  }
  require(doc.root.IsMap(), ErrorCode::SchemaError, path + ": top level must be a mapping");
  return doc;
}

inline void reject_unknown_keys(const YAML::Node& node, const std::set<std::string>& known,
                                const std::string& where) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    require(known.count(key) > 0, ErrorCode::SchemaError, where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const YAML::Node& node, const std::string& key, const T& fallback) {
  if (!node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    fail(ErrorCode::SchemaError, "config key '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_required(const YAML::Node& node, const std::string& key) {
  require(static_cast<bool>(node[key]), ErrorCode::SchemaError, "config key '" + key + "' is required");
  return get<T>(node, key, T{});
}

inline std::string resolve_path(const std::filesystem::path& dir, const std::string& path) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? p.string() : (dir / p).lexically_normal().string();
}

}  // namespace spatialbias::detail
