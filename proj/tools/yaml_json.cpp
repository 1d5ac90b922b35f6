#include "yaml_json.hpp"

#include <charconv>
#include <limits>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

namespace locstat::cli {

namespace {

using nlohmann::json;

std::string escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

json scalar(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (s == "null" || s == "~" || s.empty()) return nullptr;
  long long i = 0;
  auto [pi, ei] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (ei == std::errc() && pi == s.data() + s.size()) return i;
  double d = 0.0;
  auto [pd, ed] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ed == std::errc() && pd == s.data() + s.size()) return d;
  if (s == ".inf" || s == "+.inf") return std::numeric_limits<double>::infinity();
  if (s == "-.inf") return -std::numeric_limits<double>::infinity();
  return s;
}

json convert(const YAML::Node& node, const std::string& ptr, std::map<std::string, int>& lines) {
  lines[ptr] = node.Mark().line + 1;
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      std::size_t i = 0;
      for (const auto& item : node) arr.push_back(convert(item, ptr + "/" + std::to_string(i++), lines));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (obj.contains(key)) {
          throw std::runtime_error("line " + std::to_string(kv.first.Mark().line + 1) + ": duplicate key '" + key + "'");
        }
        const std::string child = ptr + "/" + escape(key);
        obj[key] = convert(kv.second, child, lines);
        lines[child] = kv.first.Mark().line + 1;
      }
      return obj;
    }
  }
  return nullptr;
}

}  // namespace

LoadedConfig load_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw std::runtime_error("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  LoadedConfig out;
  out.json = convert(root, "", out.lines);
  if (!out.json.is_object()) throw std::runtime_error("line 1: the config must be a mapping");
  return out;
}

int line_for(const LoadedConfig& cfg, std::string pointer) {
  while (true) {
    if (auto it = cfg.lines.find(pointer); it != cfg.lines.end()) return it->second;
    if (pointer.empty()) return 0;
    pointer.erase(pointer.rfind('/'));
  }
}

}  // namespace locstat::cli
