#include "geopath/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace geopath {

namespace {

nlohmann::ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing file: " + path);
  nlohmann::ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("checkpoint parse error in " + path + ": " + e.what());
  }
  return doc;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModuleParams& modules,
                     const nlohmann::ordered_json& meta) {
  nlohmann::ordered_json doc;
  for (const auto& [module, params] : modules) {
    nlohmann::ordered_json entry;
    for (const Parameter* p : params) {
      entry[p->name] = {{"shape", {p->value.rows, p->value.cols}}, {"data", p->value.data}};
    }
    doc[module] = std::move(entry);
  }
  if (!meta.is_null()) doc["meta"] = meta;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << doc.dump(2) << "\n";
}

void load_checkpoint(const std::string& path, const ModuleParams& modules) {
  const auto doc = read_json_file(path);
  for (const auto& [module, params] : modules) {
    if (!doc.contains(module))
      throw std::runtime_error("checkpoint missing module '" + module + "' in " + path);
    const auto& entry = doc.at(module);
    for (Parameter* p : params) {
      if (!entry.contains(p->name))
        throw std::runtime_error("checkpoint missing parameter '" + module + "/" + p->name +
                                 "' in " + path);
      const auto& rec = entry.at(p->name);
      const auto shape = rec.at("shape").get<std::vector<int>>();
      if (shape.size() != 2 || shape[0] != p->value.rows || shape[1] != p->value.cols)
        throw std::runtime_error("checkpoint shape mismatch for '" + module + "/" + p->name +
                                 "': expected " + p->value.shape_str() + ", file has " +
                                 (shape.size() == 2 ? std::to_string(shape[0]) + "x" +
                                                          std::to_string(shape[1])
                                                    : "rank " + std::to_string(shape.size())));
      auto data = rec.at("data").get<std::vector<double>>();
      if (data.size() != p->value.size())
        throw std::runtime_error("checkpoint data length mismatch for '" + module + "/" +
                                 p->name + "'");
      p->value.data = std::move(data);
    }
  }
}

bool checkpoint_has_modules(const std::string& path, const std::vector<std::string>& names) {
  const auto doc = read_json_file(path);
  for (const auto& n : names)
    if (!doc.contains(n)) return false;
  return true;
}

nlohmann::ordered_json checkpoint_meta(const std::string& path) {
  const auto doc = read_json_file(path);
  if (doc.contains("meta")) return doc.at("meta");
  return nlohmann::ordered_json();
}

}  // namespace geopath
