#include "hmpnn/schema.hpp"

#include <set>

namespace hmpnn {

int HeteroSchema::node_type_index(const std::string& name) const {
  for (size_t i = 0; i < node_types.size(); ++i)
    if (node_types[i].name == name) return static_cast<int>(i);
  return -1;
}

int HeteroSchema::edge_type_index(const std::string& name) const {
  for (size_t i = 0; i < edge_types.size(); ++i)
    if (edge_types[i].name == name) return static_cast<int>(i);
  return -1;
}

std::string HeteroSchema::step_name(const MetaStep& s) const {
  return node_types.at(s.source_type).name + "__" + edge_types.at(s.edge_type).name + "__" +
         node_types.at(s.target_type).name;
}

int HeteroSchema::step_index(const MetaStep& s) const {
  for (size_t i = 0; i < meta_steps.size(); ++i)
    if (meta_steps[i] == s) return static_cast<int>(i);
  return -1;
}

std::vector<int> HeteroSchema::steps_into(int target_type) const {
  std::vector<int> out;
  for (size_t i = 0; i < meta_steps.size(); ++i)
    if (meta_steps[i].target_type == target_type) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> HeteroSchema::steps_from(int source_type) const {
  std::vector<int> out;
  for (size_t i = 0; i < meta_steps.size(); ++i)
    if (meta_steps[i].source_type == source_type) out.push_back(static_cast<int>(i));
  return out;
}

void HeteroSchema::validate() const {
  std::set<std::string> seen;
  for (const auto& nt : node_types) {
    if (nt.name.empty()) throw ValidationError("schema: empty node type name");
    if (!seen.insert(nt.name).second)
      throw ValidationError("schema: duplicate node type name '" + nt.name + "'");
  }
  seen.clear();
  for (const auto& et : edge_types) {
    if (et.name.empty()) throw ValidationError("schema: empty edge type name");
    if (!seen.insert(et.name).second)
      throw ValidationError("schema: duplicate edge type name '" + et.name + "'");
  }
  for (size_t i = 0; i < meta_steps.size(); ++i) {
    const MetaStep& s = meta_steps[i];
    if (s.source_type < 0 || s.source_type >= static_cast<int>(node_types.size()) ||
        s.target_type < 0 || s.target_type >= static_cast<int>(node_types.size()) ||
        s.edge_type < 0 || s.edge_type >= static_cast<int>(edge_types.size()))
      throw ValidationError("schema: meta step " + std::to_string(i) +
                            " references a type index out of range");
    for (size_t j = 0; j < i; ++j)
      if (meta_steps[j] == s)
        throw ValidationError("schema: duplicate meta step " + step_name(s));
  }
}

uint64_t HeteroSchema::hash() const {
  const std::string canon = to_json().dump();
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

nlohmann::json HeteroSchema::to_json() const {
  nlohmann::json j;
  j["node_types"] = nlohmann::json::array();
  for (const auto& nt : node_types)
    j["node_types"].push_back({{"name", nt.name}, {"features", nt.feature_names}});
  j["edge_types"] = nlohmann::json::array();
  for (const auto& et : edge_types)
    j["edge_types"].push_back({{"name", et.name}, {"features", et.feature_names}});
  j["meta_steps"] = nlohmann::json::array();
  for (const auto& s : meta_steps)
    j["meta_steps"].push_back({node_types.at(s.source_type).name,
                               edge_types.at(s.edge_type).name,
                               node_types.at(s.target_type).name});
  return j;
}

HeteroSchema HeteroSchema::from_json(const nlohmann::json& j) {
  HeteroSchema s;
  try {
    for (const auto& nt : j.at("node_types")) {
      NodeTypeDef d;
      d.name = nt.at("name").get<std::string>();
      d.feature_names = nt.at("features").get<std::vector<std::string>>();
      s.node_types.push_back(std::move(d));
    }
    for (const auto& et : j.at("edge_types")) {
      EdgeTypeDef d;
      d.name = et.at("name").get<std::string>();
      d.feature_names = et.at("features").get<std::vector<std::string>>();
      s.edge_types.push_back(std::move(d));
    }
    for (const auto& ms : j.at("meta_steps")) {
      if (!ms.is_array() || ms.size() != 3)
        throw ValidationError("schema json: meta step entries must be [source, edge, target]");
      std::vector<std::string> names = ms.get<std::vector<std::string>>();
      MetaStep step;
      step.source_type = s.node_type_index(names[0]);
      step.edge_type = s.edge_type_index(names[1]);
      step.target_type = s.node_type_index(names[2]);
      if (step.source_type < 0 || step.edge_type < 0 || step.target_type < 0)
        throw ValidationError("schema json: meta step references unknown type: " + ms.dump());
      s.meta_steps.push_back(step);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("schema json: ") + e.what());
  }
  s.validate();
  return s;
}

HeteroSchema aml_schema() {
  HeteroSchema s;
  auto feature_list = [](const char* prefix, int n) {
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back(std::string(prefix) + std::to_string(i));
    return names;
  };
  s.node_types.push_back({"individual", feature_list("f", aml::kIndividualDim)});
  s.node_types.push_back({"organization", feature_list("f", aml::kOrganizationDim)});
  s.node_types.push_back({"external", feature_list("f", aml::kExternalDim)});
  s.edge_types.push_back({"txn", {"count", "amount"}});
  s.edge_types.push_back({"role", {"role_code", "ownership"}});
  // Directed txn relations between every ordered pair of node types except
  // external->external, then the role relation.
  for (int src = 0; src < 3; ++src)
    for (int dst = 0; dst < 3; ++dst) {
      if (src == aml::kExternal && dst == aml::kExternal) continue;
      s.meta_steps.push_back({src, aml::kTxn, dst});
    }
  s.meta_steps.push_back({aml::kIndividual, aml::kRole, aml::kOrganization});
  s.validate();
  return s;
}

}  // namespace hmpnn
