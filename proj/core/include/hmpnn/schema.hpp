#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hmpnn/errors.hpp"

namespace hmpnn {

// One directed relation (source node type, edge type, target node type),
// all stored as indices into the owning schema.
struct MetaStep {
  int source_type = -1;
  int edge_type = -1;
  int target_type = -1;

  bool operator==(const MetaStep& o) const = default;
};

struct NodeTypeDef {
  std::string name;
  std::vector<std::string> feature_names;

  int feature_dim() const { return static_cast<int>(feature_names.size()); }
};

struct EdgeTypeDef {
  std::string name;
  std::vector<std::string> feature_names;

  int feature_dim() const { return static_cast<int>(feature_names.size()); }
};

// Describes a heterogeneous graph: node types with feature layouts, edge
// types with feature layouts, and the list of allowed meta steps. The
// declaration order of meta_steps is load bearing: message passing layers
// and concatenation aggregators follow it.
struct HeteroSchema {
  std::vector<NodeTypeDef> node_types;
  std::vector<EdgeTypeDef> edge_types;
  std::vector<MetaStep> meta_steps;

  int node_type_index(const std::string& name) const;
  int edge_type_index(const std::string& name) const;
  const NodeTypeDef& node_type(int i) const { return node_types.at(i); }
  const EdgeTypeDef& edge_type(int i) const { return edge_types.at(i); }

  // "individual__txn__organization" style label, used for file names,
  // parameter names and error messages.
  std::string step_name(const MetaStep& s) const;
  std::string step_name(int step_index) const { return step_name(meta_steps.at(step_index)); }

  int step_index(const MetaStep& s) const;  // -1 when not declared
  bool has_step(const MetaStep& s) const { return step_index(s) >= 0; }

  // Indices of meta steps with the given target (resp. source) type, in
  // declaration order.
  std::vector<int> steps_into(int target_type) const;
  std::vector<int> steps_from(int source_type) const;

  // Throws ValidationError on duplicate or empty names, meta step type
  // indices out of range, or duplicate meta steps.
  void validate() const;

  // Stable content hash over the canonical JSON form.
  uint64_t hash() const;

  nlohmann::json to_json() const;
  static HeteroSchema from_json(const nlohmann::json& j);
};

// The transaction network schema used throughout the lab: individuals,
// organizations and external counterparties, joined by directed txn edges
// (count, amount) for every ordered pair except external->external, plus
// role edges (role code, ownership share) from individuals to
// organizations.
HeteroSchema aml_schema();

// Fixed indices into aml_schema(), kept in one place so call sites do not
// sprinkle magic numbers.
namespace aml {
inline constexpr int kIndividual = 0;
inline constexpr int kOrganization = 1;
inline constexpr int kExternal = 2;
inline constexpr int kTxn = 0;
inline constexpr int kRole = 1;
// txn edge feature columns
inline constexpr int kTxnCount = 0;
inline constexpr int kTxnAmount = 1;
// role edge feature columns
inline constexpr int kRoleCode = 0;
inline constexpr int kRoleOwnership = 1;
inline constexpr int kIndividualDim = 11;
inline constexpr int kOrganizationDim = 8;
inline constexpr int kExternalDim = 2;
}  // namespace aml

}  // namespace hmpnn
