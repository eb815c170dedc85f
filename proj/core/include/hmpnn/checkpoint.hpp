#pragma once

#include <cstdint>
#include <string>

#include "hmpnn/params.hpp"

namespace hmpnn {

struct CheckpointMeta {
  std::string model;  // "logreg", "mlp", "hgraphsage", "hmpnn-sum", "hmpnn-ct"
  int layers = 1;
  uint64_t seed = 0;
  uint64_t schema_hash = 0;
  int hidden_dim = 8;
  bool extra_degree_features = false;
  int entity_input_dim = 94;
};

struct Checkpoint {
  CheckpointMeta meta;
  ParamStore params;
};

// JSON file with a "meta" object and a "params" object mapping each tensor
// name to {rows, cols, data}. Keys are sorted and floats round-trip, so the
// same checkpoint always produces the same bytes.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hmpnn
