#include "hmpnn/checkpoint.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "hmpnn/files.hpp"

namespace hmpnn {

namespace {

std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

uint64_t parse_hash(const std::string& s) {
  return std::strtoull(s.c_str(), nullptr, 16);
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json j;
  j["meta"] = {
      {"model", ckpt.meta.model},
      {"layers", ckpt.meta.layers},
      {"seed", ckpt.meta.seed},
      {"schema_hash", hash_hex(ckpt.meta.schema_hash)},
      {"hidden_dim", ckpt.meta.hidden_dim},
      {"extra_degree_features", ckpt.meta.extra_degree_features},
      {"entity_input_dim", ckpt.meta.entity_input_dim},
  };
  nlohmann::json params = nlohmann::json::object();
  for (size_t i = 0; i < ckpt.params.size(); ++i) {
    const DenseMatrix& t = ckpt.params.tensor(i);
    params[ckpt.params.name(i)] = {{"rows", t.rows}, {"cols", t.cols}, {"data", t.data}};
  }
  j["params"] = std::move(params);
  atomic_write_file(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint " + path + ": " + e.what());
  }
  Checkpoint ckpt;
  try {
    const auto& meta = j.at("meta");
    ckpt.meta.model = meta.at("model").get<std::string>();
    ckpt.meta.layers = meta.at("layers").get<int>();
    ckpt.meta.seed = meta.at("seed").get<uint64_t>();
    ckpt.meta.schema_hash = parse_hash(meta.at("schema_hash").get<std::string>());
    ckpt.meta.hidden_dim = meta.value("hidden_dim", 8);
    ckpt.meta.extra_degree_features = meta.value("extra_degree_features", false);
    ckpt.meta.entity_input_dim = meta.value("entity_input_dim", 94);
    for (const auto& [name, t] : j.at("params").items()) {
      const int rows = t.at("rows").get<int>();
      const int cols = t.at("cols").get<int>();
      std::vector<double> data = t.at("data").get<std::vector<double>>();
      if (static_cast<int>(data.size()) != rows * cols)
        throw ValidationError("checkpoint " + path + ": tensor " + name +
                              " data length does not match its shape");
      ckpt.params.add(name, rows, cols) = DenseMatrix(rows, cols, std::move(data));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint " + path + ": " + e.what());
  }
  return ckpt;
}

}  // namespace hmpnn
