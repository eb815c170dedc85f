#pragma once

#include <string>

#include "hmpnn/graph.hpp"

namespace hmpnn {

// On-disk graph layout: a directory holding
//   schema.json
//   nodes_<type>.csv            header: id,f0,...       (dense ids, row order)
//   edges_<src>__<etype>__<dst>.csv   header: src_id,dst_id,f0,...
//   labels_<type>.csv           header: id,label        (only labeled types)
// Every file is written atomically and with round-trip float formatting, so
// saving the same graph twice yields byte-identical bytes.
void save_container(const HeteroGraph& graph, const std::string& dir);

// Loads and validates a container directory. Ids may be arbitrary distinct
// integers; they are mapped to dense indices by row order. Errors name the
// offending file and row.
HeteroGraph load_container(const std::string& dir);

}  // namespace hmpnn
