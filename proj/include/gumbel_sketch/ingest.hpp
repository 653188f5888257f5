#pragma once

#include <cstdint>
#include <istream>
#include <span>

#include "gumbel_sketch/sketch.hpp"

namespace gumbel_sketch {

// Reference kernel: one sketch, items applied in order.
Sketch sketch_items_serial(const SketchConfig& config, std::span<const Item> items);

// OpenMP kernel: each thread sketches a contiguous shard, shards are merged.
// The result equals sketch_items_serial bit-exactly for any thread count.
// threads <= 0 uses the OpenMP default.
Sketch sketch_items_parallel(const SketchConfig& config, std::span<const Item> items, int threads = 0);

// Feeds every newline-terminated line of `in` (newline stripped, nothing else
// touched) into the sketch. A final line without a newline still counts.
// Returns the number of lines consumed. Memory use is O(k + longest line).
std::uint64_t ingest_lines(Sketch& sketch, std::istream& in);

}  // namespace gumbel_sketch
