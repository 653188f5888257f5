#include "gumbel_sketch/ingest.hpp"

#include <omp.h>

#include <algorithm>
#include <string>
#include <vector>

namespace gumbel_sketch {

Sketch sketch_items_serial(const SketchConfig& config, std::span<const Item> items) {
  Sketch sketch = make_sketch(config);
  for (const Item& item : items) update(sketch, item);
  return sketch;
}

Sketch sketch_items_parallel(const SketchConfig& config, std::span<const Item> items, int threads) {
  const int requested = threads > 0 ? threads : omp_get_max_threads();
  const int shards = std::max(1, std::min<int>(requested, static_cast<int>(items.size() / 4096) + 1));
  std::vector<Sketch> partial(static_cast<std::size_t>(shards), make_sketch(config));

  const std::size_t n = items.size();
#pragma omp parallel for num_threads(shards) schedule(static, 1)
  for (int s = 0; s < shards; ++s) {
    const std::size_t lo = n * static_cast<std::size_t>(s) / static_cast<std::size_t>(shards);
    const std::size_t hi = n * static_cast<std::size_t>(s + 1) / static_cast<std::size_t>(shards);
    Sketch& local = partial[static_cast<std::size_t>(s)];
    for (std::size_t i = lo; i < hi; ++i) update(local, items[i]);
  }

  Sketch out = std::move(partial.front());
  for (std::size_t s = 1; s < partial.size(); ++s) out = merge(out, partial[s]);
  return out;
}

std::uint64_t ingest_lines(Sketch& sketch, std::istream& in) {
  std::uint64_t count = 0;
  std::string line;
  while (std::getline(in, line)) {
    update(sketch, line);
    ++count;
  }
  return count;
}

}  // namespace gumbel_sketch
