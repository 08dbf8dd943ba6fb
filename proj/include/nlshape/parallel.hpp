#pragma once

#include <cstddef>
#include <functional>

namespace nlshape {

// Process-wide worker count used by assembly and shape-derivative loops.
void set_num_threads(int n);
int num_threads();

// Splits [0, n) into num_threads() contiguous blocks and runs
// fn(block_id, begin, end) for each, one thread per block.  Block
// boundaries depend only on n and the thread count, so per-block
// accumulators merged in block order give reproducible sums.
void parallel_blocks(std::size_t n,
                     const std::function<void(int, std::size_t, std::size_t)>& fn);

}  // namespace nlshape
