#pragma once

namespace gnnpool {

// Keeps large tensor buffers on the heap between training steps instead of
// returning them to the OS. Call once at program start; no-op off glibc.
void tune_allocator();

}  // namespace gnnpool
