// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace layerflow {

/// Caps the number of threads used by per-mode loops. Zero means hardware
/// concurrency. Results never depend on this value.
void set_worker_count(unsigned workers);
unsigned worker_count();

/// Runs body(i) for i in [0, count). Each index must write only to its own
/// slots; no reduction happens across indices.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace layerflow
