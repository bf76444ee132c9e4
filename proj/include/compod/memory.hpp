// Copyright 2026 The Compod Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>

// Heap accounting through the replaced global operator new/delete. Only
// allocations made with new are seen; malloc from C libraries is not.

namespace compod {

std::size_t current_heap_bytes();
std::size_t peak_heap_bytes();
/// Restarts the high-water mark from the current usage.
void reset_peak_heap();

}  // namespace compod
