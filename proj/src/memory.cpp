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

#include "compod/memory.hpp"

#include <atomic>
#include <cstdlib>
#include <new>

namespace compod {

namespace {

std::atomic<std::size_t> g_current{0};
std::atomic<std::size_t> g_peak{0};

// Every block is preceded by a header holding its requested size.
constexpr std::size_t kHeader = alignof(std::max_align_t);

void note_alloc(std::size_t n) {
  const std::size_t now = g_current.fetch_add(n, std::memory_order_relaxed) + n;
  std::size_t peak = g_peak.load(std::memory_order_relaxed);
  while (now > peak &&
         !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void* counted_alloc(std::size_t n, std::size_t align) {
  const std::size_t header = align > kHeader ? align : kHeader;
  void* raw = align > kHeader ? std::aligned_alloc(align, (header + n + align - 1) / align * align)
                              : std::malloc(header + n);
  if (!raw) return nullptr;
  auto* base = static_cast<unsigned char*>(raw);
  *reinterpret_cast<std::size_t*>(base + header - sizeof(std::size_t)) = n;
  note_alloc(n);
  return base + header;
}

void counted_free(void* p, std::size_t align) noexcept {
  if (!p) return;
  const std::size_t header = align > kHeader ? align : kHeader;
  auto* user = static_cast<unsigned char*>(p);
  const std::size_t n = *reinterpret_cast<std::size_t*>(user - sizeof(std::size_t));
  g_current.fetch_sub(n, std::memory_order_relaxed);
  std::free(user - header);
}

void* alloc_or_throw(std::size_t n, std::size_t align) {
  for (;;) {
    if (void* p = counted_alloc(n, align)) return p;
    std::new_handler h = std::get_new_handler();
    if (!h) throw std::bad_alloc();
    h();
  }
}

}  // namespace

std::size_t current_heap_bytes() { return g_current.load(); }
std::size_t peak_heap_bytes() { return g_peak.load(); }
void reset_peak_heap() { g_peak.store(g_current.load()); }

}  // namespace compod

void* operator new(std::size_t n) { return compod::alloc_or_throw(n, 0); }
void* operator new[](std::size_t n) { return compod::alloc_or_throw(n, 0); }
void* operator new(std::size_t n, const std::nothrow_t&) noexcept {
  return compod::counted_alloc(n, 0);
}
void* operator new[](std::size_t n, const std::nothrow_t&) noexcept {
  return compod::counted_alloc(n, 0);
}
void* operator new(std::size_t n, std::align_val_t a) {
  return compod::alloc_or_throw(n, static_cast<std::size_t>(a));
}
void* operator new[](std::size_t n, std::align_val_t a) {
  return compod::alloc_or_throw(n, static_cast<std::size_t>(a));
}
void operator delete(void* p) noexcept { compod::counted_free(p, 0); }
void operator delete[](void* p) noexcept { compod::counted_free(p, 0); }
void operator delete(void* p, std::size_t) noexcept { compod::counted_free(p, 0); }
void operator delete[](void* p, std::size_t) noexcept { compod::counted_free(p, 0); }
void operator delete(void* p, std::align_val_t a) noexcept {
  compod::counted_free(p, static_cast<std::size_t>(a));
}
void operator delete[](void* p, std::align_val_t a) noexcept {
  compod::counted_free(p, static_cast<std::size_t>(a));
}
void operator delete(void* p, std::size_t, std::align_val_t a) noexcept {
  compod::counted_free(p, static_cast<std::size_t>(a));
}
void operator delete[](void* p, std::size_t, std::align_val_t a) noexcept {
  compod::counted_free(p, static_cast<std::size_t>(a));
}
