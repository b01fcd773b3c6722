/*
 * Copyright 2026 The Hacknizer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hacknizer/chassis/ids.hpp"

#include <cstdio>

namespace hacknizer::chassis {

IdGenerator::IdGenerator(std::uint64_t seed) : engine_(seed) {}

IdGenerator IdGenerator::from_entropy() {
  std::random_device device;
  std::uint64_t seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
  return IdGenerator(seed);
}

IdGenerator IdGenerator::derived(std::uint64_t seed, std::string_view label) {
  return IdGenerator(seed ^ (stable_hash(label) * 0x9E3779B97F4A7C15ULL));
}

std::string IdGenerator::next() {
  std::uint64_t hi;
  std::uint64_t lo;
  {
    std::lock_guard lock(mu_);
    hi = engine_();
    lo = engine_();
  }
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%08x-%04x-%04x-%04x-%04x%08x",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xFFFF),
                static_cast<unsigned>(hi & 0xFFFF), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned>((lo >> 32) & 0xFFFF), static_cast<unsigned>(lo & 0xFFFFFFFF));
  return buffer;
}

std::string IdGenerator::random_bytes(std::size_t count) {
  std::string out(count, '\0');
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < count; i += 8) {
    std::uint64_t word = engine_();
    for (std::size_t j = 0; j < 8 && i + j < count; ++j) {
      out[i + j] = static_cast<char>((word >> (8 * j)) & 0xFF);
    }
  }
  return out;
}

// FNV-1a; only used to derive seeds, never for security.
std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

bool looks_like_id(std::string_view text) {
  if (text.size() != 36) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool dash = i == 8 || i == 13 || i == 18 || i == 23;
    if (dash ? c != '-' : !((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace hacknizer::chassis
