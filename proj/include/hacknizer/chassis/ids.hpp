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

#pragma once

#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <string_view>

namespace hacknizer::chassis {

// 128-bit random identifiers rendered as lowercase hex with hyphens
// (8-4-4-4-12). Seeded generators make simulated runs reproducible.
class IdGenerator {
 public:
  explicit IdGenerator(std::uint64_t seed);

  static IdGenerator from_entropy();

  // Independent generator whose sequence depends only on (seed, label).
  static IdGenerator derived(std::uint64_t seed, std::string_view label);

  std::string next();
  std::string random_bytes(std::size_t count);

 private:
  std::mutex mu_;
  std::mt19937_64 engine_;
};

std::uint64_t stable_hash(std::string_view text);

bool looks_like_id(std::string_view text);

}  // namespace hacknizer::chassis
