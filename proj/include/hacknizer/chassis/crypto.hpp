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
#include <optional>
#include <string>
#include <string_view>

#include "hacknizer/common/result.hpp"

namespace hacknizer::chassis {

std::string base64url_encode(std::string_view bytes);
std::optional<std::string> base64url_decode(std::string_view text);

std::string hmac_sha256(std::string_view key, std::string_view message);

bool constant_time_equal(std::string_view a, std::string_view b);

struct ScryptParams {
  int log2_n = 14;  // N = 16384, 16 MiB with r = 8
  int r = 8;
  int p = 1;
};

// Encoded as `scrypt$<log2N>$<r>$<p>$<salt b64url>$<hash b64url>` so stored
// hashes carry their own parameters and algorithm tag.
Result<std::string> hash_password(std::string_view password, std::string_view salt,
                                  const ScryptParams& params);
bool verify_password(std::string_view password, std::string_view encoded);

}  // namespace hacknizer::chassis
