/*
 * Copyright 2026 The fodtr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>

namespace fodtr {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
/// (counter, key); every stream in the library is built on top of it.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Purpose tags keep independent consumers of one seed on disjoint counters.
enum class StreamDomain : std::uint32_t {
  kSampleRecord = 1,
  kOracleRecord = 2,
  kFoldShuffle = 3,
  kReplicate = 4,
  kDerivedSeed = 5,
};

/// Sequential uniforms from the counter space (seed, domain, id, block).
/// Two streams with different (domain, id) never share a Philox block, so a
/// record's draws do not depend on which worker generates it.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, StreamDomain domain, std::uint64_t id);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  void refill();

  PhiloxKey key_;
  std::uint32_t domain_;
  std::uint64_t id_;
  std::uint32_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
};

/// Child seed for (domain, index) under a parent seed.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index,
                          StreamDomain domain = StreamDomain::kDerivedSeed);

}  // namespace fodtr
