// SPDX-License-Identifier: Apache-2.0
//
// iucorr - inter-user channel correlation toolkit for massive MIMO arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef IUCORR_RNG_HPP
#define IUCORR_RNG_HPP

#include "iucorr/types.hpp"

#include <cstdint>

namespace iucorr
{

/// Seedable random stream with platform-independent output.
///
/// Identical (master_seed, stream_id) pairs reproduce identical sample
/// sequences on any platform: the engine is PCG32 (state advanced with the
/// stream-selected increment) and all distribution conversions are spelled
/// out here instead of relying on implementation-defined <random> ones.
/// Monte Carlo workers take disjoint stream_ids, so results do not depend
/// on the worker count. A single stream must not be shared between workers.
class RngStream
{
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint32_t next_u32();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);

    /// Uniform on [-half_width, half_width). half_width = 0 returns 0.
    double uniform_symmetric(double half_width);

    /// Standard normal via Box-Muller; the paired value is cached.
    double normal();

    /// Circularly symmetric complex Gaussian with unit variance, CN(0, 1).
    cxd complex_normal();

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

  private:
    std::uint64_t state_;
    std::uint64_t inc_;
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace iucorr

#endif
