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

#include "iucorr/rng.hpp"

#include <cmath>
#include <numbers>

namespace iucorr
{

namespace
{

// splitmix64: seed spreader, keeps nearby master seeds uncorrelated.
std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t kPcgMultiplier = 6364136223846793005ULL;

} // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id)
{
    // PCG32 seeding: the stream id selects the increment (sequence), the
    // spread master seed selects the starting state.
    inc_ = (splitmix64(stream_id) << 1u) | 1u;
    state_ = 0;
    next_u32();
    state_ += splitmix64(master_seed);
    next_u32();
}

std::uint32_t RngStream::next_u32()
{
    const std::uint64_t old = state_;
    state_ = old * kPcgMultiplier + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

double RngStream::uniform01()
{
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11; // top 53 bits
    return static_cast<double>(bits) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform01();
}

double RngStream::uniform_symmetric(double half_width)
{
    if (half_width == 0.0)
    {
        uniform01(); // keep the draw count independent of the width
        return 0.0;
    }
    return uniform(-half_width, half_width);
}

double RngStream::normal()
{
    if (has_cached_normal_)
    {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = 1.0 - uniform01(); // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(t);
    has_cached_normal_ = true;
    return r * std::cos(t);
}

cxd RngStream::complex_normal()
{
    const double re = normal();
    const double im = normal();
    return cxd(re, im) / std::sqrt(2.0);
}

} // namespace iucorr
