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

#ifndef IUCORR_TYPES_HPP
#define IUCORR_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace iucorr
{

using cxd = std::complex<double>;

// Per-antenna complex channel samples, ordered row-major over the array
// (x index outer, y index inner). This ordering is fixed project-wide and
// shared with the dataset container.
using ChannelVector = Eigen::VectorXcd;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

/// Thrown by dataset and result writers when the filesystem misbehaves.
class IoError : public std::runtime_error
{
  public:
    explicit IoError(const std::string &what) : std::runtime_error(what) {}
};

inline bool all_finite(const ChannelVector &v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
            return false;
    return true;
}

} // namespace iucorr

#endif
