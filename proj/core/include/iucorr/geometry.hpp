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

#ifndef IUCORR_GEOMETRY_HPP
#define IUCORR_GEOMETRY_HPP

#include "iucorr/types.hpp"

#include <vector>

namespace iucorr
{

/// Uniform planar array on the x-y plane: m_x by m_y elements with spacings
/// d_x and d_y in meters. A uniform linear array is the degenerate case
/// m_y = 1 (d_y is then unused but must stay positive).
struct ArrayGeometry
{
    int m_x;
    int m_y;
    double d_x;
    double d_y;

    ArrayGeometry(int mx, int my, double dx, double dy);

    int antenna_count() const { return m_x * m_y; }
    bool is_ula() const { return m_y == 1; }

    // Row-major flat index, x index outer, y index inner.
    int flat_index(int ax, int by) const { return ax * m_y + by; }

    static ArrayGeometry ula(int m, double d);

    /// Square planar array with m_total antennas (must be a perfect square)
    /// and equal spacing on both axes.
    static ArrayGeometry square_upa(int m_total, double d);
};

/// Direction of a spatial path, stored in the sine domain: s = sin(theta)
/// per axis. Values outside [-1, 1] are representable on purpose (the
/// synthetic angle model samples unclipped sine differences); use
/// physically_valid() for the opt-in physical check.
struct SteeringAngles
{
    double s_x = 0.0;
    double s_y = 0.0;
};

inline bool physically_valid(const SteeringAngles &a)
{
    return a.s_x >= -1.0 && a.s_x <= 1.0 && a.s_y >= -1.0 && a.s_y <= 1.0;
}

/// Plane-wave array response. Entry for element (a, b) is
/// exp(j * 2*pi/wavelength * (d_x*a*s_x + d_y*b*s_y)), row-major order.
/// The Euclidean norm is sqrt(M) up to rounding.
ChannelVector steering_vector(const ArrayGeometry &geom, const SteeringAngles &angles,
                              double wavelength);

/// Flat indices of the first sqrt(m) rows and first sqrt(m) columns of the
/// parent array, in row-major order. m must be a perfect square with
/// sqrt(m) <= min(m_x, m_y).
std::vector<int> square_subarray_indices(const ArrayGeometry &geom, int m);

struct SubArray
{
    ChannelVector channel;
    ArrayGeometry geometry;
};

/// Restrict a channel to the square sub-array of m antennas (first sqrt(m)
/// rows and columns), preserving row-major order and spacings.
SubArray subsample_square(const ChannelVector &channel, const ArrayGeometry &geom, int m);

} // namespace iucorr

#endif
