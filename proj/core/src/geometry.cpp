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

#include "iucorr/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace iucorr
{

namespace
{

int exact_isqrt(int m)
{
    if (m < 1)
        return -1;
    const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    return r * r == m ? r : -1;
}

} // namespace

ArrayGeometry::ArrayGeometry(int mx, int my, double dx, double dy)
    : m_x(mx), m_y(my), d_x(dx), d_y(dy)
{
    if (m_x < 1 || m_y < 1)
        throw std::invalid_argument("ArrayGeometry: antenna counts must be at least 1, got " +
                                    std::to_string(m_x) + " x " + std::to_string(m_y));
    if (!(d_x > 0.0) || !(d_y > 0.0))
        throw std::invalid_argument("ArrayGeometry: spacings must be positive");
}

ArrayGeometry ArrayGeometry::ula(int m, double d)
{
    return ArrayGeometry(m, 1, d, d);
}

ArrayGeometry ArrayGeometry::square_upa(int m_total, double d)
{
    const int side = exact_isqrt(m_total);
    if (side < 1)
        throw std::invalid_argument("square_upa: " + std::to_string(m_total) +
                                    " is not a perfect square");
    return ArrayGeometry(side, side, d, d);
}

ChannelVector steering_vector(const ArrayGeometry &geom, const SteeringAngles &angles,
                              double wavelength)
{
    if (!(wavelength > 0.0))
        throw std::invalid_argument("steering_vector: wavelength must be positive");

    const double kx = 2.0 * std::numbers::pi / wavelength * geom.d_x * angles.s_x;
    const double ky = 2.0 * std::numbers::pi / wavelength * geom.d_y * angles.s_y;

    ChannelVector a(geom.antenna_count());
    for (int ax = 0; ax < geom.m_x; ++ax)
    {
        const double px = kx * ax;
        for (int by = 0; by < geom.m_y; ++by)
            a[geom.flat_index(ax, by)] = std::polar(1.0, px + ky * by);
    }
    return a;
}

std::vector<int> square_subarray_indices(const ArrayGeometry &geom, int m)
{
    const int side = exact_isqrt(m);
    if (side < 1)
        throw std::invalid_argument("square_subarray_indices: sub-array size " +
                                    std::to_string(m) + " is not a perfect square");
    if (side > geom.m_x || side > geom.m_y)
        throw std::invalid_argument("square_subarray_indices: " + std::to_string(side) + " x " +
                                    std::to_string(side) + " sub-array exceeds parent " +
                                    std::to_string(geom.m_x) + " x " + std::to_string(geom.m_y));

    std::vector<int> indices;
    indices.reserve(static_cast<std::size_t>(m));
    for (int ax = 0; ax < side; ++ax)
        for (int by = 0; by < side; ++by)
            indices.push_back(geom.flat_index(ax, by));
    return indices;
}

SubArray subsample_square(const ChannelVector &channel, const ArrayGeometry &geom, int m)
{
    if (channel.size() != geom.antenna_count())
        throw std::invalid_argument("subsample_square: channel length " +
                                    std::to_string(channel.size()) +
                                    " does not match geometry M = " +
                                    std::to_string(geom.antenna_count()));

    const std::vector<int> indices = square_subarray_indices(geom, m);
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));

    ChannelVector sub(m);
    for (std::size_t i = 0; i < indices.size(); ++i)
        sub[static_cast<Eigen::Index>(i)] = channel[indices[i]];

    return SubArray{std::move(sub), ArrayGeometry(side, side, geom.d_x, geom.d_y)};
}

} // namespace iucorr
