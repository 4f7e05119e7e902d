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

#include "iucorr/estimation.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace iucorr
{

void AngleGrid::validate() const
{
    auto check_axis = [](const std::vector<double> &v, const char *axis) {
        if (v.size() < 2)
            throw std::invalid_argument(std::string("AngleGrid: need at least 2 points on ") +
                                        axis);
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            if (v[i] < -1.0 || v[i] > 1.0)
                throw std::invalid_argument(std::string("AngleGrid: sine value out of [-1, 1] on ") +
                                            axis);
            if (i > 0 && !(v[i] > v[i - 1]))
                throw std::invalid_argument(
                    std::string("AngleGrid: values must be strictly increasing on ") + axis);
        }
    };
    check_axis(s_x, "x");
    check_axis(s_y, "y");
}

AngleGrid AngleGrid::degrees(double step_deg, double min_deg, double max_deg)
{
    if (!(step_deg > 0.0) || !(max_deg > min_deg))
        throw std::invalid_argument("AngleGrid::degrees: bad step or range");
    std::vector<double> sines;
    constexpr double to_rad = std::numbers::pi / 180.0;
    for (double deg = min_deg; deg <= max_deg + 1e-9; deg += step_deg)
        sines.push_back(std::sin(deg * to_rad));
    AngleGrid grid{sines, sines};
    grid.validate();
    return grid;
}

SpectrumPeak SpectrumMap::global_peak() const
{
    Eigen::Index ix = 0, iy = 0;
    power.maxCoeff(&ix, &iy);
    return SpectrumPeak{static_cast<int>(ix), static_cast<int>(iy),
                        grid.s_x[static_cast<std::size_t>(ix)],
                        grid.s_y[static_cast<std::size_t>(iy)], power(ix, iy)};
}

std::vector<SpectrumPeak> SpectrumMap::local_maxima(int top_n) const
{
    std::vector<SpectrumPeak> peaks;
    const Eigen::Index nx = power.rows();
    const Eigen::Index ny = power.cols();
    for (Eigen::Index i = 0; i < nx; ++i)
    {
        for (Eigen::Index j = 0; j < ny; ++j)
        {
            const double v = power(i, j);
            if (i > 0 && power(i - 1, j) >= v)
                continue;
            if (i + 1 < nx && power(i + 1, j) > v)
                continue;
            if (j > 0 && power(i, j - 1) >= v)
                continue;
            if (j + 1 < ny && power(i, j + 1) > v)
                continue;
            peaks.push_back(SpectrumPeak{static_cast<int>(i), static_cast<int>(j),
                                         grid.s_x[static_cast<std::size_t>(i)],
                                         grid.s_y[static_cast<std::size_t>(j)], v});
        }
    }
    std::sort(peaks.begin(), peaks.end(),
              [](const SpectrumPeak &a, const SpectrumPeak &b) { return a.power > b.power; });
    if (top_n >= 0 && static_cast<std::size_t>(top_n) < peaks.size())
        peaks.resize(static_cast<std::size_t>(top_n));
    return peaks;
}

int estimate_model_order(const Eigen::VectorXd &eigenvalues_desc, int max_order)
{
    const int n = static_cast<int>(eigenvalues_desc.size());
    if (n < 2 || max_order < 1)
        return 1;
    const int limit = std::min(max_order, n - 1);
    const double floor = std::max(eigenvalues_desc[0], 1.0) * 1e-12;
    int best_k = 1;
    double best_gap = 0.0;
    for (int k = 1; k <= limit; ++k)
    {
        const double hi = std::max(eigenvalues_desc[k - 1], floor);
        const double lo = std::max(eigenvalues_desc[k], floor);
        const double gap = std::log(hi) - std::log(lo);
        if (gap > best_gap)
        {
            best_gap = gap;
            best_k = k;
        }
    }
    return best_k;
}

namespace
{

// Sub-array covariance averaging: subarrays of (m_x - s) x (m_y - s)
// elements slid over all (s+1)^2 offsets, plus the usual forward pass when
// s = 0. Restores rank for coherent sources at the price of aperture.
Eigen::MatrixXcd smoothed_covariance(const std::vector<ChannelVector> &snapshots,
                                     const ArrayGeometry &geom, int shrink,
                                     const ArrayGeometry &sub_geom)
{
    const int m_eff = sub_geom.antenna_count();
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(m_eff, m_eff);
    Eigen::VectorXcd x(m_eff);
    long long count = 0;
    for (const ChannelVector &snap : snapshots)
    {
        for (int ox = 0; ox <= shrink; ++ox)
        {
            for (int oy = 0; oy <= shrink; ++oy)
            {
                for (int ax = 0; ax < sub_geom.m_x; ++ax)
                    for (int by = 0; by < sub_geom.m_y; ++by)
                        x[sub_geom.flat_index(ax, by)] =
                            snap[geom.flat_index(ax + ox, by + oy)];
                r.noalias() += x * x.adjoint();
                ++count;
            }
        }
    }
    r /= static_cast<double>(count);
    return r;
}

} // namespace

SpectrumMap music_spectrum(const std::vector<ChannelVector> &snapshots, const ArrayGeometry &geom,
                           double wavelength, int n_sources, const AngleGrid &grid,
                           const MusicOptions &options)
{
    grid.validate();
    if (!(wavelength > 0.0))
        throw std::invalid_argument("music_spectrum: wavelength must be positive");
    if (snapshots.empty())
        throw std::invalid_argument("music_spectrum: need at least one snapshot");
    if (options.smoothing < 0 || options.smoothing >= std::min(geom.m_x, geom.m_y))
        throw std::invalid_argument("music_spectrum: smoothing shrink out of range");
    if (snapshots.size() == 1 && options.smoothing == 0)
        throw std::invalid_argument(
            "music_spectrum: a single snapshot yields a degenerate covariance; "
            "enable spatial smoothing");

    const int m = geom.antenna_count();
    for (const ChannelVector &snap : snapshots)
        if (snap.size() != m)
            throw std::invalid_argument("music_spectrum: snapshot length mismatch");

    const ArrayGeometry sub_geom(geom.m_x - options.smoothing,
                                 std::max(geom.m_y - options.smoothing, 1), geom.d_x, geom.d_y);
    const int m_eff = sub_geom.antenna_count();
    if (n_sources < 0 || n_sources >= m_eff)
        throw std::invalid_argument("music_spectrum: n_sources must lie in [1, " +
                                    std::to_string(m_eff - 1) +
                                    "] for this aperture (0 = choose by eigen-gap)");

    Eigen::MatrixXcd r = smoothed_covariance(snapshots, geom, options.smoothing, sub_geom);

    if (options.forward_backward)
    {
        const Eigen::MatrixXcd flipped = r.conjugate().reverse(); // J * conj(R) * J
        r = 0.5 * (r + flipped);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(r);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("music_spectrum: eigendecomposition failed");

    if (n_sources == 0)
    {
        const Eigen::VectorXd descending = solver.eigenvalues().reverse();
        n_sources = estimate_model_order(descending, std::min(6, m_eff - 1));
    }

    // Signal subspace = the n_sources largest eigenpairs (solver returns
    // ascending order). The spectrum uses ||E_n^H a||^2 = M - ||E_s^H a||^2.
    // Each signal eigenvector is reshaped onto the array so the grid scan
    // factorizes into per-axis steering tables.
    std::vector<Eigen::MatrixXcd> sig_conj;
    sig_conj.reserve(static_cast<std::size_t>(n_sources));
    for (int s = 0; s < n_sources; ++s)
    {
        const Eigen::VectorXcd v = solver.eigenvectors().col(m_eff - 1 - s);
        Eigen::MatrixXcd e(sub_geom.m_x, sub_geom.m_y);
        for (int ax = 0; ax < sub_geom.m_x; ++ax)
            for (int by = 0; by < sub_geom.m_y; ++by)
                e(ax, by) = std::conj(v[sub_geom.flat_index(ax, by)]);
        sig_conj.push_back(std::move(e));
    }

    const auto axis_table = [&](const std::vector<double> &sines, int count, double spacing) {
        Eigen::MatrixXcd table(count, sines.size());
        const double k0 = 2.0 * std::numbers::pi / wavelength * spacing;
        for (std::size_t g = 0; g < sines.size(); ++g)
            for (int a = 0; a < count; ++a)
                table(a, static_cast<Eigen::Index>(g)) = std::polar(1.0, k0 * a * sines[g]);
        return table;
    };
    const Eigen::MatrixXcd ax_table = axis_table(grid.s_x, sub_geom.m_x, sub_geom.d_x);
    const Eigen::MatrixXcd ay_table = axis_table(grid.s_y, sub_geom.m_y, sub_geom.d_y);

    SpectrumMap map;
    map.grid = grid;
    map.power.resize(static_cast<Eigen::Index>(grid.s_x.size()),
                     static_cast<Eigen::Index>(grid.s_y.size()));

    Eigen::MatrixXcd partial(sub_geom.m_x, n_sources); // sig_conj * a_y per grid column
    for (Eigen::Index gy = 0; gy < map.power.cols(); ++gy)
    {
        for (int s = 0; s < n_sources; ++s)
            partial.col(s).noalias() = sig_conj[static_cast<std::size_t>(s)] * ay_table.col(gy);
        for (Eigen::Index gx = 0; gx < map.power.rows(); ++gx)
        {
            double signal_energy = 0.0;
            for (int s = 0; s < n_sources; ++s)
                signal_energy +=
                    std::norm(ax_table.col(gx).cwiseProduct(partial.col(s)).sum());
            const double denom =
                std::max(static_cast<double>(m_eff) - signal_energy, 1e-12 * m_eff);
            map.power(gx, gy) = 1.0 / denom;
        }
    }

    map.log_power = (map.power.array().max(1e-300)).log10() * 10.0;
    return map;
}

} // namespace iucorr
