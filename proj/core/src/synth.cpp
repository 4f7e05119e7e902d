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

#include "iucorr/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace iucorr
{

void PathEnsembleSpec::validate() const
{
    const auto n = gains_user1.size();
    if (n < 1)
        throw std::invalid_argument("PathEnsembleSpec: need at least one path");
    if (gains_user2.size() != n)
        throw std::invalid_argument("PathEnsembleSpec: gain vectors differ in length");
    if (alpha_x.rows() != n || alpha_x.cols() != n || alpha_y.rows() != n || alpha_y.cols() != n)
        throw std::invalid_argument("PathEnsembleSpec: alpha matrices must be " +
                                    std::to_string(n) + " x " + std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (!std::isfinite(gains_user1[i]) || gains_user1[i] < 0.0 ||
            !std::isfinite(gains_user2[i]) || gains_user2[i] < 0.0)
            throw std::invalid_argument("PathEnsembleSpec: gains must be finite and non-negative");
        for (Eigen::Index j = 0; j < n; ++j)
        {
            const double ax = alpha_x(i, j);
            const double ay = alpha_y(i, j);
            if (!(ax >= 0.0 && ax <= 1.0) || !(ay >= 0.0 && ay <= 1.0))
                throw std::invalid_argument(
                    "PathEnsembleSpec: alpha entries must lie in [0, 1]");
        }
    }
}

PathEnsembleSpec PathEnsembleSpec::single_path(double beta1, double beta2, double ax, double ay)
{
    PathEnsembleSpec spec;
    spec.gains_user1 = Eigen::VectorXd::Constant(1, beta1);
    spec.gains_user2 = Eigen::VectorXd::Constant(1, beta2);
    spec.alpha_x = Eigen::MatrixXd::Constant(1, 1, ax);
    spec.alpha_y = Eigen::MatrixXd::Constant(1, 1, ay);
    spec.validate();
    return spec;
}

PathEnsembleSpec PathEnsembleSpec::uniform_alpha(const Eigen::VectorXd &gains, double ax,
                                                 double ay)
{
    PathEnsembleSpec spec;
    spec.gains_user1 = gains;
    spec.gains_user2 = gains;
    const auto n = gains.size();
    spec.alpha_x = Eigen::MatrixXd::Constant(n, n, ax);
    spec.alpha_y = Eigen::MatrixXd::Constant(n, n, ay);
    spec.validate();
    return spec;
}

PathEnsembleSpec PathEnsembleSpec::keyhole(int n_keyholes, double ax_o, double ay_o)
{
    if (n_keyholes < 1)
        throw std::invalid_argument("PathEnsembleSpec::keyhole: need at least one keyhole");
    PathEnsembleSpec spec;
    const double gain = 1.0 / std::sqrt(static_cast<double>(n_keyholes));
    spec.gains_user1 = Eigen::VectorXd::Constant(n_keyholes, gain);
    spec.gains_user2 = spec.gains_user1;
    spec.alpha_x = Eigen::MatrixXd::Constant(n_keyholes, n_keyholes, 1.0);
    spec.alpha_y = Eigen::MatrixXd::Constant(n_keyholes, n_keyholes, 1.0);
    spec.alpha_x.diagonal().setConstant(ax_o);
    spec.alpha_y.diagonal().setConstant(ay_o);
    spec.validate();
    return spec;
}

void SubcarrierPlan::validate() const
{
    if (n_subcarriers < 1)
        throw std::invalid_argument("SubcarrierPlan: need at least one subcarrier");
    if (!(center_frequency_hz > 0.0))
        throw std::invalid_argument("SubcarrierPlan: center frequency must be positive");
    if (bandwidth_hz < 0.0)
        throw std::invalid_argument("SubcarrierPlan: bandwidth must be non-negative");
    if (center_frequency_hz - bandwidth_hz / 2.0 <= 0.0)
        throw std::invalid_argument("SubcarrierPlan: band edge reaches a non-positive frequency");
}

std::vector<double> subcarrier_wavelengths(const SubcarrierPlan &plan)
{
    plan.validate();
    std::vector<double> wavelengths(static_cast<std::size_t>(plan.n_subcarriers));
    if (plan.n_subcarriers == 1)
    {
        wavelengths[0] = kSpeedOfLight / plan.center_frequency_hz;
        return wavelengths;
    }
    const double f0 = plan.center_frequency_hz - plan.bandwidth_hz / 2.0;
    const double df = plan.bandwidth_hz / static_cast<double>(plan.n_subcarriers - 1);
    for (int n = 0; n < plan.n_subcarriers; ++n)
        wavelengths[static_cast<std::size_t>(n)] = kSpeedOfLight / (f0 + df * n);
    return wavelengths;
}

std::pair<double, double> sample_correlated_sine_pair(double alpha, RngStream &rng)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("sample_correlated_sine_pair: alpha must lie in [0, 1]");
    const double s1 = rng.uniform(-1.0, 1.0);
    const double s2 = s1 + rng.uniform_symmetric(alpha);
    return {s1, s2};
}

PathPairDraw draw_path_pair(const PathEnsembleSpec &spec, RngStream &rng)
{
    spec.validate();
    const int n = spec.n_paths();
    PathPairDraw draw;
    draw.s_x1.resize(n);
    draw.s_y1.resize(n);
    draw.s_x2.resize(n);
    draw.s_y2.resize(n);
    draw.phase1.resize(n);
    draw.phase2.resize(n);

    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int l = 0; l < n; ++l)
    {
        draw.s_x1[l] = rng.uniform(-1.0, 1.0);
        draw.s_y1[l] = rng.uniform(-1.0, 1.0);
        draw.s_x2[l] = draw.s_x1[l] + rng.uniform_symmetric(spec.alpha_x(l, l));
        draw.s_y2[l] = draw.s_y1[l] + rng.uniform_symmetric(spec.alpha_y(l, l));
        draw.phase1[l] = rng.uniform(0.0, two_pi);
        draw.phase2[l] = rng.uniform(0.0, two_pi);
    }
    return draw;
}

ChannelVector assemble_channel(const Eigen::VectorXd &gains, const Eigen::VectorXd &s_x,
                               const Eigen::VectorXd &s_y, const Eigen::VectorXd &phases,
                               const ArrayGeometry &geom, double wavelength)
{
    const auto n = gains.size();
    if (s_x.size() != n || s_y.size() != n || phases.size() != n)
        throw std::invalid_argument("assemble_channel: per-path arrays differ in length");

    ChannelVector h = ChannelVector::Zero(geom.antenna_count());
    for (Eigen::Index l = 0; l < n; ++l)
    {
        const cxd weight = std::polar(gains[l], phases[l]);
        const ChannelVector a = steering_vector(geom, SteeringAngles{s_x[l], s_y[l]}, wavelength);
        h.noalias() += weight * a;
    }
    return h;
}

std::pair<ChannelVector, ChannelVector> generate_channel_pair(const PathEnsembleSpec &spec,
                                                              const ArrayGeometry &geom,
                                                              double wavelength, RngStream &rng)
{
    const PathPairDraw draw = draw_path_pair(spec, rng);
    ChannelVector h1 =
        assemble_channel(spec.gains_user1, draw.s_x1, draw.s_y1, draw.phase1, geom, wavelength);
    ChannelVector h2 =
        assemble_channel(spec.gains_user2, draw.s_x2, draw.s_y2, draw.phase2, geom, wavelength);
    return {std::move(h1), std::move(h2)};
}

std::pair<ChannelVector, ChannelVector> generate_keyhole_pair(int n_keyholes, double alpha_x_o,
                                                              double alpha_y_o,
                                                              const ArrayGeometry &geom,
                                                              double wavelength, RngStream &rng)
{
    const PathEnsembleSpec spec = PathEnsembleSpec::keyhole(n_keyholes, alpha_x_o, alpha_y_o);
    return generate_channel_pair(spec, geom, wavelength, rng);
}

ChannelVector generate_rayleigh(int m, RngStream &rng)
{
    if (m < 1)
        throw std::invalid_argument("generate_rayleigh: need at least one antenna");
    ChannelVector h(m);
    for (int i = 0; i < m; ++i)
        h[i] = rng.complex_normal();
    return h;
}

} // namespace iucorr
