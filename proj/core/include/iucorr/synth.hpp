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

#ifndef IUCORR_SYNTH_HPP
#define IUCORR_SYNTH_HPP

#include "iucorr/geometry.hpp"
#include "iucorr/rng.hpp"
#include "iucorr/types.hpp"

#include <utility>
#include <vector>

namespace iucorr
{

/// Joint two-user multipath ensemble: per-path gains for each user and the
/// L-by-L matrices of angle-correlation half-widths per axis. Entry (l, l')
/// is the half-width of the uniform sine-difference between user-1 path l
/// and user-2 path l'; 0 means an always-shared angle, 1 means maximal
/// separation.
///
/// Sampling note: only pairwise difference marginals enter the correlation
/// (independent path phases remove every cross term), and the full set of
/// pairwise uniform laws is not jointly realizable for L > 1. The sampler
/// therefore anchors user-2 path l to user-1 path l and draws the diagonal
/// half-widths alpha[l][l]; off-diagonal entries parameterize the
/// closed-form evaluators only.
struct PathEnsembleSpec
{
    Eigen::VectorXd gains_user1; // beta per path, length L
    Eigen::VectorXd gains_user2;
    Eigen::MatrixXd alpha_x; // L x L, entries in [0, 1]
    Eigen::MatrixXd alpha_y;

    int n_paths() const { return static_cast<int>(gains_user1.size()); }
    void validate() const;

    static PathEnsembleSpec single_path(double beta1, double beta2, double ax, double ay);

    /// All alpha entries equal; both users share the given gain vector.
    static PathEnsembleSpec uniform_alpha(const Eigen::VectorXd &gains, double ax, double ay);

    /// Keyhole ensemble: one path per keyhole with gain 1/sqrt(L),
    /// same-keyhole pairs use (ax_o, ay_o), cross-keyhole pairs use 1.
    static PathEnsembleSpec keyhole(int n_keyholes, double ax_o, double ay_o);
};

/// OFDM subcarrier layout: n_subcarriers evenly spaced frequencies
/// spanning [center - bw/2, center + bw/2].
struct SubcarrierPlan
{
    double center_frequency_hz = 0.0;
    double bandwidth_hz = 0.0;
    int n_subcarriers = 1;

    void validate() const;
};

/// Wavelengths per subcarrier, ordered by subcarrier index (increasing
/// frequency, strictly decreasing wavelength for n > 1).
std::vector<double> subcarrier_wavelengths(const SubcarrierPlan &plan);

/// One correlated sine pair: s1 ~ U[-1, 1), s2 = s1 + U[-alpha, alpha).
/// No clipping; s2 may leave [-1, 1].
std::pair<double, double> sample_correlated_sine_pair(double alpha, RngStream &rng);

/// Raw per-path draw behind generate_channel_pair. Tests construct this
/// directly to pin phases or angles.
struct PathPairDraw
{
    Eigen::VectorXd s_x1, s_y1; // user-1 per-path sines
    Eigen::VectorXd s_x2, s_y2; // user-2 per-path sines
    Eigen::VectorXd phase1, phase2;
};

/// Draw order per path l: s_x1, s_y1, dx, dy (diagonal half-widths),
/// then phase1, phase2 uniform on [0, 2*pi).
PathPairDraw draw_path_pair(const PathEnsembleSpec &spec, RngStream &rng);

/// h = sum_l gains[l] * exp(j*phase[l]) * a(s_x[l], s_y[l]).
ChannelVector assemble_channel(const Eigen::VectorXd &gains, const Eigen::VectorXd &s_x,
                               const Eigen::VectorXd &s_y, const Eigen::VectorXd &phases,
                               const ArrayGeometry &geom, double wavelength);

std::pair<ChannelVector, ChannelVector> generate_channel_pair(const PathEnsembleSpec &spec,
                                                              const ArrayGeometry &geom,
                                                              double wavelength, RngStream &rng);

std::pair<ChannelVector, ChannelVector> generate_keyhole_pair(int n_keyholes, double alpha_x_o,
                                                              double alpha_y_o,
                                                              const ArrayGeometry &geom,
                                                              double wavelength, RngStream &rng);

/// i.i.d. CN(0, 1) entries.
ChannelVector generate_rayleigh(int m, RngStream &rng);

} // namespace iucorr

#endif
