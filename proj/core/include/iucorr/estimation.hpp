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

#ifndef IUCORR_ESTIMATION_HPP
#define IUCORR_ESTIMATION_HPP

#include "iucorr/dataset.hpp"
#include "iucorr/geometry.hpp"
#include "iucorr/theory.hpp"
#include "iucorr/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace iucorr
{

// Two empirical correlation estimators are exposed and labeled. Synthetic
// ensembles use the variance estimator (ensemble_correlation): the sample
// variance of the normalized dot product over many independent pair draws.
// Measured location pairs provide a single snapshot each, so the measured
// pipeline uses the per-pair cosine similarity (the dot-product mean is
// zero under independent path phases).

/// |h1^H h2| / (||h1|| * ||h2||), in [0, 1].
double cosine_similarity(const ChannelVector &h1, const ChannelVector &h2);

/// Variance estimator on the normalized dot products z_i = (1/M) h1_i^H h2_i.
/// correlation = sqrt of the Bessel-corrected complex sample variance of z.
CorrelationEstimate ensemble_correlation(
    const std::vector<std::pair<ChannelVector, ChannelVector>> &pairs);

struct EnsembleStats
{
    CorrelationEstimate estimate;
    cxd mean{0.0, 0.0};  // sample mean of z
    double mean_se = 0.0;
    double variance_se = 0.0;    // standard error of the variance estimate
    double correlation_se = 0.0; // delta-method SE of sqrt(variance)
};

/// Same estimator on precomputed normalized dot products, with standard
/// errors from the sample fourth moment.
EnsembleStats ensemble_correlation_from_dots(const std::vector<cxd> &dots);

/// Remove per-antenna gain/phase offsets: entry-wise raw / calib. Entries of
/// `calib` whose magnitude falls below floor_scale times the median calib
/// magnitude are treated as dead antennas and rejected, naming the index.
ChannelVector calibrate(const ChannelVector &raw, const ChannelVector &calib,
                        double floor_scale = 1e-6);

/// Conjugate-beamforming interference power at user k with perfect channel
/// knowledge: gains[k] * sum_{j != k} |h_j^H h_k|^2.
double conjugate_bf_interference(const std::vector<ChannelVector> &channels,
                                 const std::vector<double> &gains, int k);

// ---------------------------------------------------------------------------
// MUSIC angle spectra
// ---------------------------------------------------------------------------

/// Search grid in the sine domain; values strictly increasing in [-1, 1],
/// at least two per axis.
struct AngleGrid
{
    std::vector<double> s_x;
    std::vector<double> s_y;

    void validate() const;

    /// Uniform grid in physical angle: sines of min_deg..max_deg in
    /// step_deg steps on both axes.
    static AngleGrid degrees(double step_deg, double min_deg = -90.0, double max_deg = 90.0);
};

struct SpectrumPeak
{
    int ix = 0;
    int iy = 0;
    double s_x = 0.0;
    double s_y = 0.0;
    double power = 0.0;
};

struct SpectrumMap
{
    AngleGrid grid;
    Eigen::MatrixXd power;     // rows follow grid.s_x, cols follow grid.s_y
    Eigen::MatrixXd log_power; // 10*log10(power), display copy

    SpectrumPeak global_peak() const;
    std::vector<SpectrumPeak> local_maxima(int top_n) const;
};

struct MusicOptions
{
    bool forward_backward = true; // average R with its exchange conjugate
    int smoothing = 0;            // sub-array shrink per axis (coherent sources)
};

/// MUSIC pseudo-spectrum over the grid. The sample covariance is built from
/// the snapshots (optionally 2-D spatially smoothed, then forward-backward
/// averaged); the noise subspace spans the M_eff - n_sources smallest
/// eigenpairs; spectrum(s) = 1 / ||E_n^H a(s)||^2.
SpectrumMap music_spectrum(const std::vector<ChannelVector> &snapshots, const ArrayGeometry &geom,
                           double wavelength, int n_sources, const AngleGrid &grid,
                           const MusicOptions &options = {});

/// Model-order guess from the largest log-eigenvalue gap, capped by
/// max_order. Input eigenvalues must be sorted descending.
int estimate_model_order(const Eigen::VectorXd &eigenvalues_desc, int max_order);

// ---------------------------------------------------------------------------
// Cluster-pair correlation statistics over a measured/synthetic dataset
// ---------------------------------------------------------------------------

struct ClusterStats
{
    std::vector<std::string> cluster_ids;
    Eigen::MatrixXd mean;           // grand mean over (pair, subcarrier) samples
    Eigen::MatrixXd std_subcarrier; // std across subcarriers of per-subcarrier means
    Eigen::MatrixXi n_pairs;        // location pairs per cluster pair
    std::vector<Eigen::MatrixXd> per_subcarrier_mean; // one K x K matrix per subcarrier

    int n_clusters() const { return static_cast<int>(cluster_ids.size()); }
};

struct ClusterStatsOptions
{
    std::vector<int> subcarriers;     // empty = all
    std::optional<double> min_snr_db; // exclude records below the floor
    int frame = 0;                    // measured pipeline uses the first frame
    int threads = 0;                  // workers over cluster pairs, 0 = hardware
};

/// For each cluster pair (i, j): cosine similarity of calibrated,
/// sub-sampled (m antennas) channels over all location pairs (self-pairs
/// excluded when i = j) and selected subcarriers. Pairs and subcarriers are
/// weighted uniformly; counts are recorded.
ClusterStats cluster_correlation_stats(const DatasetReader &reader, int m_subarray,
                                       const ClusterStatsOptions &options = {});

} // namespace iucorr

#endif
