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

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace iucorr
{

double cosine_similarity(const ChannelVector &h1, const ChannelVector &h2)
{
    if (h1.size() != h2.size())
        throw std::invalid_argument("cosine_similarity: vectors differ in length");
    const double n1 = h1.norm();
    const double n2 = h2.norm();
    if (n1 == 0.0 || n2 == 0.0)
        throw std::invalid_argument("cosine_similarity: zero-norm input");
    return std::abs(h1.dot(h2)) / (n1 * n2);
}

EnsembleStats ensemble_correlation_from_dots(const std::vector<cxd> &dots)
{
    const std::size_t n = dots.size();
    if (n < 2)
        throw std::invalid_argument("ensemble_correlation: need at least two pairs");

    cxd mean(0.0, 0.0);
    for (const cxd &z : dots)
        mean += z;
    mean /= static_cast<double>(n);

    double sum_sq = 0.0;
    double sum_quad = 0.0;
    for (const cxd &z : dots)
    {
        const double d2 = std::norm(z - mean);
        sum_sq += d2;
        sum_quad += d2 * d2;
    }

    const double variance = sum_sq / static_cast<double>(n - 1);
    const double m2 = sum_sq / static_cast<double>(n);
    const double m4 = sum_quad / static_cast<double>(n);

    EnsembleStats stats;
    stats.estimate.variance = variance;
    stats.estimate.correlation = std::sqrt(variance);
    stats.estimate.kind = EstimatorKind::empirical;
    stats.estimate.meta = n;
    stats.mean = mean;
    stats.mean_se = std::sqrt(m2 / static_cast<double>(n));
    stats.variance_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / static_cast<double>(n));
    stats.correlation_se =
        variance > 0.0 ? stats.variance_se / (2.0 * std::sqrt(variance)) : 0.0;
    return stats;
}

CorrelationEstimate ensemble_correlation(
    const std::vector<std::pair<ChannelVector, ChannelVector>> &pairs)
{
    if (pairs.size() < 2)
        throw std::invalid_argument("ensemble_correlation: need at least two pairs");
    const Eigen::Index m = pairs.front().first.size();

    std::vector<cxd> dots;
    dots.reserve(pairs.size());
    for (const auto &[h1, h2] : pairs)
    {
        if (h1.size() != m || h2.size() != m)
            throw std::invalid_argument("ensemble_correlation: pairs differ in antenna count");
        dots.push_back(h1.dot(h2) / static_cast<double>(m));
    }
    return ensemble_correlation_from_dots(dots).estimate;
}

ChannelVector calibrate(const ChannelVector &raw, const ChannelVector &calib, double floor_scale)
{
    if (raw.size() != calib.size())
        throw std::invalid_argument("calibrate: vectors differ in length");
    if (calib.size() == 0)
        throw std::invalid_argument("calibrate: empty input");

    std::vector<double> mags(static_cast<std::size_t>(calib.size()));
    for (Eigen::Index i = 0; i < calib.size(); ++i)
        mags[static_cast<std::size_t>(i)] = std::abs(calib[i]);
    const auto mid = mags.begin() + mags.size() / 2;
    std::nth_element(mags.begin(), mid, mags.end());
    const double floor = floor_scale * *mid;

    ChannelVector out(raw.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i)
    {
        if (std::abs(calib[i]) <= floor)
            throw std::invalid_argument("calibrate: dead calibration antenna at index " +
                                        std::to_string(i) + " (|calib| = " +
                                        std::to_string(std::abs(calib[i])) + ")");
        out[i] = raw[i] / calib[i];
    }
    return out;
}

double conjugate_bf_interference(const std::vector<ChannelVector> &channels,
                                 const std::vector<double> &gains, int k)
{
    const int n_users = static_cast<int>(channels.size());
    if (k < 0 || k >= n_users)
        throw std::invalid_argument("conjugate_bf_interference: user index out of range");
    if (gains.size() != channels.size())
        throw std::invalid_argument("conjugate_bf_interference: one gain per user required");
    if (gains[static_cast<std::size_t>(k)] < 0.0)
        throw std::invalid_argument("conjugate_bf_interference: gains must be non-negative");

    const Eigen::Index m = channels[static_cast<std::size_t>(k)].size();
    double acc = 0.0;
    for (int j = 0; j < n_users; ++j)
    {
        if (channels[static_cast<std::size_t>(j)].size() != m)
            throw std::invalid_argument(
                "conjugate_bf_interference: channels differ in antenna count");
        if (j == k)
            continue;
        acc += std::norm(
            channels[static_cast<std::size_t>(j)].dot(channels[static_cast<std::size_t>(k)]));
    }
    return gains[static_cast<std::size_t>(k)] * acc;
}

// ---------------------------------------------------------------------------
// Cluster-pair statistics
// ---------------------------------------------------------------------------

namespace
{

struct CalibratedLocation
{
    std::string location_id;
    // One sub-sampled, calibrated channel per selected subcarrier.
    std::vector<ChannelVector> channels;
};

} // namespace

ClusterStats cluster_correlation_stats(const DatasetReader &reader, int m_subarray,
                                       const ClusterStatsOptions &options)
{
    const DatasetManifest &manifest = reader.manifest();
    const int n_clusters = static_cast<int>(manifest.clusters.size());
    if (n_clusters < 1)
        throw std::invalid_argument("cluster_correlation_stats: dataset has no clusters");

    std::vector<int> subcarriers = options.subcarriers;
    if (subcarriers.empty())
    {
        subcarriers.resize(static_cast<std::size_t>(manifest.n_subcarriers));
        for (int s = 0; s < manifest.n_subcarriers; ++s)
            subcarriers[static_cast<std::size_t>(s)] = s;
    }
    for (int s : subcarriers)
        if (s < 0 || s >= manifest.n_subcarriers)
            throw std::invalid_argument("cluster_correlation_stats: subcarrier index " +
                                        std::to_string(s) + " out of range");
    const int n_sc = static_cast<int>(subcarriers.size());

    const LocationRecord calib = reader.load(manifest.calibration_location_id);
    if (options.frame < 0 || options.frame >= calib.frames)
        throw std::invalid_argument("cluster_correlation_stats: frame index out of range");

    // Calibrate and sub-sample every location up front; one blob load each.
    std::vector<std::vector<CalibratedLocation>> per_cluster(
        static_cast<std::size_t>(n_clusters));
    for (int ci = 0; ci < n_clusters; ++ci)
    {
        const ClusterInfo &cluster = manifest.clusters[static_cast<std::size_t>(ci)];
        for (const std::string &loc_id : cluster.location_ids)
        {
            if (options.min_snr_db &&
                !record_meets_snr(manifest.record_info(loc_id), *options.min_snr_db))
                continue;
            const LocationRecord record = reader.load(loc_id);
            CalibratedLocation cal;
            cal.location_id = loc_id;
            cal.channels.reserve(static_cast<std::size_t>(n_sc));
            for (int s : subcarriers)
            {
                const ChannelVector raw = select_channel(record, options.frame, s);
                const ChannelVector ref = select_channel(calib, options.frame, s);
                const ChannelVector calibrated = calibrate(raw, ref);
                cal.channels.push_back(
                    subsample_square(calibrated, manifest.geometry, m_subarray).channel);
            }
            per_cluster[static_cast<std::size_t>(ci)].push_back(std::move(cal));
        }
    }

    ClusterStats stats;
    stats.cluster_ids.reserve(static_cast<std::size_t>(n_clusters));
    for (const ClusterInfo &c : manifest.clusters)
        stats.cluster_ids.push_back(c.cluster_id);
    stats.mean = Eigen::MatrixXd::Zero(n_clusters, n_clusters);
    stats.std_subcarrier = Eigen::MatrixXd::Zero(n_clusters, n_clusters);
    stats.n_pairs = Eigen::MatrixXi::Zero(n_clusters, n_clusters);
    stats.per_subcarrier_mean.assign(static_cast<std::size_t>(n_sc),
                                     Eigen::MatrixXd::Zero(n_clusters, n_clusters));

    // Upper-triangular cluster pairs, processed independently.
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n_clusters; ++i)
        for (int j = i; j < n_clusters; ++j)
            pairs.emplace_back(i, j);

    struct PairAccum
    {
        std::vector<double> per_sc_sum;
        long long per_sc_count = 0; // same count for every subcarrier
        int n_location_pairs = 0;
    };
    std::vector<PairAccum> accums(pairs.size());

    detail::parallel_for(pairs.size(), options.threads, [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        PairAccum acc;
        acc.per_sc_sum.assign(static_cast<std::size_t>(n_sc), 0.0);
        const auto &left = per_cluster[static_cast<std::size_t>(i)];
        const auto &right = per_cluster[static_cast<std::size_t>(j)];
        for (std::size_t a = 0; a < left.size(); ++a)
        {
            const std::size_t b_begin = (i == j) ? a + 1 : 0;
            for (std::size_t b = b_begin; b < right.size(); ++b)
            {
                ++acc.n_location_pairs;
                for (int s = 0; s < n_sc; ++s)
                    acc.per_sc_sum[static_cast<std::size_t>(s)] += cosine_similarity(
                        left[a].channels[static_cast<std::size_t>(s)],
                        right[b].channels[static_cast<std::size_t>(s)]);
            }
        }
        acc.per_sc_count = acc.n_location_pairs;
        accums[p] = std::move(acc);
    });

    for (std::size_t p = 0; p < pairs.size(); ++p)
    {
        const auto [i, j] = pairs[p];
        const PairAccum &acc = accums[p];
        stats.n_pairs(i, j) = acc.n_location_pairs;
        stats.n_pairs(j, i) = acc.n_location_pairs;
        if (acc.n_location_pairs == 0)
            continue;

        double grand = 0.0;
        std::vector<double> sc_means(static_cast<std::size_t>(n_sc));
        for (int s = 0; s < n_sc; ++s)
        {
            const double mean_s =
                acc.per_sc_sum[static_cast<std::size_t>(s)] / acc.n_location_pairs;
            sc_means[static_cast<std::size_t>(s)] = mean_s;
            stats.per_subcarrier_mean[static_cast<std::size_t>(s)](i, j) = mean_s;
            stats.per_subcarrier_mean[static_cast<std::size_t>(s)](j, i) = mean_s;
            grand += mean_s;
        }
        grand /= n_sc;

        double var = 0.0;
        for (double m : sc_means)
            var += (m - grand) * (m - grand);
        var = n_sc > 1 ? var / (n_sc - 1) : 0.0;

        stats.mean(i, j) = grand;
        stats.mean(j, i) = grand;
        stats.std_subcarrier(i, j) = std::sqrt(var);
        stats.std_subcarrier(j, i) = std::sqrt(var);
    }

    return stats;
}

} // namespace iucorr
