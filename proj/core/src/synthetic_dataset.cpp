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

#include "iucorr/dataset.hpp"
#include "iucorr/rng.hpp"
#include "iucorr/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace iucorr
{

namespace
{

cxd quantize(cxd v)
{
    return cxd(static_cast<double>(static_cast<float>(v.real())),
               static_cast<double>(static_cast<float>(v.imag())));
}

std::string two_digit(int n)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", n);
    return std::string(buf);
}

struct ClusterPlan
{
    std::string id;
    ClusterLabel label;
    int n_paths;
    std::vector<double> anchor_x, anchor_y; // per-path anchor sines
};

} // namespace

SyntheticDataset generate_synthetic_dataset(const SyntheticDatasetSpec &spec)
{
    if (spec.clusters_los + spec.clusters_nlos < 1)
        throw std::invalid_argument("generate_synthetic_dataset: need at least one cluster");
    if (spec.locations_per_cluster < 1)
        throw std::invalid_argument("generate_synthetic_dataset: need at least one location");
    if (spec.frames < 1 || spec.paths_los < 1 || spec.paths_nlos < 1)
        throw std::invalid_argument("generate_synthetic_dataset: bad frame or path counts");

    const int m = spec.geometry.antenna_count();
    const SubcarrierPlan plan{spec.center_frequency_hz, spec.bandwidth_hz, spec.n_subcarriers};
    const std::vector<double> wavelengths = subcarrier_wavelengths(plan);
    const double sigma = std::pow(10.0, -spec.snr_db / 20.0);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    // Stream 0: per-frame antenna phase screens (the per-chain LO offsets
    // that calibration is meant to remove). Stream 1: cluster anchors.
    // Streams 10+i: one per location.
    RngStream screen_rng(spec.master_seed, 0);
    std::vector<std::vector<cxd>> screen(static_cast<std::size_t>(spec.frames));
    for (int f = 0; f < spec.frames; ++f)
    {
        screen[static_cast<std::size_t>(f)].resize(static_cast<std::size_t>(m));
        for (int a = 0; a < m; ++a)
            screen[static_cast<std::size_t>(f)][static_cast<std::size_t>(a)] =
                std::polar(1.0, screen_rng.uniform(0.0, two_pi));
    }

    RngStream anchor_rng(spec.master_seed, 1);
    std::vector<ClusterPlan> plans;
    for (int c = 0; c < spec.clusters_los + spec.clusters_nlos; ++c)
    {
        ClusterPlan cp;
        const bool is_los = c < spec.clusters_los;
        cp.label = is_los ? ClusterLabel::los : ClusterLabel::nlos;
        cp.id = std::string(is_los ? "los_" : "nlos_") +
                std::to_string(is_los ? c + 1 : c - spec.clusters_los + 1);
        cp.n_paths = is_los ? spec.paths_los : spec.paths_nlos;
        for (int l = 0; l < cp.n_paths; ++l)
        {
            cp.anchor_x.push_back(anchor_rng.uniform(-0.7, 0.7));
            cp.anchor_y.push_back(anchor_rng.uniform(-0.7, 0.7));
        }
        plans.push_back(std::move(cp));
    }

    DatasetManifest manifest;
    manifest.center_frequency_hz = spec.center_frequency_hz;
    manifest.bandwidth_hz = spec.bandwidth_hz;
    manifest.n_subcarriers = spec.n_subcarriers;
    manifest.geometry = spec.geometry;
    manifest.calibration_location_id = "calibration";

    SyntheticDataset out;
    const std::vector<double> nominal_snr(static_cast<std::size_t>(m), spec.snr_db);

    auto make_record = [&](const std::string &id, const std::string &cluster_id,
                           RngStream &rng, const std::vector<double> &sx,
                           const std::vector<double> &sy, double gain, bool boresight) {
        LocationRecord record;
        record.location_id = id;
        record.cluster_id = cluster_id;
        record.frames = spec.frames;
        record.n_subcarriers = spec.n_subcarriers;
        record.n_antennas = m;
        record.snr_db = nominal_snr;
        record.samples.resize(static_cast<std::size_t>(spec.frames) * spec.n_subcarriers * m);

        const int n_paths = static_cast<int>(sx.size());
        std::size_t idx = 0;
        for (int f = 0; f < spec.frames; ++f)
        {
            std::vector<double> phases(static_cast<std::size_t>(n_paths));
            for (int l = 0; l < n_paths; ++l)
                phases[static_cast<std::size_t>(l)] =
                    boresight ? 0.0 : rng.uniform(0.0, two_pi);
            for (int sc = 0; sc < spec.n_subcarriers; ++sc)
            {
                const double lambda = wavelengths[static_cast<std::size_t>(sc)];
                ChannelVector h = ChannelVector::Zero(m);
                for (int l = 0; l < n_paths; ++l)
                {
                    const SteeringAngles angles{sx[static_cast<std::size_t>(l)],
                                                sy[static_cast<std::size_t>(l)]};
                    h += std::polar(gain, phases[static_cast<std::size_t>(l)]) *
                         steering_vector(spec.geometry, angles, lambda);
                }
                for (int a = 0; a < m; ++a)
                {
                    const cxd sample = screen[static_cast<std::size_t>(f)]
                                             [static_cast<std::size_t>(a)] *
                                           h[a] +
                                       sigma * rng.complex_normal();
                    record.samples[idx++] = quantize(sample);
                }
            }
        }
        return record;
    };

    std::uint64_t location_stream = 10;
    for (const ClusterPlan &cp : plans)
    {
        ClusterInfo info;
        info.cluster_id = cp.id;
        info.label = cp.label;
        for (int i = 0; i < spec.locations_per_cluster; ++i)
        {
            const std::string loc_id = cp.id + "_loc_" + two_digit(i + 1);
            info.location_ids.push_back(loc_id);

            RngStream rng(spec.master_seed, location_stream++);
            std::vector<double> sx(cp.anchor_x), sy(cp.anchor_y);
            for (std::size_t l = 0; l < sx.size(); ++l)
            {
                sx[l] += rng.uniform_symmetric(spec.intra_cluster_jitter);
                sy[l] += rng.uniform_symmetric(spec.intra_cluster_jitter);
            }
            const double gain = 1.0 / std::sqrt(static_cast<double>(cp.n_paths));
            out.records.push_back(make_record(loc_id, cp.id, rng, sx, sy, gain, false));

            DatasetManifest::RecordInfo ri;
            ri.location_id = loc_id;
            ri.cluster_id = cp.id;
            ri.frames = spec.frames;
            ri.snr_db = nominal_snr;
            manifest.records.push_back(std::move(ri));
        }
        manifest.clusters.push_back(std::move(info));
    }

    // Calibration node at boresight: true channel all-ones, so its record
    // is the screen itself plus noise.
    {
        RngStream rng(spec.master_seed, location_stream++);
        out.records.push_back(make_record("calibration", "", rng, {0.0}, {0.0}, 1.0, true));
        DatasetManifest::RecordInfo ri;
        ri.location_id = "calibration";
        ri.cluster_id = "";
        ri.frames = spec.frames;
        ri.snr_db = nominal_snr;
        manifest.records.push_back(std::move(ri));
    }

    manifest.validate();
    out.manifest = std::move(manifest);
    return out;
}

} // namespace iucorr
