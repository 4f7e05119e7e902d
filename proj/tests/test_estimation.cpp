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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iucorr/estimation.hpp"
#include "iucorr/synth.hpp"

#include <cmath>
#include <numbers>

using namespace iucorr;

namespace
{
constexpr double kLambda = 0.123;
}

TEST_CASE("cosine similarity")
{
    SUBCASE("collinear vectors score 1 under any complex scale")
    {
        RngStream rng(41, 0);
        const ChannelVector h = generate_rayleigh(16, rng);
        const ChannelVector scaled = cxd(0.3, -1.7) * h;
        CHECK(cosine_similarity(h, scaled) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("orthogonal vectors score 0")
    {
        ChannelVector a = ChannelVector::Zero(4), b = ChannelVector::Zero(4);
        a[0] = 1.0;
        b[1] = 1.0;
        CHECK(cosine_similarity(a, b) == 0.0);
    }

    SUBCASE("hand-evaluated 45-degree pair")
    {
        ChannelVector a(2), b(2);
        a << cxd(1, 0), cxd(0, 0);
        b << cxd(1.0 / std::sqrt(2.0), 0), cxd(1.0 / std::sqrt(2.0), 0);
        CHECK(cosine_similarity(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    }

    SUBCASE("symmetry, scale invariance, unit bound")
    {
        RngStream rng(41, 1);
        for (int trial = 0; trial < 200; ++trial)
        {
            const ChannelVector h1 = generate_rayleigh(8, rng);
            const ChannelVector h2 = generate_rayleigh(8, rng);
            const double c = cosine_similarity(h1, h2);
            CHECK(c >= 0.0);
            CHECK(c <= 1.0 + 1e-12);
            CHECK(cosine_similarity(h2, h1) == doctest::Approx(c).epsilon(1e-12));
            const cxd scale(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
            if (std::abs(scale) > 1e-6)
                CHECK(cosine_similarity(scale * h1, h2) == doctest::Approx(c).epsilon(1e-10));
        }
    }

    SUBCASE("zero-norm input is rejected")
    {
        ChannelVector z = ChannelVector::Zero(4);
        ChannelVector o = ChannelVector::Ones(4);
        CHECK_THROWS_AS(cosine_similarity(z, o), std::invalid_argument);
    }
}

TEST_CASE("ensemble variance estimator")
{
    SUBCASE("identical deterministic pairs have zero variance")
    {
        std::vector<std::pair<ChannelVector, ChannelVector>> pairs;
        for (int i = 0; i < 10; ++i)
            pairs.emplace_back(ChannelVector::Ones(8), ChannelVector::Ones(8));
        const CorrelationEstimate est = ensemble_correlation(pairs);
        CHECK(est.variance == 0.0);
        CHECK(est.kind == EstimatorKind::empirical);
        CHECK(est.meta == 10);
    }

    SUBCASE("fully correlated single-path ensemble concentrates at 1")
    {
        const ArrayGeometry geom(8, 8, kLambda / 2.0, kLambda / 2.0);
        const PathEnsembleSpec spec = PathEnsembleSpec::single_path(1.0, 1.0, 0.0, 0.0);
        RngStream rng(42, 0);
        std::vector<cxd> dots;
        for (int i = 0; i < 20000; ++i)
        {
            const auto [h1, h2] = generate_channel_pair(spec, geom, kLambda, rng);
            dots.push_back(h1.dot(h2) / 64.0);
        }
        const EnsembleStats stats = ensemble_correlation_from_dots(dots);
        CHECK(stats.estimate.correlation == doctest::Approx(1.0).epsilon(0.02));
    }

    SUBCASE("fewer than two pairs is an error")
    {
        std::vector<std::pair<ChannelVector, ChannelVector>> one;
        one.emplace_back(ChannelVector::Ones(4), ChannelVector::Ones(4));
        CHECK_THROWS_AS(ensemble_correlation(one), std::invalid_argument);
    }

    SUBCASE("mixed antenna counts are rejected")
    {
        std::vector<std::pair<ChannelVector, ChannelVector>> pairs;
        pairs.emplace_back(ChannelVector::Ones(4), ChannelVector::Ones(4));
        pairs.emplace_back(ChannelVector::Ones(5), ChannelVector::Ones(5));
        CHECK_THROWS_AS(ensemble_correlation(pairs), std::invalid_argument);
    }
}

TEST_CASE("calibration")
{
    SUBCASE("self-calibration returns all ones")
    {
        RngStream rng(43, 0);
        const ChannelVector h = generate_rayleigh(16, rng);
        const ChannelVector out = calibrate(h, h);
        for (int i = 0; i < 16; ++i)
            CHECK(std::abs(out[i] - cxd(1.0, 0.0)) < 1e-14);
    }

    SUBCASE("random gain-and-phase screen round trip")
    {
        RngStream rng(43, 1);
        for (int trial = 0; trial < 20; ++trial)
        {
            const ChannelVector truth = generate_rayleigh(64, rng);
            ChannelVector screen(64);
            for (int a = 0; a < 64; ++a)
                screen[a] = std::polar(rng.uniform(0.5, 2.0),
                                       rng.uniform(0.0, 2.0 * std::numbers::pi));
            const ChannelVector raw = screen.cwiseProduct(truth);
            const ChannelVector calibrated = calibrate(raw, screen);
            CHECK((calibrated - truth).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    SUBCASE("dead antenna is named")
    {
        ChannelVector raw = ChannelVector::Ones(4);
        ChannelVector calib = ChannelVector::Ones(4);
        calib[2] = cxd(0.0, 0.0);
        try
        {
            (void)calibrate(raw, calib);
            FAIL("expected a dead-antenna rejection");
        }
        catch (const std::invalid_argument &e)
        {
            CHECK(std::string(e.what()).find("index 2") != std::string::npos);
        }
    }
}

TEST_CASE("conjugate beamforming interference")
{
    SUBCASE("orthogonal users see zero interference")
    {
        std::vector<ChannelVector> channels;
        for (int k = 0; k < 3; ++k)
        {
            ChannelVector h = ChannelVector::Zero(4);
            h[k] = std::sqrt(4.0);
            channels.push_back(h);
        }
        CHECK(conjugate_bf_interference(channels, {1.0, 1.0, 1.0}, 1) == 0.0);
    }

    SUBCASE("a lone user has an empty interference sum")
    {
        std::vector<ChannelVector> channels{ChannelVector::Ones(8)};
        CHECK(conjugate_bf_interference(channels, {2.5}, 0) == 0.0);
    }

    SUBCASE("two identical unit-gain users: M squared")
    {
        const ChannelVector h = ChannelVector::Ones(16); // squared norm 16 = M
        std::vector<ChannelVector> channels{h, h};
        CHECK(conjugate_bf_interference(channels, {1.0, 1.0}, 0) ==
              doctest::Approx(256.0).epsilon(1e-14));
    }

    SUBCASE("index and gain validation")
    {
        std::vector<ChannelVector> channels{ChannelVector::Ones(4), ChannelVector::Ones(4)};
        CHECK_THROWS_AS(conjugate_bf_interference(channels, {1.0, 1.0}, 2),
                        std::invalid_argument);
        CHECK_THROWS_AS(conjugate_bf_interference(channels, {1.0}, 0), std::invalid_argument);
    }
}

TEST_CASE("cluster statistics on a synthetic dataset")
{
    SyntheticDatasetSpec spec;
    spec.clusters_los = 2;
    spec.clusters_nlos = 2;
    spec.locations_per_cluster = 6;
    spec.n_subcarriers = 8;
    spec.frames = 1;
    spec.intra_cluster_jitter = 0.05;
    spec.master_seed = 99;
    const SyntheticDataset data = generate_synthetic_dataset(spec);

    // Route through the container to cover the full measured pipeline.
    const auto dir = std::filesystem::temp_directory_path() / "iucorr-test-clusterstats";
    std::filesystem::remove_all(dir);
    write_dataset(data.manifest, data.records, dir);
    DatasetReader reader(dir);

    SUBCASE("tight clusters dominate every cross-cluster pair")
    {
        const ClusterStats stats = cluster_correlation_stats(reader, 64, {});
        REQUIRE(stats.n_clusters() == 4);
        double min_diag = 1.0, max_off = 0.0;
        for (int i = 0; i < 4; ++i)
        {
            min_diag = std::min(min_diag, stats.mean(i, i));
            for (int j = i + 1; j < 4; ++j)
                max_off = std::max(max_off, stats.mean(i, j));
        }
        CHECK(min_diag > max_off);
        CHECK(stats.n_pairs(0, 0) == 15); // 6 choose 2
        CHECK(stats.n_pairs(0, 1) == 36);
    }

    SUBCASE("narrowband-consistent data varies little across subcarriers")
    {
        const ClusterStats stats = cluster_correlation_stats(reader, 64, {});
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j)
                CHECK(stats.std_subcarrier(i, j) < 0.01);
    }

    SUBCASE("a single subcarrier has zero across-subcarrier deviation")
    {
        ClusterStatsOptions options;
        options.subcarriers = {0};
        const ClusterStats stats = cluster_correlation_stats(reader, 64, options);
        for (int i = 0; i < 4; ++i)
            CHECK(stats.std_subcarrier(i, i) == 0.0);
    }

    SUBCASE("sub-array evaluation and SNR floor")
    {
        const ClusterStats full = cluster_correlation_stats(reader, 64, {});
        const ClusterStats small = cluster_correlation_stats(reader, 16, {});
        // Sub-arrays shrink the aperture, so correlation does not drop.
        CHECK(small.mean(0, 0) >= full.mean(0, 0) - 0.05);

        ClusterStatsOptions strict;
        strict.min_snr_db = spec.snr_db + 1.0; // everything filtered out
        const ClusterStats empty = cluster_correlation_stats(reader, 64, strict);
        CHECK(empty.n_pairs(0, 0) == 0);
    }

    SUBCASE("invalid sub-array and subcarrier selections are rejected")
    {
        CHECK_THROWS_AS(cluster_correlation_stats(reader, 63, {}), std::invalid_argument);
        ClusterStatsOptions bad;
        bad.subcarriers = {99};
        CHECK_THROWS_AS(cluster_correlation_stats(reader, 64, bad), std::invalid_argument);
    }

    std::filesystem::remove_all(dir);
}
