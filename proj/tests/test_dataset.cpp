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

#include "iucorr/dataset.hpp"
#include "iucorr/rng.hpp"

#include <filesystem>
#include <fstream>

using namespace iucorr;
namespace fs = std::filesystem;

namespace
{

struct TempDir
{
    fs::path path;
    explicit TempDir(const char *tag)
        : path(fs::temp_directory_path() / (std::string("iucorr-test-") + tag))
    {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SyntheticDataset small_dataset(std::uint64_t seed = 5)
{
    SyntheticDatasetSpec spec;
    spec.clusters_los = 1;
    spec.clusters_nlos = 2;
    spec.locations_per_cluster = 3;
    spec.n_subcarriers = 4;
    spec.frames = 2;
    spec.geometry = ArrayGeometry(4, 4, 0.0635, 0.0635);
    spec.master_seed = seed;
    return generate_synthetic_dataset(spec);
}

} // namespace

TEST_CASE("write then read returns identical records")
{
    const SyntheticDataset data = small_dataset();
    TempDir dir("roundtrip");
    write_dataset(data.manifest, data.records, dir.path);

    DatasetReader reader(dir.path);
    CHECK(reader.manifest().n_subcarriers == 4);
    CHECK(reader.manifest().geometry.antenna_count() == 16);
    CHECK(reader.manifest().clusters.size() == 3);

    for (const LocationRecord &orig : data.records)
    {
        const LocationRecord back = reader.load(orig.location_id);
        REQUIRE(back.samples.size() == orig.samples.size());
        for (std::size_t i = 0; i < orig.samples.size(); ++i)
            CHECK(back.samples[i] == orig.samples[i]); // float32-exact by construction
        CHECK(back.cluster_id == orig.cluster_id);
        CHECK(back.frames == orig.frames);
        CHECK(back.snr_db == orig.snr_db);
    }
}

TEST_CASE("an empty record list is rejected")
{
    DatasetManifest manifest = small_dataset().manifest;
    manifest.records.clear();
    manifest.clusters.clear();
    TempDir dir("empty");
    CHECK_THROWS_AS(write_dataset(manifest, {}, dir.path), std::invalid_argument);
}

TEST_CASE("per-record invariants are enforced on write")
{
    SyntheticDataset data = small_dataset();
    TempDir dir("badrec");

    SUBCASE("antenna count mismatch")
    {
        data.records.front().n_antennas = 15;
        data.records.front().samples.resize(2 * 4 * 15);
        CHECK_THROWS_AS(write_dataset(data.manifest, data.records, dir.path),
                        std::invalid_argument);
    }

    SUBCASE("non-finite samples")
    {
        data.records.front().samples[3] = cxd(std::nan(""), 0.0);
        CHECK_THROWS_AS(write_dataset(data.manifest, data.records, dir.path),
                        std::invalid_argument);
    }

    SUBCASE("calibration record must exist")
    {
        DatasetManifest manifest = data.manifest;
        manifest.calibration_location_id = "nope";
        CHECK_THROWS_AS(write_dataset(manifest, data.records, dir.path), std::invalid_argument);
    }
}

TEST_CASE("corruption and truncation are detected and named")
{
    const SyntheticDataset data = small_dataset();
    TempDir dir("corrupt");
    write_dataset(data.manifest, data.records, dir.path);
    const std::string victim = data.records[1].location_id;
    const fs::path blob = dir.path / (victim + ".cplx");

    SUBCASE("bit flip fails the checksum on load")
    {
        {
            std::fstream f(blob, std::ios::binary | std::ios::in | std::ios::out);
            f.seekp(40);
            f.put(static_cast<char>(0x7F));
        }
        DatasetReader reader(dir.path);
        try
        {
            (void)reader.load(victim);
            FAIL("expected a checksum failure");
        }
        catch (const IoError &e)
        {
            CHECK(std::string(e.what()).find("checksum") != std::string::npos);
            CHECK(std::string(e.what()).find(victim) != std::string::npos);
        }
    }

    SUBCASE("truncation fails the size check on open")
    {
        fs::resize_file(blob, fs::file_size(blob) - 4);
        try
        {
            DatasetReader reader(dir.path);
            FAIL("expected a size failure");
        }
        catch (const IoError &e)
        {
            CHECK(std::string(e.what()).find(victim) != std::string::npos);
        }
    }

    SUBCASE("missing blob is reported")
    {
        fs::remove(blob);
        CHECK_THROWS_AS(DatasetReader{dir.path}, IoError);
    }
}

TEST_CASE("unsupported schema versions are refused")
{
    const SyntheticDataset data = small_dataset();
    TempDir dir("version");
    write_dataset(data.manifest, data.records, dir.path);

    // Bump the version in place; the reader must refuse explicitly.
    const fs::path manifest_path = dir.path / "manifest.json";
    std::ifstream in(manifest_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const auto pos = text.find("\"schema_version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("\"schema_version\": 1").size(), "\"schema_version\": 2");
    std::ofstream out(manifest_path, std::ios::trunc);
    out << text;
    out.close();

    try
    {
        DatasetReader reader(dir.path);
        FAIL("expected an unsupported-version rejection");
    }
    catch (const std::invalid_argument &e)
    {
        CHECK(std::string(e.what()).find("schema_version") != std::string::npos);
    }
}

TEST_CASE("channel selection by frame and subcarrier")
{
    const SyntheticDataset data = small_dataset();
    const LocationRecord &record = data.records.front();

    const ChannelVector h = select_channel(record, 0, 2);
    REQUIRE(h.size() == 16);
    for (int a = 0; a < 16; ++a)
        CHECK(h[a] == record.at(0, 2, a));

    const ChannelVector last = select_channel(record, record.frames - 1, 0);
    CHECK(last[5] == record.at(record.frames - 1, 0, 5));

    CHECK_THROWS_AS(select_channel(record, 0, record.n_subcarriers), std::out_of_range);
    CHECK_THROWS_AS(select_channel(record, record.frames, 0), std::out_of_range);
    CHECK_THROWS_AS(select_channel(record, -1, 0), std::out_of_range);
}

TEST_CASE("lazy reader loads one blob per request")
{
    const SyntheticDataset data = small_dataset();
    TempDir dir("lazy");
    write_dataset(data.manifest, data.records, dir.path);

    DatasetReader reader(dir.path);
    CHECK(reader.blob_loads() == 0); // opening validates sizes only
    (void)reader.load(data.records[0].location_id);
    CHECK(reader.blob_loads() == 1);
    (void)reader.load(data.records[1].location_id);
    CHECK(reader.blob_loads() == 2);
}

TEST_CASE("snr floor predicate")
{
    DatasetManifest::RecordInfo info;
    info.snr_db = {20.0, 18.5, 25.0};
    CHECK(record_meets_snr(info, 15.0));
    CHECK(!record_meets_snr(info, 19.0));
}

TEST_CASE("native import adapter round trip")
{
    const SyntheticDataset data = small_dataset();
    TempDir dir("adapter");
    write_dataset(data.manifest, data.records, dir.path);

    const auto adapter = make_native_adapter();
    CHECK(adapter->name() == "native");
    const DatasetManifest manifest = adapter->import_manifest(dir.path);
    CHECK(manifest.records.size() == data.manifest.records.size());
    const LocationRecord record =
        adapter->import_record(dir.path, data.records.front().location_id);
    CHECK(record.samples == data.records.front().samples);
}
