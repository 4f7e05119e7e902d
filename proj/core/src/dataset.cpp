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

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>

namespace iucorr
{

namespace
{

using json = nlohmann::json;

// CRC-64/XZ (reflected, poly 0xC96C5795D7870F42, init/xorout all-ones).
const std::array<std::uint64_t, 256> &crc64_table()
{
    static const std::array<std::uint64_t, 256> table = [] {
        std::array<std::uint64_t, 256> t{};
        constexpr std::uint64_t poly = 0xC96C5795D7870F42ULL;
        for (std::uint64_t i = 0; i < 256; ++i)
        {
            std::uint64_t c = i;
            for (int bit = 0; bit < 8; ++bit)
                c = (c & 1u) ? (c >> 1) ^ poly : c >> 1;
            t[static_cast<std::size_t>(i)] = c;
        }
        return t;
    }();
    return table;
}

std::uint64_t crc64(const std::uint8_t *data, std::size_t size)
{
    const auto &table = crc64_table();
    std::uint64_t crc = ~0ULL;
    for (std::size_t i = 0; i < size; ++i)
        crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return ~crc;
}

void put_f32_le(std::vector<std::uint8_t> &out, float value)
{
    const auto bits = std::bit_cast<std::uint32_t>(value);
    out.push_back(static_cast<std::uint8_t>(bits));
    out.push_back(static_cast<std::uint8_t>(bits >> 8));
    out.push_back(static_cast<std::uint8_t>(bits >> 16));
    out.push_back(static_cast<std::uint8_t>(bits >> 24));
}

float get_f32_le(const std::uint8_t *p)
{
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

std::uint64_t get_u64_le(const std::uint8_t *p)
{
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

std::uintmax_t expected_blob_bytes(const DatasetManifest &manifest,
                                   const DatasetManifest::RecordInfo &info)
{
    const std::uintmax_t samples = static_cast<std::uintmax_t>(info.frames) *
                                   static_cast<std::uintmax_t>(manifest.n_subcarriers) *
                                   static_cast<std::uintmax_t>(manifest.geometry.antenna_count());
    return samples * 8u + 8u; // float32 (re, im) pairs plus trailing CRC-64
}

std::filesystem::path blob_path(const std::filesystem::path &dir, const std::string &location_id)
{
    return dir / (location_id + ".cplx");
}

json manifest_to_json(const DatasetManifest &m)
{
    json clusters = json::array();
    for (const ClusterInfo &c : m.clusters)
        clusters.push_back({{"cluster_id", c.cluster_id},
                            {"label", to_string(c.label)},
                            {"location_ids", c.location_ids}});

    json records = json::array();
    for (const auto &r : m.records)
        records.push_back({{"location_id", r.location_id},
                           {"cluster_id", r.cluster_id},
                           {"frames", r.frames},
                           {"snr_db", r.snr_db}});

    return json{{"schema_version", m.schema_version},
                {"center_frequency_hz", m.center_frequency_hz},
                {"bandwidth_hz", m.bandwidth_hz},
                {"n_subcarriers", m.n_subcarriers},
                {"m_x", m.geometry.m_x},
                {"m_y", m.geometry.m_y},
                {"d_x_m", m.geometry.d_x},
                {"d_y_m", m.geometry.d_y},
                {"clusters", clusters},
                {"calibration_location_id", m.calibration_location_id},
                {"records", records}};
}

DatasetManifest manifest_from_json(const json &j)
{
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw std::invalid_argument("dataset manifest: missing schema_version");
    const int version = j["schema_version"].get<int>();
    if (version != 1)
        throw std::invalid_argument("dataset manifest: unsupported schema_version " +
                                    std::to_string(version) + " (supported: 1)");

    DatasetManifest m;
    m.schema_version = version;
    m.center_frequency_hz = j.at("center_frequency_hz").get<double>();
    m.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    m.n_subcarriers = j.at("n_subcarriers").get<int>();
    m.geometry = ArrayGeometry(j.at("m_x").get<int>(), j.at("m_y").get<int>(),
                               j.at("d_x_m").get<double>(), j.at("d_y_m").get<double>());
    m.calibration_location_id = j.at("calibration_location_id").get<std::string>();

    for (const json &c : j.at("clusters"))
    {
        ClusterInfo info;
        info.cluster_id = c.at("cluster_id").get<std::string>();
        info.label = cluster_label_from_string(c.at("label").get<std::string>());
        info.location_ids = c.at("location_ids").get<std::vector<std::string>>();
        m.clusters.push_back(std::move(info));
    }
    for (const json &r : j.at("records"))
    {
        DatasetManifest::RecordInfo info;
        info.location_id = r.at("location_id").get<std::string>();
        info.cluster_id = r.at("cluster_id").get<std::string>();
        info.frames = r.at("frames").get<int>();
        info.snr_db = r.at("snr_db").get<std::vector<double>>();
        m.records.push_back(std::move(info));
    }
    return m;
}

} // namespace

const char *to_string(ClusterLabel label)
{
    return label == ClusterLabel::los ? "los" : "nlos";
}

ClusterLabel cluster_label_from_string(const std::string &s)
{
    if (s == "los")
        return ClusterLabel::los;
    if (s == "nlos")
        return ClusterLabel::nlos;
    throw std::invalid_argument("cluster label must be \"los\" or \"nlos\", got \"" + s + "\"");
}

void DatasetManifest::validate() const
{
    if (schema_version != 1)
        throw std::invalid_argument("dataset manifest: unsupported schema_version " +
                                    std::to_string(schema_version));
    if (n_subcarriers < 1)
        throw std::invalid_argument("dataset manifest: need at least one subcarrier");
    if (records.empty())
        throw std::invalid_argument("dataset manifest: no location records");

    std::set<std::string> ids;
    for (const auto &r : records)
    {
        if (!ids.insert(r.location_id).second)
            throw std::invalid_argument("dataset manifest: duplicate location_id \"" +
                                        r.location_id + "\"");
        if (r.frames < 1)
            throw std::invalid_argument("dataset manifest: location \"" + r.location_id +
                                        "\" has no frames");
        if (static_cast<int>(r.snr_db.size()) != geometry.antenna_count())
            throw std::invalid_argument("dataset manifest: location \"" + r.location_id +
                                        "\" snr_db length does not match antenna count");
    }

    if (calibration_location_id.empty() || ids.count(calibration_location_id) == 0)
        throw std::invalid_argument(
            "dataset manifest: calibration record \"" + calibration_location_id +
            "\" is not among the location records");

    for (const ClusterInfo &c : clusters)
    {
        if (c.location_ids.empty())
            throw std::invalid_argument("dataset manifest: cluster \"" + c.cluster_id +
                                        "\" has no locations");
        for (const std::string &id : c.location_ids)
        {
            if (ids.count(id) == 0)
                throw std::invalid_argument("dataset manifest: cluster \"" + c.cluster_id +
                                            "\" references unknown location \"" + id + "\"");
            if (record_info(id).cluster_id != c.cluster_id)
                throw std::invalid_argument("dataset manifest: location \"" + id +
                                            "\" does not point back to cluster \"" +
                                            c.cluster_id + "\"");
        }
    }
}

const DatasetManifest::RecordInfo &
DatasetManifest::record_info(const std::string &location_id) const
{
    for (const auto &r : records)
        if (r.location_id == location_id)
            return r;
    throw std::invalid_argument("dataset manifest: unknown location \"" + location_id + "\"");
}

cxd LocationRecord::at(int frame, int subcarrier, int antenna) const
{
    if (frame < 0 || frame >= frames || subcarrier < 0 || subcarrier >= n_subcarriers ||
        antenna < 0 || antenna >= n_antennas)
        throw std::out_of_range("LocationRecord: index out of range");
    const std::size_t idx =
        (static_cast<std::size_t>(frame) * n_subcarriers + subcarrier) * n_antennas + antenna;
    return samples[idx];
}

ChannelVector select_channel(const LocationRecord &record, int frame, int subcarrier)
{
    if (frame < 0 || frame >= record.frames)
        throw std::out_of_range("select_channel: frame " + std::to_string(frame) +
                                " out of range [0, " + std::to_string(record.frames) + ")");
    if (subcarrier < 0 || subcarrier >= record.n_subcarriers)
        throw std::out_of_range("select_channel: subcarrier " + std::to_string(subcarrier) +
                                " out of range [0, " + std::to_string(record.n_subcarriers) +
                                ")");
    ChannelVector h(record.n_antennas);
    const std::size_t base =
        (static_cast<std::size_t>(frame) * record.n_subcarriers + subcarrier) *
        record.n_antennas;
    for (int a = 0; a < record.n_antennas; ++a)
        h[a] = record.samples[base + static_cast<std::size_t>(a)];
    return h;
}

bool record_meets_snr(const DatasetManifest::RecordInfo &info, double floor_db)
{
    for (double snr : info.snr_db)
        if (!(snr >= floor_db))
            return false;
    return true;
}

void write_dataset(const DatasetManifest &manifest, const std::vector<LocationRecord> &records,
                   const std::filesystem::path &dir)
{
    manifest.validate();
    if (records.size() != manifest.records.size())
        throw std::invalid_argument("write_dataset: record list does not match manifest index");

    const int m = manifest.geometry.antenna_count();
    for (const LocationRecord &r : records)
    {
        const auto &info = manifest.record_info(r.location_id); // throws on unknown id
        if (r.frames != info.frames || r.cluster_id != info.cluster_id)
            throw std::invalid_argument("write_dataset: record \"" + r.location_id +
                                        "\" disagrees with the manifest index");
        if (r.n_subcarriers != manifest.n_subcarriers || r.n_antennas != m)
            throw std::invalid_argument("write_dataset: record \"" + r.location_id +
                                        "\" dimensions do not match the manifest");
        const std::size_t expected = static_cast<std::size_t>(r.frames) * r.n_subcarriers * m;
        if (r.samples.size() != expected)
            throw std::invalid_argument("write_dataset: record \"" + r.location_id +
                                        "\" sample count does not match its dimensions");
        for (const cxd &s : r.samples)
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
                throw std::invalid_argument("write_dataset: record \"" + r.location_id +
                                            "\" contains non-finite samples");
    }

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("write_dataset: cannot create directory " + dir.string() + ": " +
                      ec.message());

    for (const LocationRecord &r : records)
    {
        std::vector<std::uint8_t> payload;
        payload.reserve(r.samples.size() * 8 + 8);
        for (const cxd &s : r.samples)
        {
            put_f32_le(payload, static_cast<float>(s.real()));
            put_f32_le(payload, static_cast<float>(s.imag()));
        }
        const std::uint64_t crc = crc64(payload.data(), payload.size());
        for (int i = 0; i < 8; ++i)
            payload.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));

        const auto path = blob_path(dir, r.location_id);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("write_dataset: cannot open " + path.string() + " for writing");
        out.write(reinterpret_cast<const char *>(payload.data()),
                  static_cast<std::streamsize>(payload.size()));
        if (!out)
            throw IoError("write_dataset: short write to " + path.string());
    }

    const auto manifest_path = dir / "manifest.json";
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("write_dataset: cannot open " + manifest_path.string() + " for writing");
    out << manifest_to_json(manifest).dump(2) << '\n';
    if (!out)
        throw IoError("write_dataset: short write to " + manifest_path.string());
}

DatasetReader::DatasetReader(const std::filesystem::path &dir) : dir_(dir)
{
    const auto manifest_path = dir_ / "manifest.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in)
        throw IoError("dataset: cannot open " + manifest_path.string());
    json j;
    try
    {
        in >> j;
    }
    catch (const json::parse_error &e)
    {
        throw std::invalid_argument("dataset: malformed manifest " + manifest_path.string() +
                                    ": " + e.what());
    }
    manifest_ = manifest_from_json(j);
    manifest_.validate();

    // Size check on open catches truncated or padded blobs before any load.
    for (const auto &info : manifest_.records)
    {
        const auto path = blob_path(dir_, info.location_id);
        std::error_code ec;
        const std::uintmax_t size = std::filesystem::file_size(path, ec);
        if (ec)
            throw IoError("dataset: missing blob for location \"" + info.location_id + "\" (" +
                          path.string() + ")");
        const std::uintmax_t expected = expected_blob_bytes(manifest_, info);
        if (size != expected)
            throw IoError("dataset: blob for location \"" + info.location_id + "\" has " +
                          std::to_string(size) + " bytes, expected " + std::to_string(expected));
    }
}

LocationRecord DatasetReader::load(const std::string &location_id) const
{
    const auto &info = manifest_.record_info(location_id);
    const auto path = blob_path(dir_, location_id);

    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("dataset: cannot open blob for location \"" + location_id + "\"");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    ++blob_loads_;

    const std::uintmax_t expected = expected_blob_bytes(manifest_, info);
    if (bytes.size() != expected)
        throw IoError("dataset: blob for location \"" + location_id + "\" has " +
                      std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(expected));

    const std::size_t payload_size = bytes.size() - 8;
    const std::uint64_t stored = get_u64_le(bytes.data() + payload_size);
    const std::uint64_t actual = crc64(bytes.data(), payload_size);
    if (stored != actual)
        throw IoError("dataset: checksum mismatch for location \"" + location_id + "\"");

    LocationRecord record;
    record.location_id = info.location_id;
    record.cluster_id = info.cluster_id;
    record.frames = info.frames;
    record.n_subcarriers = manifest_.n_subcarriers;
    record.n_antennas = manifest_.geometry.antenna_count();
    record.snr_db = info.snr_db;
    record.samples.resize(payload_size / 8);
    for (std::size_t i = 0; i < record.samples.size(); ++i)
    {
        const std::uint8_t *p = bytes.data() + i * 8;
        record.samples[i] = cxd(static_cast<double>(get_f32_le(p)),
                                static_cast<double>(get_f32_le(p + 4)));
    }
    return record;
}

namespace
{

class NativeAdapter final : public ImportAdapter
{
  public:
    std::string name() const override { return "native"; }

    DatasetManifest import_manifest(const std::filesystem::path &source) const override
    {
        return DatasetReader(source).manifest();
    }

    LocationRecord import_record(const std::filesystem::path &source,
                                 const std::string &location_id) const override
    {
        return DatasetReader(source).load(location_id);
    }
};

} // namespace

std::unique_ptr<ImportAdapter> make_native_adapter()
{
    return std::make_unique<NativeAdapter>();
}

} // namespace iucorr
