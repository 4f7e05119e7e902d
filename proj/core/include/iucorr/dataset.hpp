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

#ifndef IUCORR_DATASET_HPP
#define IUCORR_DATASET_HPP

#include "iucorr/geometry.hpp"
#include "iucorr/types.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace iucorr
{

// On-disk container layout (schema_version 1):
//   <dir>/manifest.json        UTF-8 manifest, fields documented in README
//   <dir>/<location_id>.cplx   one blob per location: little-endian float32
//                              interleaved (real, imag) samples, frame-major,
//                              subcarrier next, antenna innermost, followed
//                              by the CRC-64/XZ of the payload as 8 LE bytes.

enum class ClusterLabel
{
    los,
    nlos
};

const char *to_string(ClusterLabel label);
ClusterLabel cluster_label_from_string(const std::string &s);

struct ClusterInfo
{
    std::string cluster_id;
    ClusterLabel label = ClusterLabel::los;
    std::vector<std::string> location_ids;
};

struct DatasetManifest
{
    int schema_version = 1;
    double center_frequency_hz = 0.0;
    double bandwidth_hz = 0.0;
    int n_subcarriers = 1;
    ArrayGeometry geometry{1, 1, 1.0, 1.0};
    std::vector<ClusterInfo> clusters;
    std::string calibration_location_id;

    /// Per-location index: frame count and per-antenna SNR estimates kept in
    /// the manifest so readers can size-check blobs and apply SNR floors
    /// without loading tensors. The calibration record appears here but in
    /// no cluster.
    struct RecordInfo
    {
        std::string location_id;
        std::string cluster_id; // empty for the calibration record
        int frames = 1;
        std::vector<double> snr_db; // one value per antenna
    };
    std::vector<RecordInfo> records;

    void validate() const;
    const RecordInfo &record_info(const std::string &location_id) const;
};

/// One location's channel tensor: frames x subcarriers x antennas, complex.
struct LocationRecord
{
    std::string location_id;
    std::string cluster_id;
    int frames = 1;
    int n_subcarriers = 1;
    int n_antennas = 1;
    std::vector<cxd> samples; // frame-major, subcarrier next, antenna innermost
    std::vector<double> snr_db;

    cxd at(int frame, int subcarrier, int antenna) const;
};

/// Length-M slice of one (frame, subcarrier).
ChannelVector select_channel(const LocationRecord &record, int frame, int subcarrier);

/// All per-antenna SNR estimates at or above the floor.
bool record_meets_snr(const DatasetManifest::RecordInfo &info, double floor_db);

/// Write manifest + blobs. Validates invariants first (non-empty record
/// list, unique ids, calibration record present, tensor dimensions matching
/// the manifest, finite samples).
void write_dataset(const DatasetManifest &manifest, const std::vector<LocationRecord> &records,
                   const std::filesystem::path &dir);

/// Read-side handle. Opening parses and validates the manifest and checks
/// every blob's presence and exact byte size (truncation is caught here,
/// naming the location). Tensors load lazily, one blob per load() call,
/// with CRC verification.
class DatasetReader
{
  public:
    explicit DatasetReader(const std::filesystem::path &dir);

    const DatasetManifest &manifest() const { return manifest_; }
    const std::filesystem::path &directory() const { return dir_; }

    LocationRecord load(const std::string &location_id) const;

    /// Number of blob reads performed so far (lazy-access instrumentation).
    std::size_t blob_loads() const { return blob_loads_; }

  private:
    std::filesystem::path dir_;
    DatasetManifest manifest_;
    mutable std::size_t blob_loads_ = 0;
};

/// Seam for mapping external channel releases onto the native container.
/// The byte-level layout of the public measurement release is not fixed by
/// this library; a concrete adapter re-maps antenna indexing and units and
/// produces records in the native row-major convention.
class ImportAdapter
{
  public:
    virtual ~ImportAdapter() = default;
    virtual std::string name() const = 0;
    virtual DatasetManifest import_manifest(const std::filesystem::path &source) const = 0;
    virtual LocationRecord import_record(const std::filesystem::path &source,
                                         const std::string &location_id) const = 0;
};

/// Adapter for datasets already stored in the native container format.
std::unique_ptr<ImportAdapter> make_native_adapter();

/// Parameters of a synthetic measurement-campaign-shaped dataset: clusters
/// of close-by locations sharing per-cluster anchor angles, a per-frame
/// antenna phase screen shared by all records, and a boresight calibration
/// record that captures the screen. Samples are quantized to float32 at
/// generation so a container round trip is value-exact.
struct SyntheticDatasetSpec
{
    int clusters_los = 4;
    int clusters_nlos = 5;
    int locations_per_cluster = 25;
    ArrayGeometry geometry{8, 8, 0.0635, 0.0635};
    double center_frequency_hz = 2.437e9;
    double bandwidth_hz = 20e6;
    int n_subcarriers = 52;
    int frames = 2;
    int paths_los = 1;
    int paths_nlos = 3;
    double intra_cluster_jitter = 0.05; // per-location sine offset half-width
    double snr_db = 25.0;
    std::uint64_t master_seed = 7;
};

struct SyntheticDataset
{
    DatasetManifest manifest;
    std::vector<LocationRecord> records;
};

SyntheticDataset generate_synthetic_dataset(const SyntheticDatasetSpec &spec);

} // namespace iucorr

#endif
