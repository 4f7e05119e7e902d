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

#ifndef IUCORR_EXPERIMENT_HPP
#define IUCORR_EXPERIMENT_HPP

#include "iucorr/synth.hpp"
#include "iucorr/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace iucorr
{

enum class ExperimentKind
{
    alpha_sweep,          // empirical/closed/asymptotic over an alpha grid
    m_sweep,              // same grid, ordered by antenna count
    spacing_offset,       // spacing x alpha grid (aperture-offset studies)
    subcarrier_variation, // per-subcarrier correlation at fixed geometry
    cluster_stats,        // dataset cluster-pair heat map
    lemma_report,         // sinc-series and lag-sum convergence tables
    music_map             // angle spectrum of one dataset location
};

const char *to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string &s);

/// One experiment = one config file. Unknown keys are errors; per-kind
/// required keys are checked up front. See README for the schema.
struct ExperimentConfig
{
    ExperimentKind kind = ExperimentKind::m_sweep;

    std::string array_type = "upa"; // "upa" (square) or "ula"
    std::vector<int> m_values;      // total antenna counts (UPA: perfect squares)
    std::vector<double> alphas;     // angle-correlation half-width per curve
    std::vector<double> spacings_wl{0.5}; // antenna spacing in wavelengths ...
    std::vector<double> spacings_m;       // ... or in meters (exclusive)
    int n_keyholes = 1;                   // 1 = LOS, >1 = keyhole ensemble
    int sample_size = 20000;
    std::uint64_t master_seed = 1;
    double center_frequency_hz = 2.437e9;

    SubcarrierPlan subcarrier_plan{2.437e9, 20e6, 52};
    int samples_per_subcarrier = 500;

    std::string dataset_path; // cluster_stats, music_map
    int subarray_m = 64;
    std::vector<int> subcarriers; // selection, empty = all

    std::vector<double> lemma_gammas{0.5, 1.0, 1.5707963267948966, 3.141592653589793};
    std::int64_t lemma_series_n = 1000000;
    int lemma_lag_m = 10000;

    std::string music_location;
    int music_sources = 0; // 0 = pick by eigen-gap
    double grid_step_deg = 1.0;
    int music_frame = 0;

    std::string output_path; // CSV destination; CLI may override

    int threads = 0; // 0 = hardware concurrency

    void validate() const;

    static ExperimentConfig from_json_text(const std::string &text);
    static ExperimentConfig from_json_file(const std::filesystem::path &path);

    /// Canonical serialization (sorted keys); input to the fingerprint.
    std::string canonical_json() const;
};

/// Stable 64-bit FNV-1a fingerprint of the canonical config, hex-encoded.
std::string config_fingerprint(const ExperimentConfig &config);

/// Column-typed result rows plus a provenance block (config hash, seed,
/// tool version). Every empirical value carries its standard error and
/// sample count in adjacent columns.
struct ResultTable
{
    enum class ColumnKind
    {
        real,
        integer,
        text
    };

    struct Column
    {
        std::string name;
        ColumnKind kind;
    };

    using Cell = std::variant<double, std::int64_t, std::string>;

    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
    std::map<std::string, std::string> provenance; // emitted sorted by key

    int column_index(const std::string &name) const;
    void add_row(std::vector<Cell> cells);
};

/// Deterministic under a fixed (config, master_seed): per-grid-point RNG
/// streams are keyed by grid index and rows are emitted in grid order, so
/// the output is independent of the worker count.
ResultTable run_experiment(const ExperimentConfig &config);

/// RFC-4180-style CSV with '#'-prefixed provenance comment lines before the
/// header. Reals are written with 17 significant digits (value-exact round
/// trip); same config + seed produces byte-identical files.
void emit_csv(const ResultTable &table, const std::filesystem::path &path);
std::string to_csv(const ResultTable &table);

} // namespace iucorr

#endif
