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

// Command-line front end. Exit codes: 0 success, 1 check failure,
// 2 invalid input, 3 I/O error.

#include "iucorr/dataset.hpp"
#include "iucorr/estimation.hpp"
#include "iucorr/experiment.hpp"
#include "iucorr/verify.hpp"
#include "iucorr/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitIoError = 3;

int run_config(const std::string &config_path, const std::string &out_override,
               std::uint64_t seed_override, bool has_seed, int threads)
{
    iucorr::ExperimentConfig config =
        iucorr::ExperimentConfig::from_json_file(config_path);
    if (has_seed)
        config.master_seed = seed_override;
    if (threads >= 0)
        config.threads = threads;

    const iucorr::ResultTable table = iucorr::run_experiment(config);

    std::string out_path = !out_override.empty() ? out_override : config.output_path;
    if (out_path.empty())
    {
        std::cout << iucorr::to_csv(table);
        return kExitOk;
    }
    iucorr::emit_csv(table, out_path);
    std::cout << "wrote " << table.rows.size() << " rows to " << out_path << "\n";
    return kExitOk;
}

int run_verify(const std::string &dataset, std::uint64_t seed, int threads)
{
    iucorr::VerifyOptions options;
    options.master_seed = seed;
    options.threads = threads < 0 ? 0 : threads;
    if (!dataset.empty())
        options.measured_dataset_path = dataset;
    else if (const char *env = std::getenv("IUCORR_MEASURED_DATASET"))
        options.measured_dataset_path = env;

    const iucorr::VerifyReport report = iucorr::verify_suite(options);
    iucorr::print_report(report, std::cout);
    return report.exit_code();
}

int run_dataset_validate(const std::string &path)
{
    if (!std::filesystem::exists(path))
    {
        std::cerr << "dataset-validate: path does not exist: " << path << "\n";
        return kExitInvalidInput;
    }
    try
    {
        iucorr::DatasetReader reader(path);
        const auto &manifest = reader.manifest();
        for (const auto &info : manifest.records)
            (void)reader.load(info.location_id); // full CRC pass
        std::cout << "dataset ok: " << manifest.records.size() << " records, "
                  << manifest.clusters.size() << " clusters, geometry " << manifest.geometry.m_x
                  << "x" << manifest.geometry.m_y << ", " << manifest.n_subcarriers
                  << " subcarriers\n";
        return kExitOk;
    }
    catch (const std::exception &e)
    {
        std::cerr << "dataset validation failed: " << e.what() << "\n";
        return kExitCheckFailure;
    }
}

int run_music(const std::string &dataset, const std::string &location, int sources, int frame,
              double grid_step, int subarray, bool no_fb, int smooth,
              const std::string &out_path)
{
    iucorr::DatasetReader reader(dataset);
    const auto &manifest = reader.manifest();
    const iucorr::LocationRecord record = reader.load(location);
    const iucorr::LocationRecord calib = reader.load(manifest.calibration_location_id);

    iucorr::ArrayGeometry geom = manifest.geometry;
    const int m_target = subarray > 0 ? subarray : geom.antenna_count();

    std::vector<iucorr::ChannelVector> snapshots;
    for (int sc = 0; sc < manifest.n_subcarriers; ++sc)
    {
        const iucorr::ChannelVector raw = iucorr::select_channel(record, frame, sc);
        const iucorr::ChannelVector ref = iucorr::select_channel(calib, frame, sc);
        iucorr::ChannelVector cal = iucorr::calibrate(raw, ref);
        if (m_target != manifest.geometry.antenna_count())
        {
            iucorr::SubArray sub =
                iucorr::subsample_square(cal, manifest.geometry, m_target);
            cal = std::move(sub.channel);
            geom = sub.geometry;
        }
        snapshots.push_back(std::move(cal));
    }

    const double wavelength = 299792458.0 / manifest.center_frequency_hz;
    iucorr::MusicOptions options;
    options.forward_backward = !no_fb;
    options.smoothing = smooth;
    const iucorr::AngleGrid grid = iucorr::AngleGrid::degrees(grid_step);
    const iucorr::SpectrumMap map =
        iucorr::music_spectrum(snapshots, geom, wavelength, sources, grid, options);

    constexpr double rad_to_deg = 180.0 / std::numbers::pi;
    const auto peaks = map.local_maxima(4);
    std::cout << "location " << location << ": top spectrum peaks\n";
    for (const auto &p : peaks)
        std::cout << "  theta_x=" << std::asin(p.s_x) * rad_to_deg
                  << " deg, theta_y=" << std::asin(p.s_y) * rad_to_deg
                  << " deg, power=" << p.power << "\n";

    if (!out_path.empty())
    {
        iucorr::ResultTable table;
        using CK = iucorr::ResultTable::ColumnKind;
        table.columns = {{"s_x", CK::real},
                         {"s_y", CK::real},
                         {"theta_x_deg", CK::real},
                         {"theta_y_deg", CK::real},
                         {"power", CK::real},
                         {"log10_power_db", CK::real}};
        for (Eigen::Index ix = 0; ix < map.power.rows(); ++ix)
            for (Eigen::Index iy = 0; iy < map.power.cols(); ++iy)
            {
                const double sx = map.grid.s_x[static_cast<std::size_t>(ix)];
                const double sy = map.grid.s_y[static_cast<std::size_t>(iy)];
                table.add_row({sx, sy, std::asin(sx) * rad_to_deg, std::asin(sy) * rad_to_deg,
                               map.power(ix, iy), map.log_power(ix, iy)});
            }
        table.provenance["kind"] = "music_map";
        table.provenance["location"] = location;
        iucorr::emit_csv(table, out_path);
        std::cout << "wrote spectrum map to " << out_path << "\n";
    }
    return kExitOk;
}

int run_gen_synthetic(const std::string &config_path)
{
    std::ifstream in(config_path, std::ios::binary);
    if (!in)
        throw iucorr::IoError("gen-synthetic: cannot open " + config_path);
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw std::invalid_argument(std::string("gen-synthetic: malformed JSON: ") + e.what());
    }

    static const std::set<std::string> allowed = {
        "output",        "clusters_los",  "clusters_nlos", "locations_per_cluster",
        "m_x",           "m_y",           "d_x_m",         "d_y_m",
        "center_frequency_hz",            "bandwidth_hz",  "n_subcarriers",
        "frames",        "paths_los",     "paths_nlos",    "intra_cluster_jitter",
        "snr_db",        "master_seed"};
    for (const auto &item : j.items())
        if (allowed.count(item.key()) == 0)
            throw std::invalid_argument("gen-synthetic: unknown key \"" + item.key() + "\"");
    if (!j.contains("output"))
        throw std::invalid_argument("gen-synthetic: missing required key \"output\"");

    iucorr::SyntheticDatasetSpec spec;
    const auto geti = [&](const char *key, int fallback) {
        return j.contains(key) ? j[key].get<int>() : fallback;
    };
    const auto getd = [&](const char *key, double fallback) {
        return j.contains(key) ? j[key].get<double>() : fallback;
    };
    spec.clusters_los = geti("clusters_los", spec.clusters_los);
    spec.clusters_nlos = geti("clusters_nlos", spec.clusters_nlos);
    spec.locations_per_cluster = geti("locations_per_cluster", spec.locations_per_cluster);
    spec.geometry = iucorr::ArrayGeometry(geti("m_x", 8), geti("m_y", 8), getd("d_x_m", 0.0635),
                                          getd("d_y_m", 0.0635));
    spec.center_frequency_hz = getd("center_frequency_hz", spec.center_frequency_hz);
    spec.bandwidth_hz = getd("bandwidth_hz", spec.bandwidth_hz);
    spec.n_subcarriers = geti("n_subcarriers", spec.n_subcarriers);
    spec.frames = geti("frames", spec.frames);
    spec.paths_los = geti("paths_los", spec.paths_los);
    spec.paths_nlos = geti("paths_nlos", spec.paths_nlos);
    spec.intra_cluster_jitter = getd("intra_cluster_jitter", spec.intra_cluster_jitter);
    spec.snr_db = getd("snr_db", spec.snr_db);
    if (j.contains("master_seed"))
        spec.master_seed = j["master_seed"].get<std::uint64_t>();

    const iucorr::SyntheticDataset data = iucorr::generate_synthetic_dataset(spec);
    const std::string output = j["output"].get<std::string>();
    iucorr::write_dataset(data.manifest, data.records, output);
    std::cout << "wrote synthetic dataset: " << data.records.size() << " records to " << output
              << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{std::string("iucorr ") + iucorr::kVersion +
                 " - massive MIMO inter-user channel correlation toolkit"};
    app.require_subcommand(1);

    // run
    auto *run = app.add_subcommand("run", "Run an experiment config and emit a CSV table");
    std::string run_config_path, run_out;
    std::uint64_t run_seed = 0;
    int run_threads = -1;
    run->add_option("config", run_config_path, "experiment config (JSON)")->required();
    run->add_option("--out", run_out, "output CSV path (overrides the config)");
    auto *seed_opt = run->add_option("--seed", run_seed, "override the master seed");
    run->add_option("--threads", run_threads, "worker count (0 = hardware)");

    // verify
    auto *verify = app.add_subcommand("verify", "Run the acceptance checks and report");
    std::string verify_dataset;
    std::uint64_t verify_seed = 2026;
    int verify_threads = -1;
    verify->add_option("--dataset", verify_dataset,
                       "measured dataset directory (default: $IUCORR_MEASURED_DATASET)");
    verify->add_option("--seed", verify_seed, "master seed for the empirical checks");
    verify->add_option("--threads", verify_threads, "worker count (0 = hardware)");

    // dataset-validate
    auto *validate = app.add_subcommand("dataset-validate",
                                        "Open a dataset, verify every blob checksum");
    std::string validate_path;
    validate->add_option("path", validate_path, "dataset directory")->required();

    // music
    auto *music = app.add_subcommand("music", "MUSIC angle spectrum of one dataset location");
    std::string music_dataset, music_location, music_out;
    int music_sources = 0, music_frame = 0, music_subarray = 0, music_smooth = 0;
    double music_grid_step = 1.0;
    bool music_no_fb = false;
    music->add_option("dataset", music_dataset, "dataset directory")->required();
    music->add_option("location", music_location, "location id")->required();
    music->add_option("--sources", music_sources, "model order (0 = choose by eigen-gap)");
    music->add_option("--frame", music_frame, "frame index (default 0)");
    music->add_option("--grid-step", music_grid_step, "grid step in degrees (default 1)");
    music->add_option("--subarray", music_subarray, "square sub-array size (default: full)");
    music->add_flag("--no-fb", music_no_fb, "disable forward-backward averaging");
    music->add_option("--smooth", music_smooth, "spatial smoothing shrink per axis");
    music->add_option("--out", music_out, "write the full spectrum map CSV here");

    // gen-synthetic
    auto *gen = app.add_subcommand("gen-synthetic",
                                   "Generate a synthetic measurement-shaped dataset");
    std::string gen_config;
    gen->add_option("config", gen_config, "generator config (JSON)")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidInput;
    }

    try
    {
        if (run->parsed())
            return run_config(run_config_path, run_out, run_seed, !seed_opt->empty(),
                              run_threads);
        if (verify->parsed())
            return run_verify(verify_dataset, verify_seed, verify_threads);
        if (validate->parsed())
            return run_dataset_validate(validate_path);
        if (music->parsed())
            return run_music(music_dataset, music_location, music_sources, music_frame,
                             music_grid_step, music_subarray, music_no_fb, music_smooth,
                             music_out);
        if (gen->parsed())
            return run_gen_synthetic(gen_config);
    }
    catch (const iucorr::IoError &e)
    {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIoError;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    catch (const std::out_of_range &e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
    }
    return kExitInvalidInput;
}
