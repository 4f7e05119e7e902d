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

#include "iucorr/experiment.hpp"

#include "iucorr/dataset.hpp"
#include "iucorr/estimation.hpp"
#include "iucorr/geometry.hpp"
#include "iucorr/theory.hpp"
#include "iucorr/version.hpp"
#include "parallel.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace iucorr
{

namespace
{

using json = nlohmann::json;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void require(bool condition, const std::string &message)
{
    if (!condition)
        throw std::invalid_argument("experiment config: " + message);
}

void check_keys(const json &j, const std::set<std::string> &allowed, const std::string &where)
{
    for (const auto &item : j.items())
        if (allowed.count(item.key()) == 0)
            throw std::invalid_argument("experiment config: unknown key \"" + item.key() +
                                        "\" in " + where);
}

} // namespace

const char *to_string(ExperimentKind kind)
{
    switch (kind)
    {
    case ExperimentKind::alpha_sweep:
        return "alpha_sweep";
    case ExperimentKind::m_sweep:
        return "m_sweep";
    case ExperimentKind::spacing_offset:
        return "spacing_offset";
    case ExperimentKind::subcarrier_variation:
        return "subcarrier_variation";
    case ExperimentKind::cluster_stats:
        return "cluster_stats";
    case ExperimentKind::lemma_report:
        return "lemma_report";
    case ExperimentKind::music_map:
        return "music_map";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string &s)
{
    for (ExperimentKind k :
         {ExperimentKind::alpha_sweep, ExperimentKind::m_sweep, ExperimentKind::spacing_offset,
          ExperimentKind::subcarrier_variation, ExperimentKind::cluster_stats,
          ExperimentKind::lemma_report, ExperimentKind::music_map})
        if (s == to_string(k))
            return k;
    throw std::invalid_argument("experiment config: unknown kind \"" + s + "\"");
}

void ExperimentConfig::validate() const
{
    require(array_type == "upa" || array_type == "ula",
            "array must be \"upa\" or \"ula\", got \"" + array_type + "\"");
    require(threads >= 0, "threads must be non-negative");
    require(!(!spacings_wl.empty() && !spacings_m.empty()),
            "give spacing in wavelengths or meters, not both");
    require(center_frequency_hz > 0.0, "center frequency must be positive");

    switch (kind)
    {
    case ExperimentKind::alpha_sweep:
    case ExperimentKind::m_sweep:
    case ExperimentKind::spacing_offset:
        require(!m_values.empty(), "m_values must not be empty");
        require(!alphas.empty(), "alphas must not be empty");
        require(!spacings_wl.empty() || !spacings_m.empty(), "spacing list must not be empty");
        require(sample_size >= 2, "sample_size must be at least 2");
        require(n_keyholes >= 1, "n_keyholes must be at least 1");
        break;
    case ExperimentKind::subcarrier_variation:
        require(m_values.size() == 1, "subcarrier_variation uses exactly one m value");
        require(!alphas.empty(), "alphas must not be empty");
        require(samples_per_subcarrier >= 2, "samples_per_subcarrier must be at least 2");
        require(n_keyholes >= 1, "n_keyholes must be at least 1");
        subcarrier_plan.validate();
        break;
    case ExperimentKind::cluster_stats:
        require(!dataset_path.empty(), "dataset_path is required for cluster_stats");
        require(subarray_m >= 1, "subarray_m must be positive");
        break;
    case ExperimentKind::lemma_report:
        require(!lemma_gammas.empty(), "lemma_gammas must not be empty");
        for (double g : lemma_gammas)
            require(g > 0.0 && g <= std::numbers::pi, "lemma gammas must lie in (0, pi]");
        require(lemma_series_n >= 1, "lemma_series_n must be positive");
        require(lemma_lag_m >= 1, "lemma_lag_m must be positive");
        break;
    case ExperimentKind::music_map:
        require(!dataset_path.empty(), "dataset_path is required for music_map");
        require(!music_location.empty(), "music_location is required for music_map");
        require(music_sources >= 0, "music_sources must be non-negative (0 = auto)");
        require(grid_step_deg > 0.0, "grid_step_deg must be positive");
        require(music_frame >= 0, "music_frame must be non-negative");
        break;
    }

    for (double a : alphas)
        require(a >= 0.0 && a <= 1.0, "alpha values must lie in [0, 1]");
    for (int m : m_values)
        require(m >= 1, "antenna counts must be positive");
    for (double d : spacings_wl)
        require(d > 0.0, "spacings must be positive");
    for (double d : spacings_m)
        require(d > 0.0, "spacings must be positive");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string &text)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw std::invalid_argument(std::string("experiment config: malformed JSON: ") +
                                    e.what());
    }
    require(j.is_object(), "top level must be a JSON object");

    static const std::set<std::string> allowed = {
        "kind",           "array",          "m_values",        "alphas",
        "spacings_wl",    "spacings_m",     "n_keyholes",      "sample_size",
        "master_seed",    "center_frequency_hz",               "subcarrier_plan",
        "samples_per_subcarrier",           "dataset_path",    "subarray_m",
        "subcarriers",    "lemma_gammas",   "lemma_series_n",  "lemma_lag_m",
        "music_location", "music_sources",  "grid_step_deg",   "music_frame",
        "output",         "threads"};
    check_keys(j, allowed, "the top-level object");

    ExperimentConfig cfg;
    require(j.contains("kind"), "missing required key \"kind\"");
    cfg.kind = experiment_kind_from_string(j.at("kind").get<std::string>());

    if (j.contains("array"))
        cfg.array_type = j["array"].get<std::string>();
    if (j.contains("m_values"))
        cfg.m_values = j["m_values"].get<std::vector<int>>();
    if (j.contains("alphas"))
        cfg.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("spacings_wl"))
        cfg.spacings_wl = j["spacings_wl"].get<std::vector<double>>();
    if (j.contains("spacings_m"))
    {
        cfg.spacings_m = j["spacings_m"].get<std::vector<double>>();
        if (!j.contains("spacings_wl"))
            cfg.spacings_wl.clear();
    }
    if (j.contains("n_keyholes"))
        cfg.n_keyholes = j["n_keyholes"].get<int>();
    if (j.contains("sample_size"))
        cfg.sample_size = j["sample_size"].get<int>();
    if (j.contains("master_seed"))
        cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("center_frequency_hz"))
        cfg.center_frequency_hz = j["center_frequency_hz"].get<double>();
    if (j.contains("subcarrier_plan"))
    {
        const json &p = j["subcarrier_plan"];
        check_keys(p, {"center_frequency_hz", "bandwidth_hz", "n_subcarriers"},
                   "subcarrier_plan");
        cfg.subcarrier_plan.center_frequency_hz = p.at("center_frequency_hz").get<double>();
        cfg.subcarrier_plan.bandwidth_hz = p.at("bandwidth_hz").get<double>();
        cfg.subcarrier_plan.n_subcarriers = p.at("n_subcarriers").get<int>();
    }
    if (j.contains("samples_per_subcarrier"))
        cfg.samples_per_subcarrier = j["samples_per_subcarrier"].get<int>();
    if (j.contains("dataset_path"))
        cfg.dataset_path = j["dataset_path"].get<std::string>();
    if (j.contains("subarray_m"))
        cfg.subarray_m = j["subarray_m"].get<int>();
    if (j.contains("subcarriers"))
        cfg.subcarriers = j["subcarriers"].get<std::vector<int>>();
    if (j.contains("lemma_gammas"))
        cfg.lemma_gammas = j["lemma_gammas"].get<std::vector<double>>();
    if (j.contains("lemma_series_n"))
        cfg.lemma_series_n = j["lemma_series_n"].get<std::int64_t>();
    if (j.contains("lemma_lag_m"))
        cfg.lemma_lag_m = j["lemma_lag_m"].get<int>();
    if (j.contains("music_location"))
        cfg.music_location = j["music_location"].get<std::string>();
    if (j.contains("music_sources"))
        cfg.music_sources = j["music_sources"].get<int>();
    if (j.contains("grid_step_deg"))
        cfg.grid_step_deg = j["grid_step_deg"].get<double>();
    if (j.contains("music_frame"))
        cfg.music_frame = j["music_frame"].get<int>();
    if (j.contains("output"))
        cfg.output_path = j["output"].get<std::string>();
    if (j.contains("threads"))
        cfg.threads = j["threads"].get<int>();

    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("experiment config: cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

std::string ExperimentConfig::canonical_json() const
{
    json j{{"kind", to_string(kind)},
           {"array", array_type},
           {"m_values", m_values},
           {"alphas", alphas},
           {"spacings_wl", spacings_wl},
           {"spacings_m", spacings_m},
           {"n_keyholes", n_keyholes},
           {"sample_size", sample_size},
           {"master_seed", master_seed},
           {"center_frequency_hz", center_frequency_hz},
           {"subcarrier_plan",
            {{"center_frequency_hz", subcarrier_plan.center_frequency_hz},
             {"bandwidth_hz", subcarrier_plan.bandwidth_hz},
             {"n_subcarriers", subcarrier_plan.n_subcarriers}}},
           {"samples_per_subcarrier", samples_per_subcarrier},
           {"dataset_path", dataset_path},
           {"subarray_m", subarray_m},
           {"subcarriers", subcarriers},
           {"lemma_gammas", lemma_gammas},
           {"lemma_series_n", lemma_series_n},
           {"lemma_lag_m", lemma_lag_m},
           {"music_location", music_location},
           {"music_sources", music_sources},
           {"grid_step_deg", grid_step_deg},
           {"music_frame", music_frame}};
    return j.dump();
}

std::string config_fingerprint(const ExperimentConfig &config)
{
    const std::string text = config.canonical_json();
    std::uint64_t hash = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : text)
    {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

int ResultTable::column_index(const std::string &name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name)
            return static_cast<int>(i);
    throw std::invalid_argument("ResultTable: no column named \"" + name + "\"");
}

void ResultTable::add_row(std::vector<Cell> cells)
{
    if (cells.size() != columns.size())
        throw std::invalid_argument("ResultTable: row width does not match the column schema");
    rows.push_back(std::move(cells));
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

namespace
{

struct GridPoint
{
    double spacing_m = 0.0;
    double spacing_wl = 0.0;
    double alpha = 0.0;
    int m_total = 0;
};

ArrayGeometry make_geometry(const std::string &array_type, int m_total, double spacing_m)
{
    if (array_type == "ula")
        return ArrayGeometry::ula(m_total, spacing_m);
    return ArrayGeometry::square_upa(m_total, spacing_m);
}

struct SweepResult
{
    EnsembleStats stats;
    CorrelationEstimate closed;
    CorrelationEstimate asym;
};

SweepResult evaluate_grid_point(const GridPoint &point, const std::string &array_type,
                                int n_keyholes, int sample_size, double wavelength,
                                std::uint64_t master_seed, std::uint64_t stream_id)
{
    const ArrayGeometry geom = make_geometry(array_type, point.m_total, point.spacing_m);
    const PathEnsembleSpec spec =
        PathEnsembleSpec::keyhole(n_keyholes, point.alpha, point.alpha);
    const int m = geom.antenna_count();

    RngStream rng(master_seed, stream_id);
    std::vector<cxd> dots(static_cast<std::size_t>(sample_size));
    for (int i = 0; i < sample_size; ++i)
    {
        const auto [h1, h2] = generate_channel_pair(spec, geom, wavelength, rng);
        dots[static_cast<std::size_t>(i)] = h1.dot(h2) / static_cast<double>(m);
    }

    SweepResult out;
    out.stats = ensemble_correlation_from_dots(dots);
    out.closed = correlation_closed_form(spec, geom, wavelength);
    out.asym = correlation_asymptotic(spec, geom, wavelength);
    return out;
}

ResultTable run_sweep(const ExperimentConfig &config)
{
    const double lambda = kSpeedOfLight / config.center_frequency_hz;

    std::vector<double> spacings_m;
    if (!config.spacings_m.empty())
        spacings_m = config.spacings_m;
    else
        for (double wl : config.spacings_wl)
            spacings_m.push_back(wl * lambda);

    // Grid order fixes both the row order and the per-point RNG stream ids.
    std::vector<GridPoint> grid;
    auto push_point = [&](double d_m, double alpha, int m_total) {
        grid.push_back(GridPoint{d_m, d_m / lambda, alpha, m_total});
    };
    switch (config.kind)
    {
    case ExperimentKind::alpha_sweep:
        for (double d : spacings_m)
            for (int m : config.m_values)
                for (double a : config.alphas)
                    push_point(d, a, m);
        break;
    case ExperimentKind::spacing_offset:
        for (double a : config.alphas)
            for (int m : config.m_values)
                for (double d : spacings_m)
                    push_point(d, a, m);
        break;
    default: // m_sweep
        for (double d : spacings_m)
            for (double a : config.alphas)
                for (int m : config.m_values)
                    push_point(d, a, m);
        break;
    }

    std::vector<SweepResult> results(grid.size());
    detail::parallel_for(grid.size(), config.threads, [&](std::size_t i) {
        results[i] = evaluate_grid_point(grid[i], config.array_type, config.n_keyholes,
                                         config.sample_size, lambda, config.master_seed,
                                         static_cast<std::uint64_t>(i));
    });

    ResultTable table;
    using CK = ResultTable::ColumnKind;
    table.columns = {{"array", CK::text},
                     {"m_x", CK::integer},
                     {"m_y", CK::integer},
                     {"m_total", CK::integer},
                     {"spacing_wl", CK::real},
                     {"spacing_m", CK::real},
                     {"alpha", CK::real},
                     {"n_keyholes", CK::integer},
                     {"sample_size", CK::integer},
                     {"empirical_var", CK::real},
                     {"empirical_corr", CK::real},
                     {"variance_se", CK::real},
                     {"correlation_se", CK::real},
                     {"closed_form_var", CK::real},
                     {"closed_form_corr", CK::real},
                     {"asymptotic_var", CK::real},
                     {"asymptotic_corr", CK::real},
                     {"iid_rayleigh_corr", CK::real},
                     {"within_3se", CK::integer}};

    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        const GridPoint &p = grid[i];
        const SweepResult &r = results[i];
        const ArrayGeometry geom = make_geometry(config.array_type, p.m_total, p.spacing_m);
        const bool within =
            std::abs(r.stats.estimate.variance - r.closed.variance) <= 3.0 * r.stats.variance_se;
        table.add_row({std::string(config.array_type), static_cast<std::int64_t>(geom.m_x),
                       static_cast<std::int64_t>(geom.m_y),
                       static_cast<std::int64_t>(p.m_total), p.spacing_wl, p.spacing_m, p.alpha,
                       static_cast<std::int64_t>(config.n_keyholes),
                       static_cast<std::int64_t>(config.sample_size), r.stats.estimate.variance,
                       r.stats.estimate.correlation, r.stats.variance_se, r.stats.correlation_se,
                       r.closed.variance, r.closed.correlation, r.asym.variance,
                       r.asym.correlation, 1.0 / std::sqrt(static_cast<double>(p.m_total)),
                       static_cast<std::int64_t>(within ? 1 : 0)});
    }
    return table;
}

ResultTable run_subcarrier_variation(const ExperimentConfig &config)
{
    const std::vector<double> wavelengths = subcarrier_wavelengths(config.subcarrier_plan);
    const int n_sc = config.subcarrier_plan.n_subcarriers;
    const double lambda_center = kSpeedOfLight / config.subcarrier_plan.center_frequency_hz;
    const double spacing_m =
        !config.spacings_m.empty() ? config.spacings_m.front()
                                   : config.spacings_wl.front() * lambda_center;
    const int m_total = config.m_values.front();

    struct Point
    {
        double alpha;
        int subcarrier;
    };
    std::vector<Point> grid;
    for (double a : config.alphas)
        for (int s = 0; s < n_sc; ++s)
            grid.push_back(Point{a, s});

    std::vector<SweepResult> results(grid.size());
    detail::parallel_for(grid.size(), config.threads, [&](std::size_t i) {
        const Point &p = grid[i];
        const GridPoint gp{spacing_m, 0.0, p.alpha, m_total};
        results[i] = evaluate_grid_point(
            gp, config.array_type, config.n_keyholes, config.samples_per_subcarrier,
            wavelengths[static_cast<std::size_t>(p.subcarrier)], config.master_seed,
            static_cast<std::uint64_t>(i));
    });

    ResultTable table;
    using CK = ResultTable::ColumnKind;
    table.columns = {{"array", CK::text},
                     {"m_total", CK::integer},
                     {"spacing_m", CK::real},
                     {"alpha", CK::real},
                     {"n_keyholes", CK::integer},
                     {"subcarrier", CK::integer},
                     {"frequency_hz", CK::real},
                     {"wavelength_m", CK::real},
                     {"sample_size", CK::integer},
                     {"empirical_var", CK::real},
                     {"empirical_corr", CK::real},
                     {"variance_se", CK::real},
                     {"correlation_se", CK::real},
                     {"closed_form_var", CK::real},
                     {"closed_form_corr", CK::real},
                     {"asymptotic_var", CK::real},
                     {"asymptotic_corr", CK::real}};

    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        const Point &p = grid[i];
        const SweepResult &r = results[i];
        const double lambda_n = wavelengths[static_cast<std::size_t>(p.subcarrier)];
        table.add_row({std::string(config.array_type), static_cast<std::int64_t>(m_total),
                       spacing_m, p.alpha, static_cast<std::int64_t>(config.n_keyholes),
                       static_cast<std::int64_t>(p.subcarrier), kSpeedOfLight / lambda_n,
                       lambda_n, static_cast<std::int64_t>(config.samples_per_subcarrier),
                       r.stats.estimate.variance, r.stats.estimate.correlation,
                       r.stats.variance_se, r.stats.correlation_se, r.closed.variance,
                       r.closed.correlation, r.asym.variance, r.asym.correlation});
    }
    return table;
}

ResultTable run_cluster_stats(const ExperimentConfig &config)
{
    DatasetReader reader(config.dataset_path);
    ClusterStatsOptions options;
    options.subcarriers = config.subcarriers;
    options.threads = config.threads;
    const ClusterStats stats = cluster_correlation_stats(reader, config.subarray_m, options);

    auto label_of = [&](const std::string &cluster_id) -> std::string {
        for (const ClusterInfo &c : reader.manifest().clusters)
            if (c.cluster_id == cluster_id)
                return to_string(c.label);
        return "";
    };

    ResultTable table;
    using CK = ResultTable::ColumnKind;
    table.columns = {{"cluster_a", CK::text},    {"label_a", CK::text},
                     {"cluster_b", CK::text},    {"label_b", CK::text},
                     {"mean_corr", CK::real},    {"std_across_subcarriers", CK::real},
                     {"n_pairs", CK::integer},   {"subarray_m", CK::integer}};
    for (int i = 0; i < stats.n_clusters(); ++i)
        for (int j = i; j < stats.n_clusters(); ++j)
            table.add_row({stats.cluster_ids[static_cast<std::size_t>(i)],
                           label_of(stats.cluster_ids[static_cast<std::size_t>(i)]),
                           stats.cluster_ids[static_cast<std::size_t>(j)],
                           label_of(stats.cluster_ids[static_cast<std::size_t>(j)]),
                           stats.mean(i, j), stats.std_subcarrier(i, j),
                           static_cast<std::int64_t>(stats.n_pairs(i, j)),
                           static_cast<std::int64_t>(config.subarray_m)});
    return table;
}

ResultTable run_lemma_report(const ExperimentConfig &config)
{
    ResultTable table;
    using CK = ResultTable::ColumnKind;
    table.columns = {{"gamma", CK::real},          {"series_closed_form", CK::real},
                     {"series_cesaro", CK::real},  {"series_n", CK::integer},
                     {"series_abs_error", CK::real}, {"lag_finite", CK::real},
                     {"lag_m", CK::integer},       {"lag_limit", CK::real},
                     {"lag_rel_error", CK::real}};

    for (double gamma : config.lemma_gammas)
    {
        const SincSeries series(gamma);
        const double cesaro = series.cesaro_average(config.lemma_series_n);
        const double closed = series.closed_form();
        const double finite = sinc_lag_finite(gamma, config.lemma_lag_m);
        const double limit = sinc_lag_limit(gamma);
        table.add_row({gamma, closed, cesaro, static_cast<std::int64_t>(config.lemma_series_n),
                       std::abs(cesaro - closed), finite,
                       static_cast<std::int64_t>(config.lemma_lag_m), limit,
                       std::abs(finite - limit) / limit});
    }
    return table;
}

ResultTable run_music_map(const ExperimentConfig &config)
{
    DatasetReader reader(config.dataset_path);
    const DatasetManifest &manifest = reader.manifest();
    const LocationRecord record = reader.load(config.music_location);
    const LocationRecord calib = reader.load(manifest.calibration_location_id);

    const double lambda_center = kSpeedOfLight / manifest.center_frequency_hz;

    ArrayGeometry geom = manifest.geometry;
    std::vector<ChannelVector> snapshots;
    snapshots.reserve(static_cast<std::size_t>(manifest.n_subcarriers));
    for (int s = 0; s < manifest.n_subcarriers; ++s)
    {
        const ChannelVector raw = select_channel(record, config.music_frame, s);
        const ChannelVector ref = select_channel(calib, config.music_frame, s);
        ChannelVector calibrated = calibrate(raw, ref);
        if (config.subarray_m != geom.antenna_count())
        {
            SubArray sub = subsample_square(calibrated, manifest.geometry, config.subarray_m);
            calibrated = std::move(sub.channel);
            geom = sub.geometry;
        }
        snapshots.push_back(std::move(calibrated));
    }

    const AngleGrid grid = AngleGrid::degrees(config.grid_step_deg);
    const SpectrumMap map =
        music_spectrum(snapshots, geom, lambda_center, config.music_sources, grid);

    ResultTable table;
    using CK = ResultTable::ColumnKind;
    table.columns = {{"s_x", CK::real},         {"s_y", CK::real},
                     {"theta_x_deg", CK::real}, {"theta_y_deg", CK::real},
                     {"power", CK::real},       {"log10_power_db", CK::real}};
    for (Eigen::Index ix = 0; ix < map.power.rows(); ++ix)
        for (Eigen::Index iy = 0; iy < map.power.cols(); ++iy)
        {
            const double sx = map.grid.s_x[static_cast<std::size_t>(ix)];
            const double sy = map.grid.s_y[static_cast<std::size_t>(iy)];
            table.add_row({sx, sy, std::asin(sx) * kRadToDeg, std::asin(sy) * kRadToDeg,
                           map.power(ix, iy), map.log_power(ix, iy)});
        }
    return table;
}

} // namespace

ResultTable run_experiment(const ExperimentConfig &config)
{
    config.validate();

    ResultTable table;
    switch (config.kind)
    {
    case ExperimentKind::alpha_sweep:
    case ExperimentKind::m_sweep:
    case ExperimentKind::spacing_offset:
        table = run_sweep(config);
        break;
    case ExperimentKind::subcarrier_variation:
        table = run_subcarrier_variation(config);
        break;
    case ExperimentKind::cluster_stats:
        table = run_cluster_stats(config);
        break;
    case ExperimentKind::lemma_report:
        table = run_lemma_report(config);
        break;
    case ExperimentKind::music_map:
        table = run_music_map(config);
        break;
    }

    table.provenance["tool_version"] = std::string("iucorr ") + kVersion;
    table.provenance["kind"] = to_string(config.kind);
    table.provenance["config_fingerprint"] = config_fingerprint(config);
    table.provenance["master_seed"] = std::to_string(config.master_seed);
    return table;
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

namespace
{

std::string csv_escape(const std::string &field)
{
    if (field.find_first_of(",\"\n\r") == std::string::npos)
        return field;
    std::string quoted = "\"";
    for (char c : field)
    {
        if (c == '"')
            quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string format_real(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return std::string(buf);
}

} // namespace

std::string to_csv(const ResultTable &table)
{
    std::string out;
    for (const auto &[key, value] : table.provenance)
        out += "# " + key + "=" + value + "\n";

    for (std::size_t i = 0; i < table.columns.size(); ++i)
    {
        if (i > 0)
            out += ',';
        out += csv_escape(table.columns[i].name);
    }
    out += '\n';

    for (const auto &row : table.rows)
    {
        for (std::size_t i = 0; i < row.size(); ++i)
        {
            if (i > 0)
                out += ',';
            const ResultTable::Cell &cell = row[i];
            if (std::holds_alternative<double>(cell))
                out += format_real(std::get<double>(cell));
            else if (std::holds_alternative<std::int64_t>(cell))
                out += std::to_string(std::get<std::int64_t>(cell));
            else
                out += csv_escape(std::get<std::string>(cell));
        }
        out += '\n';
    }
    return out;
}

void emit_csv(const ResultTable &table, const std::filesystem::path &path)
{
    if (path.has_parent_path())
    {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec)
            throw IoError("emit_csv: cannot create directory " +
                          path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("emit_csv: cannot open " + path.string() + " for writing");
    out << to_csv(table);
    if (!out)
        throw IoError("emit_csv: short write to " + path.string());
}

} // namespace iucorr
