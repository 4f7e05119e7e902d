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

#include "iucorr/experiment.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace iucorr;
namespace fs = std::filesystem;

namespace
{

std::string small_sweep_config()
{
    return R"({
        "kind": "m_sweep",
        "array": "upa",
        "m_values": [16, 64],
        "alphas": [0.1, 0.6],
        "spacings_wl": [0.5],
        "sample_size": 4000,
        "master_seed": 11
    })";
}

double field_as_double(const test::ParsedCsv &csv, std::size_t row, const std::string &column)
{
    for (std::size_t c = 0; c < csv.header.size(); ++c)
        if (csv.header[c] == column)
            return std::stod(csv.rows[row][c]);
    throw std::runtime_error("column not found: " + column);
}

} // namespace

TEST_CASE("config parsing")
{
    SUBCASE("a well-formed sweep parses")
    {
        const ExperimentConfig cfg = ExperimentConfig::from_json_text(small_sweep_config());
        CHECK(cfg.kind == ExperimentKind::m_sweep);
        CHECK(cfg.m_values == std::vector<int>{16, 64});
        CHECK(cfg.sample_size == 4000);
    }

    SUBCASE("unknown keys are rejected, not ignored")
    {
        const std::string text = R"({"kind": "m_sweep", "m_values": [16],
            "alphas": [0.1], "sample_sizes": 100})";
        CHECK_THROWS_WITH_AS(ExperimentConfig::from_json_text(text),
                             doctest::Contains("sample_sizes"), std::invalid_argument);
    }

    SUBCASE("kind is mandatory")
    {
        CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"alphas": [0.1]})"),
                        std::invalid_argument);
    }

    SUBCASE("empty grids are invalid")
    {
        CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                            R"({"kind": "m_sweep", "m_values": [], "alphas": [0.1]})"),
                        std::invalid_argument);
    }

    SUBCASE("cluster stats needs a dataset path")
    {
        CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"kind": "cluster_stats"})"),
                        std::invalid_argument);
    }

    SUBCASE("spacing units are exclusive")
    {
        CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                            R"({"kind": "m_sweep", "m_values": [16], "alphas": [0.1],
                                "spacings_wl": [0.5], "spacings_m": [0.06]})"),
                        std::invalid_argument);
    }

    SUBCASE("malformed JSON is an input error")
    {
        CHECK_THROWS_AS(ExperimentConfig::from_json_text("{nope"), std::invalid_argument);
    }
}

TEST_CASE("sweep table agrees with theory and records the 3-sigma flag")
{
    const ExperimentConfig cfg = ExperimentConfig::from_json_text(small_sweep_config());
    const ResultTable table = run_experiment(cfg);
    REQUIRE(table.rows.size() == 4);

    const int i_emp = table.column_index("empirical_var");
    const int i_cf = table.column_index("closed_form_var");
    const int i_se = table.column_index("variance_se");
    const int i_flag = table.column_index("within_3se");

    for (const auto &row : table.rows)
    {
        const double emp = std::get<double>(row[static_cast<std::size_t>(i_emp)]);
        const double cf = std::get<double>(row[static_cast<std::size_t>(i_cf)]);
        const double se = std::get<double>(row[static_cast<std::size_t>(i_se)]);
        const auto flag = std::get<std::int64_t>(row[static_cast<std::size_t>(i_flag)]);
        CHECK(flag == 1);
        CHECK(std::abs(emp - cf) <= 3.0 * se);

        // A corrupted theory value must fall outside the gate, loudly.
        CHECK(std::abs(emp - 1.25 * cf) > 3.0 * se);
    }
}

TEST_CASE("same seed gives byte-identical CSV independent of worker count")
{
    ExperimentConfig cfg = ExperimentConfig::from_json_text(small_sweep_config());
    cfg.threads = 1;
    const std::string csv_serial = to_csv(run_experiment(cfg));
    cfg.threads = 4;
    const std::string csv_parallel = to_csv(run_experiment(cfg));
    CHECK(csv_serial == csv_parallel);

    ExperimentConfig other = ExperimentConfig::from_json_text(small_sweep_config());
    other.master_seed = 12;
    CHECK(to_csv(run_experiment(other)) != csv_serial);
}

TEST_CASE("csv emission")
{
    SUBCASE("empty table emits provenance and header only")
    {
        ResultTable table;
        table.columns = {{"a", ResultTable::ColumnKind::real},
                         {"b", ResultTable::ColumnKind::text}};
        table.provenance["tool_version"] = "iucorr test";
        const std::string text = to_csv(table);
        const test::ParsedCsv csv = test::parse_csv(text);
        CHECK(csv.comments.size() == 1);
        CHECK(csv.header == std::vector<std::string>{"a", "b"});
        CHECK(csv.rows.empty());
    }

    SUBCASE("reals survive a parse round trip exactly")
    {
        ResultTable table;
        table.columns = {{"x", ResultTable::ColumnKind::real}};
        table.add_row({0.1234567890123456789});
        table.add_row({1.0 / 3.0});
        table.add_row({6.02214076e23});
        const test::ParsedCsv csv = test::parse_csv(to_csv(table));
        REQUIRE(csv.rows.size() == 3);
        CHECK(std::stod(csv.rows[0][0]) == 0.1234567890123456789);
        CHECK(std::stod(csv.rows[1][0]) == 1.0 / 3.0);
        CHECK(std::stod(csv.rows[2][0]) == 6.02214076e23);
    }

    SUBCASE("fields with separators are quoted")
    {
        ResultTable table;
        table.columns = {{"name", ResultTable::ColumnKind::text}};
        table.add_row({std::string("a,b\"c")});
        const std::string text = to_csv(table);
        CHECK(text.find("\"a,b\"\"c\"") != std::string::npos);
    }

    SUBCASE("emit_csv writes the same bytes to disk")
    {
        ExperimentConfig cfg = ExperimentConfig::from_json_text(small_sweep_config());
        cfg.sample_size = 100;
        const ResultTable table = run_experiment(cfg);
        const fs::path path =
            fs::temp_directory_path() / "iucorr-test-emit" / "out.csv";
        emit_csv(table, path);
        std::ifstream in(path, std::ios::binary);
        const std::string from_disk((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
        CHECK(from_disk == to_csv(table));
        fs::remove_all(path.parent_path());
    }
}

TEST_CASE("aperture offset shows up in the runner output")
{
    // Doubling the spacing while halving the angle spread lands on the
    // same closed-form value; checked through the actual table.
    const std::string text = R"({
        "kind": "spacing_offset",
        "array": "ula",
        "m_values": [64],
        "alphas": [0.2, 0.1],
        "spacings_wl": [0.25, 0.5],
        "sample_size": 500,
        "master_seed": 3
    })";
    const ResultTable table = run_experiment(ExperimentConfig::from_json_text(text));
    const test::ParsedCsv csv = test::parse_csv(to_csv(table));
    REQUIRE(csv.rows.size() == 4);

    double narrow = -1.0, wide = -2.0;
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        const double alpha = field_as_double(csv, r, "alpha");
        const double spacing = field_as_double(csv, r, "spacing_wl");
        if (alpha == 0.2 && spacing == 0.25)
            narrow = field_as_double(csv, r, "closed_form_var");
        if (alpha == 0.1 && spacing == 0.5)
            wide = field_as_double(csv, r, "closed_form_var");
    }
    CHECK(narrow == wide);
}

TEST_CASE("lemma report table")
{
    const std::string text = R"({
        "kind": "lemma_report",
        "lemma_gammas": [0.5, 1.0],
        "lemma_series_n": 200000,
        "lemma_lag_m": 2000
    })";
    const ResultTable table = run_experiment(ExperimentConfig::from_json_text(text));
    REQUIRE(table.rows.size() == 2);
    const int i_err = table.column_index("series_abs_error");
    const int i_rel = table.column_index("lag_rel_error");
    for (const auto &row : table.rows)
    {
        CHECK(std::get<double>(row[static_cast<std::size_t>(i_err)]) < 1e-2);
        CHECK(std::get<double>(row[static_cast<std::size_t>(i_rel)]) < 1e-2);
    }
}

TEST_CASE("subcarrier variation emits one row per carrier")
{
    const std::string text = R"({
        "kind": "subcarrier_variation",
        "array": "upa",
        "m_values": [16],
        "alphas": [0.2],
        "spacings_m": [0.0635],
        "samples_per_subcarrier": 50,
        "subcarrier_plan": {
            "center_frequency_hz": 2.437e9,
            "bandwidth_hz": 20e6,
            "n_subcarriers": 13
        },
        "master_seed": 4
    })";
    const ResultTable table = run_experiment(ExperimentConfig::from_json_text(text));
    REQUIRE(table.rows.size() == 13);
    const int i_wl = table.column_index("wavelength_m");
    double previous = 1e9;
    for (const auto &row : table.rows)
    {
        const double wl = std::get<double>(row[static_cast<std::size_t>(i_wl)]);
        CHECK(wl < previous);
        previous = wl;
    }
}

TEST_CASE("config fingerprint is stable and seed-independent")
{
    const ExperimentConfig a = ExperimentConfig::from_json_text(small_sweep_config());
    const ExperimentConfig b = ExperimentConfig::from_json_text(small_sweep_config());
    CHECK(config_fingerprint(a) == config_fingerprint(b));

    ExperimentConfig c = b;
    c.alphas.push_back(0.3);
    CHECK(config_fingerprint(c) != config_fingerprint(a));
}
