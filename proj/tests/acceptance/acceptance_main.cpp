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

// Acceptance suite: runs every verification check at its pinned tolerance
// and prints one status line per check. Exit code 0 only when all gating
// checks pass.
//
//   --dataset PATH        measured dataset for the informative check
//   --seed N              master seed (default 2026)
//   --threads N           worker count (0 = hardware)
//   --checks a,b,c        run a subset of check ids
//   --negative-control    corrupt the closed form and require the
//                         Monte-Carlo agreement check to fail loudly

#include "iucorr/verify.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>

namespace
{

std::vector<int> parse_id_list(const std::string &text)
{
    std::vector<int> ids;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ','))
        ids.push_back(std::stoi(token));
    return ids;
}

} // namespace

int main(int argc, char **argv)
{
    iucorr::VerifyOptions options;
    if (const char *env = std::getenv("IUCORR_MEASURED_DATASET"))
        options.measured_dataset_path = env;

    bool negative_control = false;
    for (int i = 1; i < argc; ++i)
    {
        const std::string arg = argv[i];
        const auto next = [&]() -> std::string {
            if (i + 1 >= argc)
            {
                std::cerr << "missing value for " << arg << "\n";
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "--dataset")
            options.measured_dataset_path = next();
        else if (arg == "--seed")
            options.master_seed = std::stoull(next());
        else if (arg == "--threads")
            options.threads = std::stoi(next());
        else if (arg == "--checks")
            options.checks = parse_id_list(next());
        else if (arg == "--negative-control")
            negative_control = true;
        else
        {
            std::cerr << "unknown argument: " << arg << "\n";
            return 2;
        }
    }

    if (negative_control)
    {
        options.checks = {2};
        options.closed_form_perturbation = 1.25;
        const iucorr::VerifyReport report = iucorr::verify_suite(options);
        iucorr::print_report(report, std::cout);
        const bool failed_as_expected =
            report.checks.size() == 1 &&
            report.checks.front().status == iucorr::CheckStatus::fail;
        std::cout << (failed_as_expected
                          ? "negative control: corrupted closed form was caught\n"
                          : "negative control: corruption was NOT caught\n");
        return failed_as_expected ? 0 : 1;
    }

    const iucorr::VerifyReport report = iucorr::verify_suite(options);
    iucorr::print_report(report, std::cout);
    return report.exit_code();
}
