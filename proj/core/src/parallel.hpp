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

#ifndef IUCORR_SRC_PARALLEL_HPP
#define IUCORR_SRC_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace iucorr::detail
{

/// Run fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Tasks must write only to their own output slots; the
/// first exception is rethrown on the caller thread.
template <typename Fn> void parallel_for(std::size_t n, int threads, Fn &&fn)
{
    if (n == 0)
        return;

    std::size_t n_workers = threads > 0 ? static_cast<std::size_t>(threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min(n_workers, n);

    if (n_workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        while (true)
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load())
                return;
            try
            {
                fn(i);
            }
            catch (...)
            {
                if (!failed.exchange(true))
                    error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w)
        pool.emplace_back(worker);
    for (auto &t : pool)
        t.join();

    if (failed.load() && error)
        std::rethrow_exception(error);
}

} // namespace iucorr::detail

#endif
