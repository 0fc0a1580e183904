#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace mppc::detail {

// Splits [0, total) into contiguous ranges, runs fn(first, last) on worker
// threads and folds the partial results in range order.
template <class Result, class Fn, class Combine>
Result parallel_ranges(std::int64_t total, std::int64_t min_chunk, Fn fn, Combine combine) {
  const auto hw = static_cast<std::int64_t>(std::max(1u, std::thread::hardware_concurrency()));
  const std::int64_t workers = std::clamp<std::int64_t>(total / std::max<std::int64_t>(min_chunk, 1), 1, hw);
  if (workers == 1) return fn(std::int64_t{0}, total);

  std::vector<Result> partial(static_cast<std::size_t>(workers));
  std::vector<std::thread> threads;
  threads.reserve(partial.size());
  for (std::int64_t w = 0; w < workers; ++w) {
    const std::int64_t first = total * w / workers;
    const std::int64_t last = total * (w + 1) / workers;
    threads.emplace_back([&, w, first, last] { partial[w] = fn(first, last); });
  }
  for (auto& t : threads) t.join();

  Result out = std::move(partial.front());
  for (std::size_t w = 1; w < partial.size(); ++w) combine(out, partial[w]);
  return out;
}

}  // namespace mppc::detail
