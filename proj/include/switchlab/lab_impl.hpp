#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace switchlab {

template <typename Acc>
Acc parallel_accumulate(std::uint64_t n, int threads, const std::function<void(std::uint64_t, Acc&)>& body,
                        const std::function<void(Acc&, const Acc&)>& merge, Acc init) {
  const int workers = static_cast<int>(std::min<std::uint64_t>(std::max(1, threads), std::max<std::uint64_t>(n, 1)));
  std::vector<Acc> partial(workers, init);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  constexpr std::uint64_t kChunk = 64;
  auto work = [&](int w) {
    try {
      for (;;) {
        const std::uint64_t begin = next.fetch_add(kChunk);
        if (begin >= n) break;
        const std::uint64_t end = std::min(n, begin + kChunk);
        for (std::uint64_t i = begin; i < end; ++i) body(i, partial[w]);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  Acc out = std::move(init);
  for (const auto& p : partial) merge(out, p);
  return out;
}

}  // namespace switchlab
