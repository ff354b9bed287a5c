#include "sdsm/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace sdsm {

std::vector<double> parallel_replicates(
    long n, int width, std::uint64_t seed, std::uint32_t tag, int values_per_rep,
    const std::function<void(long rep, RngStream&, double* out)>& body) {
  std::vector<double> out(static_cast<size_t>(n) * values_per_rep, 0.0);
  if (n == 0) return out;
  if (width < 1) width = 1;

  auto run_one = [&](long rep) {
    RngStream stream(seed, static_cast<uint32_t>(rep), tag);
    body(rep, stream, out.data() + static_cast<size_t>(rep) * values_per_rep);
  };

  if (width == 1) {
    for (long rep = 0; rep < n; ++rep) run_one(rep);
    return out;
  }

  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&]() {
    for (;;) {
      long rep = next.fetch_add(1);
      if (rep >= n) return;
      try {
        run_one(rep);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(width);
  for (int w = 0; w < width; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace sdsm
