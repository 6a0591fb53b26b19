#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mortar {

inline double clip(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

inline std::vector<double> clip(std::vector<double> v,
                                const std::vector<double>& lo,
                                const std::vector<double>& hi) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = clip(v[i], lo[i], hi[i]);
  return v;
}

/// sign(0) = 0
inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// 17 significant digits, enough to reproduce any double exactly on re-read.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Worker cap from MORTAR_THREADS; unset or <= 1 means sequential.
inline int worker_count() {
  const char* s = std::getenv("MORTAR_THREADS");
  if (s == nullptr) return 1;
  const int n = std::atoi(s);
  return n <= 1 ? 1 : n;
}

/// Runs fn(0..n-1) on up to `workers` threads. Callers make fn(i) write only
/// to slot i, so results do not depend on scheduling. First exception wins
/// and is rethrown after all workers stop.
inline void parallel_for(int n, int workers,
                         const std::function<void(int)>& fn) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace mortar
