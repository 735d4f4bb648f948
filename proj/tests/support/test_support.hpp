#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "hlucb") {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(stamp) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Independent scan of the boundary and focus rules over sorted positions
// (0-based). Written separately from the library on purpose.
struct Indices {
  std::size_t d1, d2, b1, b2;
  bool stop;
};

inline Indices brute_force_indices(const std::vector<double>& tau, const std::vector<double>& rad,
                                   std::size_t k, std::size_t h) {
  const std::size_t n = tau.size();
  Indices out{};
  double best = 0.0;
  for (std::size_t p = 0; p + h < k; ++p) {
    const double v = tau[p] - rad[p];
    if (p == 0 || v < best) {
      best = v;
      out.d1 = p;
    }
  }
  bool first = true;
  for (std::size_t p = k + h; p < n; ++p) {
    const double v = tau[p] + rad[p];
    if (first || v > best) {
      best = v;
      out.d2 = p;
      first = false;
    }
  }
  // candidate lists, then widest radius with the smallest position on ties
  auto widest = [&](std::vector<std::size_t> cand) {
    std::sort(cand.begin(), cand.end());
    std::size_t arg = cand.front();
    for (std::size_t p : cand) {
      if (rad[p] > rad[arg]) arg = p;
    }
    return arg;
  };
  std::vector<std::size_t> c1{out.d1};
  for (std::size_t p = k - h; p < k; ++p) c1.push_back(p);
  std::vector<std::size_t> c2{out.d2};
  for (std::size_t p = k; p < k + h; ++p) c2.push_back(p);
  out.b1 = widest(c1);
  out.b2 = widest(c2);
  out.stop = tau[out.d1] - rad[out.d1] >= tau[out.d2] + rad[out.d2];
  return out;
}

}  // namespace testing
