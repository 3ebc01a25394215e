#ifndef ANMT_TEST_UTIL_HPP
#define ANMT_TEST_UTIL_HPP

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testutil {

// Self-cleaning scratch directory for file-based tests.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("anmt-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string dir() const { return path_.string(); }

  std::string write(const std::string& name, const std::vector<std::string>& lines) const {
    const std::string p = file(name);
    std::ofstream out(p, std::ios::binary);
    for (const auto& line : lines) out << line << '\n';
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil

#endif
