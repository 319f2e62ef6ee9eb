#pragma once

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "reprindt/data.hpp"
#include "reprindt/error.hpp"

namespace test {

// Error code thrown by `f`, or nothing when it returns normally.
template <class F>
std::optional<reprindt::ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const reprindt::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline reprindt::PredictorSpec numeric(std::string name) { return {std::move(name), reprindt::PredictorKind::numeric, {}}; }

inline reprindt::PredictorSpec categorical(std::string name, std::vector<std::string> levels) {
  return {std::move(name), reprindt::PredictorKind::categorical, std::move(levels)};
}

inline std::vector<reprindt::Label> labels(const std::string& pattern) {
  std::vector<reprindt::Label> out;
  for (char c : pattern) out.push_back(c == 's' ? reprindt::Label::small : reprindt::Label::large);
  return out;
}

inline reprindt::Dataset dataset(reprindt::Schema schema, std::vector<std::vector<double>> columns,
                                 std::vector<reprindt::Label> classes) {
  return reprindt::Dataset(std::move(schema), "class", {"a", "b"}, std::move(columns), std::move(classes));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Fresh scratch directory below the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("reprindt_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace test
