#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <unistd.h>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wse/corpus.hpp"
#include "wse/embed.hpp"
#include "wse/rng.hpp"

namespace test {

inline std::filesystem::path data_dir() { return WSE_TEST_DATA_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("wse_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline wse::UsageInstance usage(const std::string& id, const std::string& lemma,
                                const std::string& sense, std::vector<std::string> context = {},
                                const std::string& pos = "noun") {
  wse::UsageInstance u;
  u.id = id;
  u.lemma = lemma;
  u.sense = {sense};
  u.pos = pos;
  u.tokens = {lemma};
  u.tokens.insert(u.tokens.end(), context.begin(), context.end());
  u.target_index = 0;
  return u;
}

inline wse::ContextualEmbedding record(const std::string& id, const std::string& token,
                                       std::vector<float> v) {
  return {id, token, std::move(v)};
}

inline std::vector<float> random_vector(wse::Rng& rng, int d, double scale = 1.0) {
  std::vector<float> v(d);
  for (auto& x : v) x = static_cast<float>(rng.normal(0.0, scale));
  return v;
}

inline Eigen::MatrixXd random_matrix(wse::Rng& rng, int rows, int cols, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, scale);
  }
  return m;
}

}  // namespace test
