#ifndef ZOMBIE_TESTS_SUPPORT_HPP
#define ZOMBIE_TESTS_SUPPORT_HPP

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path data_path(const std::string& rel) { return fs::path(ZOMBIE_TEST_DATA) / rel; }

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("zombie-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

private:
  fs::path path_;
};

struct CliResult {
  int code = -1;
  std::string out;
};

inline std::string quote(const std::string& s) { return "'" + s + "'"; }
inline std::string quote(const fs::path& p) { return quote(p.string()); }

/// Runs the zombie binary with `args`, capturing stdout and stderr together.
inline CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(ZOMBIE_CLI) + " " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

} // namespace testing_support

#endif // ZOMBIE_TESTS_SUPPORT_HPP
