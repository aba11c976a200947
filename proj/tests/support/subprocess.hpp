// Minimal subprocess helper for driving the command-line tool from tests.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _WIN32
#error "tests drive the CLI through POSIX shell redirection"
#endif
#include <sys/wait.h>

namespace testsup {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'')
      q += "'\\''";
    else
      q += c;
  }
  q += "'";
  return q;
}

inline std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs `argv` with the given working directory, capturing stdout/stderr.
inline RunResult run(const std::vector<std::string>& argv, const std::filesystem::path& cwd) {
  namespace fs = std::filesystem;
  fs::create_directories(cwd);
  const fs::path out_file = cwd / ".test-stdout";
  const fs::path err_file = cwd / ".test-stderr";
  std::string cmd = "cd " + shell_quote(cwd.string()) + " && ";
  for (const std::string& a : argv) cmd += shell_quote(a) + " ";
  cmd += "> " + shell_quote(out_file.string()) + " 2> " + shell_quote(err_file.string());
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_all(out_file);
  r.err = read_all(err_file);
  fs::remove(out_file);
  fs::remove(err_file);
  return r;
}

// Path to the CLI binary, provided by the build via an environment variable.
inline std::string cli_path() {
  const char* p = std::getenv("UCMAR_CLI");
  return p ? std::string(p) : std::string();
}

// Fresh scratch directory for a test, rooted at $UCMAR_SCRATCH (or /tmp).
inline std::filesystem::path scratch_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const char* root = std::getenv("UCMAR_SCRATCH");
  fs::path base = root ? fs::path(root) : fs::temp_directory_path() / "ucmar-tests";
  fs::path dir = base / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline std::string file_bytes(const std::filesystem::path& p) { return read_all(p); }

}  // namespace testsup
