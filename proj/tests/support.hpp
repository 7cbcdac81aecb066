#pragma once

#include <stdlib.h>

#include <map>
#include <string>

#include "termgen/task_model.hpp"
#include "termgen/util.hpp"

namespace termgen::testing {

inline fs::path fixture(const std::string& rel) { return fs::path(TERMGEN_FIXTURE_DIR) / rel; }
inline fs::path data_file(const std::string& rel) { return fs::path(TERMGEN_DATA_DIR) / rel; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "termgen-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw Error(Errc::IoFailure, "mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const fs::path& path() const { return path_; }
  [[nodiscard]] fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

// Every regular file under root, keyed by relative path, with an "x" suffix
// on the key for executables.
inline std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::string key = fs::relative(e.path(), root).generic_string();
    if ((fs::status(e.path()).permissions() & fs::perms::owner_exec) != fs::perms::none) key += " (x)";
    out[key] = read_file(e.path());
  }
  return out;
}

inline TaskSpec make_task(const std::string& id) {
  TaskSpec t;
  t.id = id;
  t.instruction = "Write hello to /app/out.txt.\n";
  t.metadata["origin"] = MetaValue::string("skill/file operations");
  t.environment.insert({"Dockerfile", "FROM python:3.11-slim\nWORKDIR /app\n", false});
  t.tests.insert({"test_outputs.py", "def test_out():\n    assert open('/app/out.txt').read() == 'hello'\n", false});
  return t;
}

}  // namespace termgen::testing
