#pragma once

// Terminal-Bench task directory format:
//
//   root/instruction.md
//   root/task.toml
//   root/environment/**      (Dockerfile plus fixture files)
//   root/solution/**         (optional)
//   root/tests/**            (tests/weights.json holds partial-credit weights)

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "termgen/error.hpp"
#include "termgen/rational.hpp"
#include "termgen/util.hpp"

namespace termgen {

// ---------------------------------------------------------------------------
// Files

// A relative path is safe when it has no leading separator, no empty segment,
// and no "." or ".." segment.
[[nodiscard]] inline bool is_safe_relative_path(std::string_view path) {
  if (path.empty() || path.front() == '/' || path.find('\\') != std::string_view::npos) return false;
  if (path.find('\0') != std::string_view::npos) return false;
  for (const auto& segment : split(path, '/')) {
    if (segment.empty() || segment == "." || segment == "..") return false;
  }
  return true;
}

struct FileEntry {
  std::string path;
  std::string content;  // raw bytes
  bool executable = false;

  friend bool operator==(const FileEntry&, const FileEntry&) = default;
};

// Path-unique collection of files, kept sorted by path.
class FileSet {
 public:
  FileSet() = default;
  FileSet(std::initializer_list<FileEntry> entries) {
    for (const auto& e : entries) insert(e);
  }

  // Throws PathEscape for unsafe paths, InvalidArgument for duplicates.
  void insert(FileEntry entry) {
    if (!is_safe_relative_path(entry.path)) {
      throw Error(Errc::PathEscape, "unsafe relative path '" + entry.path + "'");
    }
    auto it = lower_bound(entry.path);
    if (it != entries_.end() && it->path == entry.path) {
      throw Error(Errc::InvalidArgument, "duplicate path '" + entry.path + "'");
    }
    entries_.insert(it, std::move(entry));
  }

  // Insert without the safety check; validate_task reports the problem instead.
  void insert_unchecked(FileEntry entry) {
    auto it = lower_bound(entry.path);
    entries_.insert(it, std::move(entry));
  }

  [[nodiscard]] const FileEntry* find(std::string_view path) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), path,
                               [](const FileEntry& e, std::string_view p) { return e.path < p; });
    return (it != entries_.end() && it->path == path) ? &*it : nullptr;
  }

  bool erase(std::string_view path) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const FileEntry& e) { return e.path == path; });
    if (it == entries_.end()) return false;
    entries_.erase(it);
    return true;
  }

  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] auto begin() const noexcept { return entries_.begin(); }
  [[nodiscard]] auto end() const noexcept { return entries_.end(); }

  friend bool operator==(const FileSet&, const FileSet&) = default;

 private:
  std::vector<FileEntry>::iterator lower_bound(const std::string& path) {
    return std::lower_bound(entries_.begin(), entries_.end(), path,
                            [](const FileEntry& e, const std::string& p) { return e.path < p; });
  }

  std::vector<FileEntry> entries_;
};

// ---------------------------------------------------------------------------
// task.toml values

// A task.toml value: either a decoded string or a raw TOML literal (number,
// boolean, array, inline table) kept verbatim so it round-trips unchanged.
struct MetaValue {
  enum class Kind { String, Raw };
  Kind kind = Kind::String;
  std::string text;

  static MetaValue string(std::string s) { return {Kind::String, std::move(s)}; }
  static MetaValue raw(std::string s) { return {Kind::Raw, std::move(s)}; }

  friend bool operator==(const MetaValue&, const MetaValue&) = default;
};

using Metadata = std::map<std::string, MetaValue>;

namespace detail {

[[noreturn]] inline void toml_fail(std::size_t line, const std::string& what) {
  throw Error(Errc::MalformedMetadata, "task.toml line " + std::to_string(line) + ": " + what);
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Cursor-based reader for the flat subset of TOML that task.toml files use.
class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : text_(text) {}

  Metadata read() {
    Metadata out;
    std::string table;
    while (true) {
      skip_blank_and_comments();
      if (at_end()) break;
      if (peek() == '[') {
        if (peek(1) == '[') fail("arrays of tables are not supported");
        ++pos_;
        skip_inline_ws();
        table = read_key_path();
        skip_inline_ws();
        expect(']');
        finish_line();
        continue;
      }
      std::string key = read_key_path();
      skip_inline_ws();
      expect('=');
      skip_inline_ws();
      MetaValue value = read_value();
      finish_line();
      std::string full = table.empty() ? key : table + "." + key;
      if (!out.emplace(full, std::move(value)).second) fail("duplicate key '" + full + "'");
    }
    return out;
  }

 private:
  [[nodiscard]] bool at_end() const { return pos_ >= text_.size(); }
  [[nodiscard]] char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  [[noreturn]] void fail(const std::string& what) const { toml_fail(line_, what); }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_inline_ws() {
    while (peek() == ' ' || peek() == '\t') ++pos_;
  }

  void skip_blank_and_comments() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '\n') {
        ++pos_, ++line_;
      } else if (c == '#') {
        while (!at_end() && peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void finish_line() {
    skip_inline_ws();
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') ++pos_;
    }
    if (peek() == '\r') ++pos_;
    if (at_end()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    ++pos_, ++line_;
  }

  static bool is_bare(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  }

  std::string read_key_path() {
    std::string path;
    while (true) {
      skip_inline_ws();
      std::string segment;
      if (peek() == '"') {
        segment = read_basic_string();
      } else if (peek() == '\'') {
        segment = read_literal_string();
      } else {
        while (is_bare(peek())) segment += text_[pos_++];
        if (segment.empty()) fail("expected a key");
      }
      path += segment;
      skip_inline_ws();
      if (peek() != '.') break;
      ++pos_;
      path += '.';
    }
    return path;
  }

  std::string read_basic_string() {
    expect('"');
    if (peek() == '"' && peek(1) == '"') {
      pos_ += 2;
      return read_multiline_basic();
    }
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        read_escape(out);
      } else {
        out += c;
      }
    }
    return out;
  }

  std::string read_multiline_basic() {
    if (peek() == '\r') ++pos_;
    if (peek() == '\n') ++pos_, ++line_;
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated multi-line string");
      if (peek() == '"' && peek(1) == '"' && peek(2) == '"') {
        pos_ += 3;
        break;
      }
      char c = text_[pos_++];
      if (c == '\n') ++line_;
      if (c == '\\') {
        if (peek() == '\n' || peek() == ' ' || peek() == '\t' || peek() == '\r') {
          while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) {
            if (peek() == '\n') ++line_;
            ++pos_;
          }
          continue;
        }
        read_escape(out);
      } else {
        out += c;
      }
    }
    return out;
  }

  void read_escape(std::string& out) {
    char e = at_end() ? '\0' : text_[pos_++];
    switch (e) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'b': out += '\b'; break;
      case 'f': out += '\f'; break;
      case 'u':
      case 'U': {
        std::size_t digits = e == 'u' ? 4 : 8;
        if (pos_ + digits > text_.size()) fail("truncated unicode escape");
        std::uint32_t cp = 0;
        for (std::size_t k = 0; k < digits; ++k) {
          char h = text_[pos_++];
          cp <<= 4;
          if (h >= '0' && h <= '9') cp |= static_cast<std::uint32_t>(h - '0');
          else if (h >= 'a' && h <= 'f') cp |= static_cast<std::uint32_t>(h - 'a' + 10);
          else if (h >= 'A' && h <= 'F') cp |= static_cast<std::uint32_t>(h - 'A' + 10);
          else fail("bad unicode escape");
        }
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid code point");
        append_utf8(out, cp);
        break;
      }
      default: fail("unknown escape sequence");
    }
  }

  std::string read_literal_string() {
    expect('\'');
    if (peek() == '\'' && peek(1) == '\'') {
      pos_ += 2;
      if (peek() == '\r') ++pos_;
      if (peek() == '\n') ++pos_, ++line_;
      auto end = text_.find("'''", pos_);
      if (end == std::string_view::npos) fail("unterminated multi-line literal string");
      std::string out(text_.substr(pos_, end - pos_));
      line_ += static_cast<std::size_t>(std::count(out.begin(), out.end(), '\n'));
      pos_ = end + 3;
      return out;
    }
    auto end = text_.find('\'', pos_);
    auto nl = text_.find('\n', pos_);
    if (end == std::string_view::npos || (nl != std::string_view::npos && nl < end)) fail("unterminated literal string");
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  // Reads a non-string value verbatim. Arrays and inline tables may span lines;
  // brackets are balanced with string literals skipped.
  MetaValue read_value() {
    if (peek() == '"') return MetaValue::string(read_basic_string());
    if (peek() == '\'') return MetaValue::string(read_literal_string());
    std::size_t start = pos_;
    int depth = 0;
    while (!at_end()) {
      char c = peek();
      if (c == '"' || c == '\'') {
        if (depth == 0) fail("unexpected quote in value");
        if (c == '"') read_basic_string();
        else read_literal_string();
        continue;
      }
      if (c == '[' || c == '{') {
        ++depth;
      } else if (c == ']' || c == '}') {
        if (--depth < 0) fail("unbalanced brackets");
      } else if (c == '#' && depth > 0) {
        while (!at_end() && peek() != '\n') ++pos_;
        continue;
      } else if (c == '\n') {
        if (depth == 0) break;
        ++line_;
      } else if (c == '#' && depth == 0) {
        break;
      }
      ++pos_;
    }
    if (depth != 0) fail("unbalanced brackets");
    std::string raw(trim(text_.substr(start, pos_ - start)));
    if (raw.empty()) fail("missing value");
    static const std::regex scalar(
        R"(^(true|false|[+-]?(inf|nan)|[+-]?[0-9_]+(\.[0-9_]+)?([eE][+-]?[0-9_]+)?|0x[0-9A-Fa-f_]+|0o[0-7_]+|0b[01_]+|[0-9]{4}-[0-9]{2}-[0-9]{2}([T ][0-9:.]+)?([Zz]|[+-][0-9:]+)?|[0-9]{2}:[0-9]{2}:[0-9]{2}(\.[0-9]+)?)$)");
    if (raw.front() != '[' && raw.front() != '{' && !std::regex_match(raw, scalar)) {
      fail("unrecognized value '" + raw + "'");
    }
    return MetaValue::raw(std::move(raw));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

inline std::string toml_quote(std::string_view s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20 || c == 0x7F) {
          static constexpr char hex[] = "0123456789ABCDEF";
          out += "\\u00";
          out += hex[c >> 4];
          out += hex[c & 0xF];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out + "\"";
}

inline std::string toml_key(std::string_view dotted) {
  std::string out;
  bool first = true;
  for (const auto& segment : split(dotted, '.')) {
    if (!first) out += '.';
    first = false;
    bool bare = !segment.empty() && std::all_of(segment.begin(), segment.end(), [](char c) {
      return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
    out += bare ? segment : toml_quote(segment);
  }
  return out;
}

}  // namespace detail

[[nodiscard]] inline Metadata parse_toml_metadata(std::string_view text) {
  return detail::TomlReader(text).read();
}

// Emits every key as a top-level (possibly dotted) key, sorted.
[[nodiscard]] inline std::string write_toml_metadata(const Metadata& metadata) {
  std::string out;
  for (const auto& [key, value] : metadata) {
    out += detail::toml_key(key);
    out += " = ";
    out += value.kind == MetaValue::Kind::String ? detail::toml_quote(value.text) : value.text;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// TaskSpec

using Weights = std::map<std::string, Rational>;

struct TaskSpec {
  std::string id;
  std::string instruction;
  Metadata metadata;  // task.toml keys other than id/domain/image_ref
  FileSet environment;
  std::optional<FileSet> solution;
  FileSet tests;
  std::optional<Weights> weights;
  std::optional<std::string> domain;
  std::optional<std::string> image_ref;

  // Adapter-produced tasks legitimately carry no tests.
  [[nodiscard]] bool from_adapter() const {
    auto it = metadata.find("origin");
    return it != metadata.end() && starts_with(it->second.text, "adapter");
  }

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

inline constexpr std::string_view kWeightsFile = "weights.json";

// Weights used for scoring: explicit weights, else weight 1 per named test.
[[nodiscard]] inline Weights effective_weights(const std::optional<Weights>& weights,
                                               const std::vector<std::string>& test_names) {
  if (weights) return *weights;
  Weights uniform;
  for (const auto& name : test_names) uniform[name] = Rational(1);
  return uniform;
}

// ---------------------------------------------------------------------------
// Validation

enum class Rule {
  IdInvalid,
  InstructionEmpty,
  InstructionNotUtf8,
  UnsafePath,
  WeightNegative,
  WeightsSumNonpositive,
  TestsEmpty,
};

[[nodiscard]] constexpr std::string_view to_string(Rule rule) noexcept {
  switch (rule) {
    case Rule::IdInvalid: return "IdInvalid";
    case Rule::InstructionEmpty: return "InstructionEmpty";
    case Rule::InstructionNotUtf8: return "InstructionNotUtf8";
    case Rule::UnsafePath: return "UnsafePath";
    case Rule::WeightNegative: return "WeightNegative";
    case Rule::WeightsSumNonpositive: return "WeightsSumNonpositive";
    case Rule::TestsEmpty: return "TestsEmpty";
  }
  return "Unknown";
}

struct Violation {
  std::string field;
  Rule rule;

  friend bool operator==(const Violation&, const Violation&) = default;
};

[[nodiscard]] inline bool is_valid_task_id(std::string_view id) {
  static const std::regex pattern("^[a-z0-9_-]+$");
  return !id.empty() && std::regex_match(id.begin(), id.end(), pattern);
}

[[nodiscard]] inline std::vector<Violation> validate_task(const TaskSpec& task) {
  std::vector<Violation> out;
  if (!is_valid_task_id(task.id)) out.push_back({"id", Rule::IdInvalid});
  if (task.instruction.empty()) out.push_back({"instruction", Rule::InstructionEmpty});
  if (!is_valid_utf8(task.instruction)) out.push_back({"instruction", Rule::InstructionNotUtf8});
  auto check_paths = [&](const FileSet& files, const std::string& field) {
    for (const auto& f : files) {
      if (!is_safe_relative_path(f.path)) out.push_back({field + "/" + f.path, Rule::UnsafePath});
    }
  };
  check_paths(task.environment, "environment");
  if (task.solution) check_paths(*task.solution, "solution");
  check_paths(task.tests, "tests");
  if (task.weights) {
    Rational sum;
    for (const auto& [name, w] : task.weights.value()) {
      if (w < Rational(0)) out.push_back({"weights." + name, Rule::WeightNegative});
      sum += w;
    }
    if (sum <= Rational(0)) out.push_back({"weights", Rule::WeightsSumNonpositive});
  }
  if (task.tests.empty() && !task.from_adapter()) out.push_back({"tests", Rule::TestsEmpty});
  return out;
}

// ---------------------------------------------------------------------------
// Weights file

[[nodiscard]] inline Weights parse_weights_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedWeights, e.what());
  }
  if (!doc.is_object()) throw Error(Errc::MalformedWeights, "weights must be a JSON object");
  Weights out;
  for (const auto& [name, value] : doc.items()) {
    if (!value.is_number()) throw Error(Errc::MalformedWeights, "weight for '" + name + "' is not a number");
    try {
      // dump() of a JSON number is its shortest round-trip decimal.
      out[name] = Rational::parse(value.dump());
    } catch (const Error& e) {
      throw Error(Errc::MalformedWeights, e.what());
    }
  }
  return out;
}

// Exact decimals are written as-is; other fractions fall back to double.
[[nodiscard]] inline std::string write_weights_json(const Weights& weights) {
  std::string out = "{";
  bool first = true;
  for (const auto& [name, w] : weights) {
    out += first ? "\n  " : ",\n  ";
    first = false;
    out += nlohmann::json(name).dump();
    out += ": ";
    std::string text = w.to_string();
    if (text.find('/') != std::string::npos) text = nlohmann::json(w.to_double()).dump();
    out += text;
  }
  out += first ? "}\n" : "\n}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Directory I/O

namespace detail {

inline bool is_within(const fs::path& root, const fs::path& candidate) {
  auto r = root.begin();
  auto c = candidate.begin();
  for (; r != root.end(); ++r, ++c) {
    if (c == candidate.end() || *r != *c) return false;
  }
  return true;
}

inline bool has_exec_bit(const fs::path& p) {
  auto perms = fs::status(p).permissions();
  return (perms & fs::perms::owner_exec) != fs::perms::none;
}

// Loads every regular file under dir (recursively) into a FileSet with paths
// relative to dir. Symlinks are resolved and must stay inside `root`.
inline FileSet load_file_tree(const fs::path& root, const fs::path& dir) {
  FileSet files;
  std::error_code ec;
  if (!fs::exists(dir, ec)) return files;
  const fs::path canonical_root = fs::canonical(root);
  const fs::path canonical_dir = fs::weakly_canonical(dir);
  if (!is_within(canonical_root, canonical_dir)) {
    throw Error(Errc::PathEscape, dir.string() + " resolves outside the task root");
  }
  std::vector<fs::path> paths;
  for (auto it = fs::recursive_directory_iterator(dir); it != fs::recursive_directory_iterator(); ++it) {
    const auto& entry = *it;
    fs::path resolved = fs::weakly_canonical(entry.path());
    if (!is_within(canonical_root, resolved)) {
      throw Error(Errc::PathEscape, entry.path().string() + " resolves outside the task root");
    }
    if (entry.is_symlink() && fs::is_directory(resolved)) continue;
    if (fs::is_regular_file(resolved)) paths.push_back(entry.path());
  }
  for (const auto& p : paths) {
    std::string rel = p.lexically_relative(dir).generic_string();
    files.insert({rel, read_file(p), has_exec_bit(p)});
  }
  return files;
}

inline void write_file_tree(const fs::path& dir, const FileSet& files) {
  for (const auto& f : files) {
    if (!is_safe_relative_path(f.path)) throw Error(Errc::PathEscape, "unsafe path '" + f.path + "'");
    fs::path target = dir / fs::path(f.path);
    write_file(target, f.content);
    std::error_code ec;
    constexpr auto exec = fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec;
    fs::permissions(target, exec, f.executable ? fs::perm_options::add : fs::perm_options::remove, ec);
    if (ec) throw Error(Errc::IoFailure, "chmod failed: " + target.string());
  }
}

}  // namespace detail

// Reads a task directory. Raises MissingInstruction, MalformedMetadata,
// MalformedWeights, PathEscape or IoFailure.
[[nodiscard]] inline TaskSpec parse_task_dir(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(Errc::IoFailure, "not a directory: " + root.string());
  const fs::path canonical_root = fs::canonical(root);
  auto checked = [&](const fs::path& p) {
    if (fs::exists(fs::symlink_status(p)) && !detail::is_within(canonical_root, fs::weakly_canonical(p))) {
      throw Error(Errc::PathEscape, p.string() + " resolves outside the task root");
    }
    return p;
  };

  TaskSpec task;
  const fs::path instruction = checked(root / "instruction.md");
  if (!fs::is_regular_file(instruction)) throw Error(Errc::MissingInstruction, root.string());
  task.instruction = read_file(instruction);

  const fs::path toml = checked(root / "task.toml");
  if (!fs::is_regular_file(toml)) throw Error(Errc::MalformedMetadata, "missing task.toml in " + root.string());
  task.metadata = parse_toml_metadata(read_file(toml));
  auto lift = [&](const char* key) -> std::optional<std::string> {
    auto it = task.metadata.find(key);
    if (it == task.metadata.end()) return std::nullopt;
    if (it->second.kind != MetaValue::Kind::String) {
      throw Error(Errc::MalformedMetadata, std::string(key) + " must be a string");
    }
    std::string value = it->second.text;
    task.metadata.erase(it);
    return value;
  };
  auto id = lift("id");
  task.id = id ? *id : canonical_root.filename().string();
  task.domain = lift("domain");
  task.image_ref = lift("image_ref");

  task.environment = detail::load_file_tree(root, checked(root / "environment"));
  if (fs::is_directory(checked(root / "solution"))) {
    task.solution = detail::load_file_tree(root, root / "solution");
  }
  task.tests = detail::load_file_tree(root, checked(root / "tests"));
  if (const FileEntry* w = task.tests.find(kWeightsFile)) {
    task.weights = parse_weights_json(w->content);
    task.tests.erase(kWeightsFile);
  }
  return task;
}

// Writes the task under root (created if needed). Raises PathEscape or IoFailure.
inline void write_task_dir(const TaskSpec& task, const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + root.string() + ": " + ec.message());

  Metadata toml = task.metadata;
  toml["id"] = MetaValue::string(task.id);
  if (task.domain) toml["domain"] = MetaValue::string(*task.domain);
  if (task.image_ref) toml["image_ref"] = MetaValue::string(*task.image_ref);

  write_file(root / "instruction.md", task.instruction);
  write_file(root / "task.toml", write_toml_metadata(toml));
  fs::create_directories(root / "environment", ec);
  detail::write_file_tree(root / "environment", task.environment);
  if (task.solution) {
    fs::create_directories(root / "solution", ec);
    detail::write_file_tree(root / "solution", *task.solution);
  }
  fs::create_directories(root / "tests", ec);
  detail::write_file_tree(root / "tests", task.tests);
  if (task.weights) write_file(root / "tests" / std::string(kWeightsFile), write_weights_json(*task.weights));
}

}  // namespace termgen
