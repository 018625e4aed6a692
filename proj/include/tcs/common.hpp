#pragma once

// Shared plumbing: error taxonomy, deterministic hashing, versioned artifact
// headers, and small string/number/file helpers used across the library.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tcs {

// The CLI maps ValidationError (and subclasses) to exit code 1, IoError to 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string locate(std::string_view file, std::size_t line_no,
                          std::string_view what) {
  std::string msg(file);
  msg += ':';
  msg += std::to_string(line_no);
  msg += ": ";
  msg += what;
  return msg;
}

}  // namespace detail

// Malformed input or artifact file; the message carries file:line context.
class ParseError : public ValidationError {
 public:
  ParseError(std::string_view file, std::size_t line_no, std::string_view what)
      : ValidationError(detail::locate(file, line_no, what)) {}
};

// ---------------------------------------------------------------------------
// Strings and numbers
// ---------------------------------------------------------------------------

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      break;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

// Fixed 9-decimal formatting; golden files depend on it.
inline std::string fixed9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

// Shortest round-trippable formatting for header fields: the fewest
// significant digits that parse back to the same double.
inline std::string g17(double v) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    double parsed = 0.0;
    const char* end = buf + std::char_traits<char>::length(buf);
    if (std::from_chars(buf, end, parsed).ptr == end && parsed == v) break;
  }
  return buf;
}

inline std::optional<uint64_t> try_parse_u64(std::string_view s) {
  uint64_t value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

inline std::optional<int64_t> try_parse_i64(std::string_view s) {
  int64_t value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

inline std::optional<double> try_parse_double(std::string_view s) {
  double value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex16(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Transparent hashing so count maps can be probed with string_views.
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
  std::size_t operator()(const std::string& s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

// ---------------------------------------------------------------------------
// Versioned artifact headers
//
// Every artifact starts with "#<magic> v1 key=value ...". Values must not
// contain spaces; writers only put language codes, numbers and comma lists
// there. Unknown keys are ignored by parsers so provenance fields can be
// appended freely.
// ---------------------------------------------------------------------------

// Identifies the producing command; appended to headers by the CLI layer.
struct Provenance {
  std::string command;
  std::string config_hash;
};

using HeaderFields = std::vector<std::pair<std::string, std::string>>;

inline std::string make_header(std::string_view magic, const HeaderFields& fields,
                               const Provenance* prov = nullptr) {
  std::string out = "#";
  out += magic;
  out += " v1";
  for (const auto& [key, value] : fields) {
    out += ' ';
    out += key;
    out += '=';
    out += value;
  }
  if (prov != nullptr) {
    out += " cmd=" + prov->command + " config=" + prov->config_hash;
  }
  out += '\n';
  return out;
}

struct HeaderInfo {
  std::map<std::string, std::string, std::less<>> fields;

  const std::string* find(std::string_view key) const {
    auto it = fields.find(key);
    return it == fields.end() ? nullptr : &it->second;
  }
};

inline HeaderInfo parse_header(std::string_view line, std::string_view magic,
                               std::string_view file) {
  std::string expected = "#";
  expected += magic;
  expected += " v1";
  if (line != expected && !line.starts_with(expected + " ")) {
    throw ParseError(file, 1,
                     "expected header '" + expected + " ...', got '" +
                         std::string(line.substr(0, 64)) + "'");
  }
  HeaderInfo info;
  for (std::string_view token : split(line.substr(expected.size()), ' ')) {
    if (token.empty()) continue;
    std::size_t eq = token.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(file, 1, "malformed header field '" + std::string(token) + "'");
    }
    info.fields.emplace(token.substr(0, eq), token.substr(eq + 1));
  }
  return info;
}

inline const std::string& require_field(const HeaderInfo& info, std::string_view key,
                                        std::string_view file) {
  const std::string* value = info.find(key);
  if (value == nullptr) {
    throw ParseError(file, 1, "missing header field '" + std::string(key) + "'");
  }
  return *value;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

// Reads all lines, tolerating CRLF. Throws IoError if the file is unreadable.
inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    line.clear();
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  return lines;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return content;
}

}  // namespace tcs
