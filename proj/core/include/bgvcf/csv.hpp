#pragma once

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

#include "bgvcf/types.hpp"

namespace bgvcf::csv {

/// Shortest representation that round-trips; locale independent.
inline std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "nan";
  return {buf.data(), ptr};
}

/// Line-oriented writer with a fixed header.
class Writer {
 public:
  Writer(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
      : out_(path), columns_(header.size()) {
    if (!out_) throw InputError("cannot write " + path.string());
    write_row(header);
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    static_assert(sizeof...(Fields) > 0);
    if (sizeof...(Fields) != columns_) throw Error("csv: row width does not match header");
    bool first = true;
    ((out_ << (first ? "" : ",") << field(fields), first = false), ...);
    out_ << '\n';
  }

 private:
  void write_row(std::initializer_list<std::string_view> fields) {
    bool first = true;
    for (auto f : fields) {
      out_ << (first ? "" : ",") << f;
      first = false;
    }
    out_ << '\n';
  }

  static std::string field(double v) { return format_double(v); }
  static std::string field(int v) { return std::to_string(v); }
  static std::string field(std::size_t v) { return std::to_string(v); }
  static std::string field(bool v) { return v ? "1" : "0"; }
  static std::string field(std::string_view v) { return std::string(v); }
  static std::string field(const std::string& v) { return v; }
  static std::string field(const char* v) { return v; }

  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace bgvcf::csv
