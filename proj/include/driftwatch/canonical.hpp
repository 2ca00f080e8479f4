#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "driftwatch/error.hpp"
#include "json.hpp"

namespace driftwatch {

using Json = nlohmann::json;

namespace detail {

inline void require_finite(const Json& doc) {
  switch (doc.type()) {
    case Json::value_t::number_float:
      if (!std::isfinite(doc.get<double>())) {
        throw InvalidArgument("non-finite number is not serializable");
      }
      break;
    case Json::value_t::array:
    case Json::value_t::object:
      for (const auto& item : doc) require_finite(item);
      break;
    case Json::value_t::binary:
    case Json::value_t::discarded:
      throw InvalidArgument("value is not JSON-serializable");
    default:
      break;
  }
}

}  // namespace detail

// Canonical form: object keys in byte order (nlohmann's std::map backing),
// no whitespace, raw UTF-8, doubles in shortest round-trip form.
inline std::string canonical_dump(const Json& doc) {
  detail::require_finite(doc);
  return doc.dump(-1, ' ', false, Json::error_handler_t::strict);
}

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

/// 16-hex-char content id of a JSON document.
inline std::string canonical_hash(const Json& doc) {
  return sha256_hex(canonical_dump(doc)).substr(0, 16);
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

inline std::string utc_now_iso8601() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto secs = time_point_cast<seconds>(now);
  const auto ms = duration_cast<milliseconds>(now - secs).count();
  const std::time_t t = system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms));
  return buf;
}

// Parses JSON text, reporting failures as ParseError with line/column.
inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("JSON parse error at line " + std::to_string(line) + ", column " +
                     std::to_string(column) + ": " + e.what());
  }
}

}  // namespace driftwatch
