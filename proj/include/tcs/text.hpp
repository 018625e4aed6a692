#pragma once

// Text normalization: strict UTF-8 decoding, Unicode NFC (via ICU), optional
// lowercasing, and whitespace canonicalization. All downstream modules assume
// their inputs went through normalize_text, so the invariants established
// here (valid UTF-8, NFC form, single ASCII spaces, no leading/trailing
// space) hold everywhere else.

#include <string>
#include <string_view>

#include <unicode/bytestream.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "tcs/common.hpp"

namespace tcs::text {

// ---------------------------------------------------------------------------
// UTF-8 codec
// ---------------------------------------------------------------------------

// Strict decoder: rejects overlong forms, surrogates, out-of-range code
// points and truncated sequences.
inline bool decode_utf8(std::string_view in, std::u32string& out) {
  out.clear();
  out.reserve(in.size());
  std::size_t i = 0;
  const std::size_t n = in.size();
  while (i < n) {
    const unsigned char b0 = static_cast<unsigned char>(in[i]);
    char32_t cp = 0;
    int len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      return false;
    }
    if (i + static_cast<std::size_t>(len) > n) return false;
    for (int j = 1; j < len; ++j) {
      const unsigned char bj = static_cast<unsigned char>(in[i + j]);
      if ((bj & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (bj & 0x3F);
    }
    static constexpr char32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (len > 1 && cp < kMinByLen[len]) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return true;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

// Number of code points in valid UTF-8 (counts lead bytes).
inline std::size_t codepoint_count(std::string_view utf8) {
  std::size_t n = 0;
  for (char c : utf8) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Unicode operations (ICU-backed)
// ---------------------------------------------------------------------------

inline const icu::Normalizer2& nfc_normalizer() {
  UErrorCode ec = U_ZERO_ERROR;
  const icu::Normalizer2* instance = icu::Normalizer2::getNFCInstance(ec);
  if (U_FAILURE(ec) || instance == nullptr) {
    throw ValidationError("ICU NFC normalizer unavailable");
  }
  return *instance;
}

// Canonical composition of valid UTF-8.
inline std::string nfc(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  icu::StringByteSink<std::string> sink(&out);
  UErrorCode ec = U_ZERO_ERROR;
  nfc_normalizer().normalizeUTF8(
      0, icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())), sink,
      nullptr, ec);
  if (U_FAILURE(ec)) throw ValidationError("unicode normalization failed");
  return out;
}

// Locale-independent (root locale) full lowercasing.
inline std::string to_lower(std::string_view utf8) {
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  us.toLower(icu::Locale::getRoot());
  std::string out;
  us.toUTF8String(out);
  return out;
}

// Unicode White_Space property (covers tab, NBSP, ideographic space, ...).
inline bool is_space(char32_t cp) {
  return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0;
}

// ---------------------------------------------------------------------------
// normalize_text
// ---------------------------------------------------------------------------

struct NormalizePolicy {
  bool lowercase = false;
};

// Validates encoding, applies NFC (and optional lowercasing, re-composed
// afterwards since case mapping can denormalize), then trims and collapses
// every whitespace run to a single ASCII space.
inline std::string normalize_text(std::string_view raw,
                                  const NormalizePolicy& policy = {}) {
  std::u32string cps;
  if (!decode_utf8(raw, cps)) throw ValidationError("invalid UTF-8");

  std::string composed = nfc(raw);
  if (policy.lowercase) composed = nfc(to_lower(composed));
  decode_utf8(composed, cps);

  std::string out;
  out.reserve(composed.size());
  bool pending_space = false;
  bool emitted = false;
  for (char32_t cp : cps) {
    if (is_space(cp)) {
      pending_space = emitted;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, cp);
    emitted = true;
  }
  return out;
}

}  // namespace tcs::text
