#pragma once

// Smoothed character n-gram language model. Operates on code points; every
// sentence is scored independently as BOS^(order-1) ... chars ... EOS with
// add-k smoothing
//
//   P(c | ctx) = (count(ctx, c) + alpha) / (count(ctx) + alpha * |V|)
//
// where V is the training character set plus EOS and UNK (BOS is context
// only, never predicted). Characters unseen in training map to UNK, so every
// score is finite for arbitrary input.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tcs/common.hpp"
#include "tcs/text.hpp"

namespace tcs {

// Sentinels live above the Unicode range so they cannot collide with text.
inline constexpr char32_t kBos = 0x110000;
inline constexpr char32_t kEos = 0x110001;
inline constexpr char32_t kUnk = 0x110002;

struct NllScore {
  double total_nll = 0.0;   // nats
  uint64_t char_count = 0;  // sentence code points + 1 (EOS)

  double per_char() const {
    return char_count == 0 ? 0.0 : total_nll / static_cast<double>(char_count);
  }
};

class CharLm {
 public:
  static CharLm train(std::span<const std::string> sentences, int order, double alpha) {
    if (order < 1) throw ValidationError("char lm: order must be >= 1");
    if (!(alpha > 0.0)) throw ValidationError("char lm: alpha must be > 0");

    CharLm lm;
    lm.order_ = order;
    lm.alpha_ = alpha;

    bool any_nonempty = false;
    std::u32string cps;
    std::u32string seq;
    for (const std::string& sentence : sentences) {
      if (!text::decode_utf8(sentence, cps)) {
        throw ValidationError("char lm: invalid UTF-8 in training sentence");
      }
      if (!cps.empty()) any_nonempty = true;
      for (char32_t cp : cps) lm.chars_.insert(cp);
      seq.assign(static_cast<std::size_t>(order - 1), kBos);
      seq += cps;
      seq.push_back(kEos);
      lm.accumulate(seq);
    }
    if (!any_nonempty) throw ValidationError("char lm: training set is empty");
    return lm;
  }

  NllScore score(std::string_view sentence) const {
    std::u32string cps;
    if (!text::decode_utf8(sentence, cps)) {
      throw ValidationError("char lm: invalid UTF-8 in scored sentence");
    }
    for (char32_t& cp : cps) {
      if (chars_.find(cp) == chars_.end()) cp = kUnk;
    }
    std::u32string seq(static_cast<std::size_t>(order_ - 1), kBos);
    seq += cps;
    seq.push_back(kEos);

    NllScore result;
    result.char_count = cps.size() + 1;
    const std::size_t ctx_len = static_cast<std::size_t>(order_ - 1);
    for (std::size_t j = ctx_len; j < seq.size(); ++j) {
      const std::u32string ctx = seq.substr(j - ctx_len, ctx_len);
      result.total_nll -= std::log(prob(ctx, seq[j]));
    }
    return result;
  }

  // Smoothed conditional probability; strictly positive for every symbol in
  // the prediction vocabulary.
  double prob(const std::u32string& context, char32_t symbol) const {
    uint64_t ctx_total = 0;
    uint64_t count = 0;
    if (auto total_it = totals_.find(context); total_it != totals_.end()) {
      ctx_total = total_it->second;
      const auto& row = counts_.at(context);
      if (auto it = row.find(symbol); it != row.end()) count = it->second;
    }
    const double v = static_cast<double>(vocab_size());
    return (static_cast<double>(count) + alpha_) /
           (static_cast<double>(ctx_total) + alpha_ * v);
  }

  int order() const { return order_; }
  double alpha() const { return alpha_; }

  // Prediction vocabulary size: observed characters + EOS + UNK.
  std::size_t vocab_size() const { return chars_.size() + 2; }

  // Total training transitions; bounds any context total, so it yields an
  // analytic floor on smoothed probabilities.
  uint64_t total_events() const { return total_events_; }

  // Sorted prediction vocabulary (for exhaustive probability checks).
  std::vector<char32_t> vocabulary() const {
    std::vector<char32_t> v(chars_.begin(), chars_.end());
    std::sort(v.begin(), v.end());
    v.push_back(kEos);
    v.push_back(kUnk);
    return v;
  }

  std::vector<std::u32string> contexts() const {
    std::vector<std::u32string> out;
    out.reserve(totals_.size());
    for (const auto& [ctx, total] : totals_) out.push_back(ctx);
    std::sort(out.begin(), out.end());
    return out;
  }

  void write(std::ostream& out, const Provenance* prov = nullptr) const;
  static CharLm read(const std::vector<std::string>& lines,
                     std::string_view file = "charlm");

 private:
  void accumulate(const std::u32string& seq) {
    const std::size_t ctx_len = static_cast<std::size_t>(order_ - 1);
    for (std::size_t j = ctx_len; j < seq.size(); ++j) {
      const std::u32string ctx = seq.substr(j - ctx_len, ctx_len);
      ++counts_[ctx][seq[j]];
      ++totals_[ctx];
      ++total_events_;
    }
  }

  int order_ = 1;
  double alpha_ = 0.01;
  std::unordered_set<char32_t> chars_;
  std::unordered_map<std::u32string, std::unordered_map<char32_t, uint64_t>> counts_;
  std::unordered_map<std::u32string, uint64_t> totals_;
  uint64_t total_events_ = 0;
};

inline NllScore score_nll(const CharLm& lm, std::string_view sentence) {
  return lm.score(sentence);
}

inline CharLm train_char_lm(std::span<const std::string> sentences, int order, double alpha) {
  return CharLm::train(sentences, order, alpha);
}

// ---------------------------------------------------------------------------
// Model dump: "#charlm v1 order=<m> alpha=<a>" then
// "context<TAB>char<TAB>count" rows sorted by (context, char). Sentinels and
// special characters are backslash-escaped per symbol: \B \E \U \\ \t \n \r.
// ---------------------------------------------------------------------------

namespace detail {

inline void append_symbol_escaped(std::string& out, char32_t cp) {
  switch (cp) {
    case kBos: out += "\\B"; return;
    case kEos: out += "\\E"; return;
    case kUnk: out += "\\U"; return;
    case U'\\': out += "\\\\"; return;
    case U'\t': out += "\\t"; return;
    case U'\n': out += "\\n"; return;
    case U'\r': out += "\\r"; return;
    default: text::append_utf8(out, cp); return;
  }
}

inline std::string escape_symbols(const std::u32string& symbols) {
  std::string out;
  for (char32_t cp : symbols) append_symbol_escaped(out, cp);
  return out;
}

inline std::u32string unescape_symbols(std::string_view s, std::string_view file,
                                       std::size_t line_no) {
  std::u32string decoded;
  if (!text::decode_utf8(s, decoded)) {
    throw ParseError(file, line_no, "invalid UTF-8 in symbol field");
  }
  std::u32string out;
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    if (decoded[i] != U'\\') {
      out.push_back(decoded[i]);
      continue;
    }
    if (i + 1 >= decoded.size()) throw ParseError(file, line_no, "dangling escape");
    switch (decoded[++i]) {
      case U'B': out.push_back(kBos); break;
      case U'E': out.push_back(kEos); break;
      case U'U': out.push_back(kUnk); break;
      case U'\\': out.push_back(U'\\'); break;
      case U't': out.push_back(U'\t'); break;
      case U'n': out.push_back(U'\n'); break;
      case U'r': out.push_back(U'\r'); break;
      default: throw ParseError(file, line_no, "unknown escape in symbol field");
    }
  }
  return out;
}

}  // namespace detail

inline void CharLm::write(std::ostream& out, const Provenance* prov) const {
  HeaderFields fields{{"order", std::to_string(order_)}, {"alpha", g17(alpha_)}};
  out << make_header("charlm", fields, prov);

  std::vector<std::pair<std::u32string, char32_t>> rows;
  rows.reserve(total_events_);
  for (const auto& [ctx, row] : counts_) {
    for (const auto& [symbol, count] : row) rows.emplace_back(ctx, symbol);
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& [ctx, symbol] : rows) {
    std::string sym;
    detail::append_symbol_escaped(sym, symbol);
    out << detail::escape_symbols(ctx) << '\t' << sym << '\t'
        << counts_.at(ctx).at(symbol) << '\n';
  }
}

inline CharLm CharLm::read(const std::vector<std::string>& lines, std::string_view file) {
  if (lines.empty()) throw ParseError(file, 1, "empty model file");
  HeaderInfo header = parse_header(lines[0], "charlm", file);
  auto order = try_parse_i64(require_field(header, "order", file));
  if (!order || *order < 1) throw ParseError(file, 1, "bad order");
  auto alpha = try_parse_double(require_field(header, "alpha", file));
  if (!alpha || !(*alpha > 0.0)) throw ParseError(file, 1, "bad alpha");

  CharLm lm;
  lm.order_ = static_cast<int>(*order);
  lm.alpha_ = *alpha;
  const std::size_t ctx_len = static_cast<std::size_t>(lm.order_ - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split(lines[i], '\t');
    if (cols.size() != 3) {
      throw ParseError(file, i + 1, "expected 'context<TAB>char<TAB>count'");
    }
    const std::u32string ctx = detail::unescape_symbols(cols[0], file, i + 1);
    if (ctx.size() != ctx_len) throw ParseError(file, i + 1, "context length != order-1");
    const std::u32string sym = detail::unescape_symbols(cols[1], file, i + 1);
    if (sym.size() != 1) throw ParseError(file, i + 1, "char field must be one symbol");
    auto count = try_parse_u64(cols[2]);
    if (!count || *count == 0) throw ParseError(file, i + 1, "bad count");
    if (sym[0] == kBos) throw ParseError(file, i + 1, "BOS cannot be predicted");
    if (sym[0] != kEos && sym[0] != kUnk) lm.chars_.insert(sym[0]);
    lm.counts_[ctx][sym[0]] += *count;
    lm.totals_[ctx] += *count;
    lm.total_events_ += *count;
  }
  if (lm.total_events_ == 0) throw ParseError(file, lines.size(), "model has no counts");
  return lm;
}

}  // namespace tcs
