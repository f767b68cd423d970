#include "debater/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>

#include "debater/bundled.hpp"
#include "debater/error.hpp"

namespace debater::text {

namespace {

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }
bool is_alnum(char32_t c) { return u_isalnum(static_cast<UChar32>(c)); }
// Combining marks continue the word they follow (decomposed accents).
bool is_mark(char32_t c) { return (U_GET_GC_MASK(static_cast<UChar32>(c)) & U_GC_M_MASK) != 0; }
bool is_digit(char32_t c) { return u_isdigit(static_cast<UChar32>(c)); }
bool is_upper(char32_t c) {
  return u_isupper(static_cast<UChar32>(c)) || u_istitle(static_cast<UChar32>(c));
}

bool is_hyphen(char32_t c) { return c == U'-' || c == U'‐' || c == U'‑'; }
bool is_apostrophe(char32_t c) { return c == U'\'' || c == U'’'; }
bool is_terminal(char32_t c) { return c == U'.' || c == U'?' || c == U'!'; }
bool is_closer(char32_t c) {
  return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == U'”' || c == U'’';
}
bool is_opener(char32_t c) {
  return c == U'"' || c == U'\'' || c == U'(' || c == U'[' || c == U'“' || c == U'‘';
}

char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

// Length of a contraction clitic starting at the apostrophe ('s, 're, n't...),
// given the alnum run [apos + 1, run_end). Zero when not a known clitic.
bool is_clitic(std::u32string_view after) {
  std::u32string lower;
  for (char32_t c : after) lower.push_back(ascii_lower(c));
  return lower == U"s" || lower == U"re" || lower == U"ve" || lower == U"ll" || lower == U"d" ||
         lower == U"m" || lower == U"t";
}

icu::UnicodeString to_icu(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string from_icu(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

}  // namespace

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else {
      std::size_t need = 0;
      char32_t min = 0;
      if ((b0 & 0xE0) == 0xC0) { need = 1; cp = b0 & 0x1F; min = 0x80; }
      else if ((b0 & 0xF0) == 0xE0) { need = 2; cp = b0 & 0x0F; min = 0x800; }
      else if ((b0 & 0xF8) == 0xF0) { need = 3; cp = b0 & 0x07; min = 0x10000; }
      bool ok = need > 0;
      if (ok) {
        for (std::size_t k = 1; k <= need; ++k) {
          if (i + k >= s.size()) { ok = false; break; }
          auto b = static_cast<unsigned char>(s[i + k]);
          if ((b & 0xC0) != 0x80) { ok = false; break; }
          cp = (cp << 6) | (b & 0x3F);
        }
      }
      if (ok && cp >= min && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF)) {
        len = need + 1;
      } else {
        cp = 0xFFFD;
        len = 1;
      }
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::size_t codepoint_length(std::string_view text) { return decode_utf8(text).size(); }

std::string slice(std::string_view text, std::size_t start, std::size_t end) {
  auto cps = decode_utf8(text);
  end = std::min(end, cps.size());
  if (start >= end) return {};
  return encode_utf8(std::u32string_view(cps).substr(start, end - start));
}

std::string lowercase(std::string_view text) {
  auto u = to_icu(text);
  u.toLower(icu::Locale::getRoot());
  return from_icu(u);
}

std::string casefold(std::string_view text) {
  auto u = to_icu(text);
  u.foldCase();
  return from_icu(u);
}

std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  auto out = norm->normalize(to_icu(text), status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  return from_icu(out);
}

std::string capitalize_first(std::string_view text) {
  auto cps = decode_utf8(text);
  // Leading quotes and brackets are skipped; a leading digit stops the search.
  auto it = std::find_if(cps.begin(), cps.end(), [](char32_t c) { return is_alnum(c); });
  if (it == cps.end() || !u_islower(static_cast<UChar32>(*it))) return std::string(text);
  *it = static_cast<char32_t>(u_totitle(static_cast<UChar32>(*it)));
  return encode_utf8(cps);
}

bool starts_uppercase(std::string_view text) {
  auto cps = decode_utf8(text);
  return !cps.empty() && is_upper(cps[0]);
}

std::string trim(std::string_view text) {
  auto cps = decode_utf8(text);
  std::size_t b = 0, e = cps.size();
  while (b < e && is_space(cps[b])) ++b;
  while (e > b && is_space(cps[e - 1])) --e;
  return encode_utf8(std::u32string_view(cps).substr(b, e - b));
}

std::string collapse_whitespace(std::string_view text) {
  auto cps = decode_utf8(text);
  std::u32string out;
  bool pending_space = false;
  for (char32_t c : cps) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return encode_utf8(out);
}

std::vector<std::string> data_lines(std::string_view contents) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string line(contents.substr(pos, nl - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = nl + 1;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.push_back(std::move(line));
  }
  return out;
}

AbbreviationList AbbreviationList::parse(std::string_view contents) {
  AbbreviationList list;
  for (const auto& line : data_lines(contents)) list.entries_.insert(lowercase(trim(line)));
  return list;
}

const AbbreviationList& AbbreviationList::bundled() {
  static const AbbreviationList list = parse(bundled::file("data/abbreviations.txt"));
  return list;
}

bool AbbreviationList::contains(std::string_view word) const {
  return entries_.contains(lowercase(word));
}

std::vector<std::string> split_sentences(std::string_view text) {
  return split_sentences(text, AbbreviationList::bundled());
}

std::vector<std::string> split_sentences(std::string_view text, const AbbreviationList& abbreviations) {
  auto cps = decode_utf8(text);
  const std::size_t n = cps.size();
  std::vector<std::string> out;
  auto emit = [&](std::size_t b, std::size_t e) {
    auto s = trim(encode_utf8(std::u32string_view(cps).substr(b, e - b)));
    if (!s.empty()) out.push_back(std::move(s));
  };

  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_terminal(cps[i])) continue;
    std::size_t j = i + 1;
    while (j < n && (is_terminal(cps[j]) || is_closer(cps[j]))) ++j;
    if (j >= n || !is_space(cps[j])) continue;
    std::size_t k = j;
    while (k < n && is_space(cps[k])) ++k;
    if (k >= n) continue;
    std::size_t next = k;
    while (next < n && is_opener(cps[next])) ++next;
    if (next >= n || !(is_upper(cps[next]) || is_digit(cps[next]))) continue;

    if (cps[i] == U'.' && j == i + 1) {
      std::size_t w = i;
      while (w > start && !is_space(cps[w - 1])) --w;
      while (w < i && is_opener(cps[w])) ++w;
      auto word = encode_utf8(std::u32string_view(cps).substr(w, i + 1 - w));
      if (abbreviations.contains(word)) continue;
    }
    emit(start, j);
    start = k;
    i = k - 1;
  }
  if (start < n) emit(start, n);
  return out;
}

std::vector<Token> tokenize(std::string_view sentence) {
  auto cps = decode_utf8(sentence);
  const std::size_t n = cps.size();
  std::vector<Token> out;
  auto push = [&](std::size_t b, std::size_t e) {
    out.push_back(Token{encode_utf8(std::u32string_view(cps).substr(b, e - b)), b, e});
  };

  std::size_t i = 0;
  while (i < n) {
    if (is_space(cps[i])) {
      ++i;
      continue;
    }
    if (!is_alnum(cps[i])) {
      push(i, i + 1);
      ++i;
      continue;
    }
    std::size_t j = i;
    std::size_t clitic_begin = 0, clitic_end = 0;
    while (j < n) {
      if (is_alnum(cps[j]) || is_mark(cps[j])) {
        ++j;
      } else if (is_hyphen(cps[j]) && j + 1 < n && is_alnum(cps[j + 1])) {
        ++j;
      } else if ((cps[j] == U'.' || cps[j] == U',') && j + 1 < n && is_digit(cps[j - 1]) &&
                 is_digit(cps[j + 1])) {
        ++j;
      } else if (is_apostrophe(cps[j]) && j + 1 < n && is_alnum(cps[j + 1])) {
        std::size_t k = j + 1;
        while (k < n && is_alnum(cps[k])) ++k;
        std::u32string_view after(cps.data() + j + 1, k - j - 1);
        bool negation = (after == U"t" || after == U"T") && j - 1 > i &&
                        ascii_lower(cps[j - 1]) == U'n';
        if (negation) {
          clitic_begin = j - 1;
          clitic_end = k;
          break;
        }
        if (is_clitic(after) && !(after == U"t" || after == U"T")) {
          clitic_begin = j;
          clitic_end = k;
          break;
        }
        j = k;  // internal apostrophe, e.g. O'Brien
      } else {
        break;
      }
    }
    if (clitic_end > 0) {
      push(i, clitic_begin);
      push(clitic_begin, clitic_end);
      i = clitic_end;
    } else {
      push(i, j);
      i = j;
    }
  }
  return out;
}

SentenceRecord make_record(std::string id, std::string text) {
  SentenceRecord r;
  r.id = std::move(id);
  r.text = std::move(text);
  r.tokens = tokenize(r.text);
  return r;
}

void validate(const SentenceRecord& record) {
  auto cps = decode_utf8(record.text);
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < record.tokens.size(); ++i) {
    const auto& t = record.tokens[i];
    if (t.start >= t.end || t.end > cps.size() || (i > 0 && t.start < prev_end)) {
      throw Error("record.invalid", "sentence " + record.id + ": token " + std::to_string(i) +
                                        " has invalid offsets");
    }
    if (encode_utf8(std::u32string_view(cps).substr(t.start, t.end - t.start)) != t.surface) {
      throw Error("record.invalid",
                  "sentence " + record.id + ": token " + std::to_string(i) + " surface mismatch");
    }
    prev_end = t.end;
  }
  for (const auto& [layer, spans] : record.layers) {
    for (const auto& s : spans) {
      if (s.first_token > s.last_token || s.last_token >= record.tokens.size()) {
        throw Error("record.invalid",
                    "sentence " + record.id + ": span in layer " + layer + " out of range");
      }
    }
  }
}

bool is_word(const Token& token) {
  for (char32_t c : decode_utf8(token.surface)) {
    if (is_alnum(c)) return true;
  }
  return false;
}

std::size_t word_count(std::span<const Token> tokens) {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), is_word));
}

}  // namespace debater::text
