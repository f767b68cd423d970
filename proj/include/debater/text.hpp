#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace debater::text {

// Offsets are Unicode scalar values into the owning sentence, end exclusive.
struct Token {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

struct AnnotationSpan {
  std::size_t first_token = 0;
  std::size_t last_token = 0;  // inclusive
  std::string tag;

  bool operator==(const AnnotationSpan&) const = default;
};

struct SentenceRecord {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  std::map<std::string, std::vector<AnnotationSpan>> layers;

  bool operator==(const SentenceRecord&) const = default;
};

inline constexpr std::string_view kConceptLayer = "CONCEPT";

class AbbreviationList {
 public:
  AbbreviationList() = default;
  // One entry per line, trailing period included. Blank lines and '#' comments
  // are skipped.
  static AbbreviationList parse(std::string_view contents);
  static const AbbreviationList& bundled();

  bool contains(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
};

std::vector<std::string> split_sentences(std::string_view text);
std::vector<std::string> split_sentences(std::string_view text, const AbbreviationList& abbreviations);

std::vector<Token> tokenize(std::string_view sentence);

SentenceRecord make_record(std::string id, std::string text);

// Throws debater::Error("record.invalid") when offsets, surfaces or layer
// spans disagree with the text.
void validate(const SentenceRecord& record);

// A word token carries at least one letter or digit; punctuation tokens do not.
bool is_word(const Token& token);
std::size_t word_count(std::span<const Token> tokens);

// UTF-8 helpers. Invalid sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);
std::size_t codepoint_length(std::string_view text);
// Substring by codepoint offsets [start, end).
std::string slice(std::string_view text, std::size_t start, std::size_t end);

std::string lowercase(std::string_view text);
std::string casefold(std::string_view text);
std::string nfc(std::string_view text);
// Uppercases the first letter when it is lowercase; everything else untouched.
std::string capitalize_first(std::string_view text);
bool starts_uppercase(std::string_view text);

std::string trim(std::string_view text);
std::string collapse_whitespace(std::string_view text);

// Lines of a data file with trailing CR stripped, blanks and '#' comments removed.
std::vector<std::string> data_lines(std::string_view contents);

}  // namespace debater::text
