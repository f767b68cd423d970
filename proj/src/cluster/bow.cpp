#include <algorithm>
#include <map>
#include <unordered_map>

#include "debater/cluster.hpp"
#include "debater/error.hpp"

namespace debater::cluster {

SparseDocMatrix::SparseDocMatrix(std::vector<std::vector<SparseEntry>> rows,
                                 std::vector<std::string> vocabulary)
    : vocabulary_(std::move(vocabulary)) {
  row_ptr_.reserve(rows.size() + 1);
  row_ptr_.push_back(0);
  row_totals_.reserve(rows.size());
  for (std::size_t d = 0; d < rows.size(); ++d) {
    auto& row = rows[d];
    if (row.empty()) {
      throw Error("bow.empty_document", "document " + std::to_string(d) + " has no terms");
    }
    std::sort(row.begin(), row.end(), [](auto a, auto b) { return a.term < b.term; });
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].count == 0) throw Error("bow.invalid", "zero count in document " + std::to_string(d));
      if (row[i].term >= vocabulary_.size()) {
        throw Error("bow.invalid", "term index out of range in document " + std::to_string(d));
      }
      if (i > 0 && row[i].term == row[i - 1].term) {
        throw Error("bow.invalid", "duplicate term in document " + std::to_string(d));
      }
      total += row[i].count;
      entries_.push_back(row[i]);
    }
    row_ptr_.push_back(entries_.size());
    row_totals_.push_back(total);
  }
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    index_.emplace(vocabulary_[i], static_cast<std::uint32_t>(i));
  }
}

std::int64_t SparseDocMatrix::term_index(const std::string& term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

SparseDocMatrix build_bow(std::span<const std::vector<std::string>> docs, std::size_t min_df,
                          double max_df_fraction) {
  if (docs.empty()) throw Error("bow.empty_corpus", "empty corpus");

  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::vector<std::string_view> seen(doc.begin(), doc.end());
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (auto term : seen) ++df[std::string(term)];
  }

  const double max_df = max_df_fraction * static_cast<double>(docs.size());
  std::vector<std::string> vocabulary;
  for (const auto& [term, count] : df) {
    if (count >= min_df && static_cast<double>(count) <= max_df) vocabulary.push_back(term);
  }
  std::sort(vocabulary.begin(), vocabulary.end());
  std::unordered_map<std::string_view, std::uint32_t> index;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    index.emplace(vocabulary[i], static_cast<std::uint32_t>(i));
  }

  std::vector<std::vector<SparseEntry>> rows(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& term : docs[d]) {
      auto it = index.find(term);
      if (it != index.end()) ++counts[it->second];
    }
    if (counts.empty()) {
      throw Error("bow.empty_document",
                  "document " + std::to_string(d) + " has no terms after vocabulary filtering");
    }
    for (auto [term, count] : counts) rows[d].push_back({term, count});
  }
  return SparseDocMatrix(std::move(rows), std::move(vocabulary));
}

std::vector<std::string> bow_terms(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& token : text::tokenize(text)) {
    if (!text::is_word(token)) continue;
    auto lower = text::lowercase(token.surface);
    if (text::codepoint_length(lower) >= 2) out.push_back(std::move(lower));
  }
  return out;
}

}  // namespace debater::cluster
