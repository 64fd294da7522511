#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "topictrace/date.hpp"

namespace topictrace {

enum class Role { reading, writing };

std::string_view to_string(Role role);
// Throws InvalidArgument for anything but "reading" / "writing".
Role parse_role(std::string_view text);

struct ManifestEntry {
  std::string doc_id;
  std::filesystem::path path;
  std::string title;
  Role role = Role::reading;
  Date date;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// CSV with header `doc_id,path,title,role,date`. Relative paths resolve
// against `base_dir`. Throws ParseError, DuplicateId, MissingFile, BadDate.
Manifest parse_manifest(std::string_view csv_text, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

struct TokenizerConfig {
  std::size_t min_len = 3;
  std::unordered_set<std::string> stoplist;

  // min_len 3 with the bundled English stoplist.
  static TokenizerConfig english_default();
};

// Terms of the bundled English stoplist, in file order.
std::span<const std::string> default_stoplist();
// One term per line; blank lines and lines starting with '#' are skipped.
std::unordered_set<std::string> load_stoplist(const std::filesystem::path& path);

// Lowercased alphabetic runs of UTF-8 text. Letters are ASCII plus the Latin-1,
// Latin Extended-A/B, Greek and Cyrillic blocks; everything else separates
// tokens. Length is counted in code points.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& rules);

using WordId = std::uint32_t;

class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws InvalidArgument on duplicate terms.
  explicit Vocabulary(std::vector<std::string> terms);

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const std::string& term(WordId id) const { return terms_.at(id); }
  std::optional<WordId> find(std::string_view term) const;
  const std::vector<std::string>& terms() const noexcept { return terms_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, WordId> index_;
};

// Terms with at least min_count occurrences, by descending frequency then
// byte-wise lexicographic order. Throws EmptyVocabulary, InvalidArgument.
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> token_lists,
                            std::size_t min_count);

struct DocumentMeta {
  std::string title;
  Role role = Role::reading;
  Date date;

  friend bool operator==(const DocumentMeta&, const DocumentMeta&) = default;
};

struct Document {
  std::string doc_id;
  std::vector<WordId> tokens;
  DocumentMeta meta;

  friend bool operator==(const Document&, const Document&) = default;
};

// Out-of-vocabulary terms are dropped. Throws EmptyDocument if none remain.
Document encode(std::span<const std::string> terms, const Vocabulary& vocab, std::string doc_id,
                DocumentMeta meta);
std::vector<std::string> decode(const Document& doc, const Vocabulary& vocab);

struct Corpus {
  Vocabulary vocabulary;
  std::vector<Document> documents;

  std::vector<Document> with_role(Role role) const;
  const Document* find(std::string_view doc_id) const;
  std::size_t total_tokens() const;
};

// Tokenizes every manifest file (in parallel), builds the vocabulary from the
// readings only and encodes all documents against it.
Corpus ingest(const Manifest& manifest, const TokenizerConfig& rules, std::size_t min_count,
              unsigned threads = 1);

}  // namespace topictrace
