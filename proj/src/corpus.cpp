#include "topictrace/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "topictrace/errors.hpp"
#include "topictrace/parallel.hpp"

namespace topictrace {

std::string_view to_string(Role role) { return role == Role::reading ? "reading" : "writing"; }

Role parse_role(std::string_view text) {
  if (text == "reading") return Role::reading;
  if (text == "writing") return Role::writing;
  throw InvalidArgument("role must be 'reading' or 'writing', got '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;  // physical line where the record starts
};

// RFC 4180 records: quoted fields may hold commas, "" escapes and newlines.
std::vector<CsvRecord> parse_csv(std::string_view text) {
  std::vector<CsvRecord> records;
  std::size_t line = 1;
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  while (i < text.size()) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    bool done = false;
    while (!done) {
      if (i >= text.size()) {
        if (in_quotes) throw ParseError("unterminated quoted field", rec.line);
        rec.fields.push_back(std::move(field));
        break;
      }
      const char c = text[i++];
      if (in_quotes) {
        if (c == '"') {
          if (i < text.size() && text[i] == '"') {
            field.push_back('"');
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
        }
      } else if (c == '"') {
        if (!field.empty() || was_quoted)
          throw ParseError("unexpected quote inside unquoted field", line);
        in_quotes = true;
        was_quoted = true;
      } else if (c == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && i < text.size() && text[i] == '\n') ++i;
        ++line;
        rec.fields.push_back(std::move(field));
        done = true;
      } else {
        if (was_quoted) throw ParseError("characters after closing quote", line);
        field.push_back(c);
      }
    }
    const bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

Manifest parse_manifest(std::string_view csv_text, const std::filesystem::path& base_dir) {
  const auto records = parse_csv(csv_text);
  if (records.empty()) throw ParseError("empty manifest", 1);
  static const std::vector<std::string> kHeader = {"doc_id", "path", "title", "role", "date"};
  if (records[0].fields != kHeader)
    throw ParseError("header must be 'doc_id,path,title,role,date'", records[0].line);

  Manifest manifest;
  std::map<std::string, std::size_t> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != kHeader.size())
      throw ParseError("expected 5 fields, found " + std::to_string(rec.fields.size()), rec.line);
    ManifestEntry e;
    e.doc_id = rec.fields[0];
    if (e.doc_id.empty()) throw ParseError("empty doc_id", rec.line);
    if (auto [it, inserted] = seen.emplace(e.doc_id, rec.line); !inserted)
      throw DuplicateId("line " + std::to_string(rec.line) + ": doc_id '" + e.doc_id +
                        "' already used on line " + std::to_string(it->second));
    e.path = rec.fields[1];
    if (e.path.is_relative()) e.path = base_dir / e.path;
    e.title = rec.fields[2];
    try {
      e.role = parse_role(rec.fields[3]);
    } catch (const InvalidArgument& err) {
      throw ParseError(err.what(), rec.line);
    }
    try {
      e.date = Date::parse(rec.fields[4]);
    } catch (const BadDate& err) {
      throw BadDate("line " + std::to_string(rec.line) + ": " + err.what());
    }
    std::error_code ec;
    if (!std::filesystem::is_regular_file(e.path, ec) || !std::ifstream(e.path))
      throw MissingFile("line " + std::to_string(rec.line) + " (doc_id '" + e.doc_id +
                        "'): cannot read " + e.path.string());
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot read manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

bool is_letter(char32_t c) {
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return true;
  if (c == 0xAA || c == 0xB5 || c == 0xBA) return true;
  if (c >= 0xC0 && c <= 0x24F) return c != 0xD7 && c != 0xF7;
  if (c >= 0x370 && c <= 0x3FF)
    return c == 0x386 || (c >= 0x388 && c <= 0x3FF && c != 0x38B && c != 0x38D && c != 0x3A2 &&
                          c != 0x3F6);
  return c >= 0x400 && c <= 0x4FF && !(c >= 0x482 && c <= 0x489);
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c >= 0x100 && c <= 0x17F) {
    // Latin Extended-A pairs upper/lower on adjacent code points, with the
    // parity flipping between U+0138 and U+0149.
    if (c == 0x130 || c == 0x138 || c == 0x149 || c == 0x17F) return c == 0x130 ? 'i' : c;
    if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
    if (c == 0x178) return 0xFF;
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  return c;
}

void append_utf8(std::string& out, char32_t c) {
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

// Decodes one code point; malformed bytes decode to U+FFFD and consume one byte.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  std::size_t len = b0 >= 0xF0 ? 4 : b0 >= 0xE0 ? 3 : b0 >= 0xC0 ? 2 : 0;
  if (len == 0 || i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  char32_t c = b0 & (0x7F >> len);
  for (std::size_t j = 1; j < len; ++j) {
    const auto b = static_cast<unsigned char>(s[i + j]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    c = (c << 6) | (b & 0x3F);
  }
  i += len;
  return c;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& rules) {
  std::vector<std::string> out;
  std::string current;
  std::size_t length = 0;
  auto flush = [&] {
    if (length >= rules.min_len && !rules.stoplist.contains(current)) out.push_back(current);
    current.clear();
    length = 0;
  };
  for (std::size_t i = 0; i < text.size();) {
    const char32_t c = next_code_point(text, i);
    if (is_letter(c)) {
      append_utf8(current, to_lower(c));
      ++length;
    } else if (length > 0) {
      flush();
    }
  }
  if (length > 0) flush();
  return out;
}

std::unordered_set<std::string> load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot read stoplist " + path.string());
  std::unordered_set<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    terms.insert(line);
  }
  return terms;
}

TokenizerConfig TokenizerConfig::english_default() {
  const auto words = default_stoplist();
  return {3, std::unordered_set<std::string>(words.begin(), words.end())};
}

// ---------------------------------------------------------------------------
// Vocabulary and encoding

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (!index_.emplace(terms_[i], static_cast<WordId>(i)).second)
      throw InvalidArgument("duplicate vocabulary term '" + terms_[i] + "'");
}

std::optional<WordId> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> token_lists,
                            std::size_t min_count) {
  if (min_count < 1) throw InvalidArgument("min_count must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& tokens : token_lists)
    for (const auto& t : tokens) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [term, n] : counts)
    if (n >= min_count) kept.emplace_back(term, n);
  if (kept.empty())
    throw EmptyVocabulary("no term occurs at least " + std::to_string(min_count) +
                          " times in the readings");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> terms;
  terms.reserve(kept.size());
  for (auto& [term, n] : kept) terms.push_back(std::move(term));
  return Vocabulary(std::move(terms));
}

Document encode(std::span<const std::string> terms, const Vocabulary& vocab, std::string doc_id,
                DocumentMeta meta) {
  if (vocab.empty()) throw EmptyVocabulary("cannot encode against an empty vocabulary");
  Document doc{std::move(doc_id), {}, std::move(meta)};
  doc.tokens.reserve(terms.size());
  for (const auto& t : terms)
    if (auto id = vocab.find(t)) doc.tokens.push_back(*id);
  if (doc.tokens.empty())
    throw EmptyDocument("document '" + doc.doc_id + "' has no in-vocabulary tokens");
  return doc;
}

std::vector<std::string> decode(const Document& doc, const Vocabulary& vocab) {
  std::vector<std::string> terms;
  terms.reserve(doc.tokens.size());
  for (WordId w : doc.tokens) terms.push_back(vocab.term(w));
  return terms;
}

std::vector<Document> Corpus::with_role(Role role) const {
  std::vector<Document> out;
  for (const auto& d : documents)
    if (d.meta.role == role) out.push_back(d);
  return out;
}

const Document* Corpus::find(std::string_view doc_id) const {
  for (const auto& d : documents)
    if (d.doc_id == doc_id) return &d;
  return nullptr;
}

std::size_t Corpus::total_tokens() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.tokens.size();
  return n;
}

Corpus ingest(const Manifest& manifest, const TokenizerConfig& rules, std::size_t min_count,
              unsigned threads) {
  const auto& entries = manifest.entries;
  std::vector<std::vector<std::string>> tokens(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    std::ifstream in(entries[i].path, std::ios::binary);
    if (!in)
      throw MissingFile("doc_id '" + entries[i].doc_id + "': cannot read " +
                        entries[i].path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    tokens[i] = tokenize(ss.str(), rules);
  });

  std::vector<std::vector<std::string>> reading_tokens;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].role == Role::reading) reading_tokens.push_back(tokens[i]);
  if (reading_tokens.empty()) throw EmptyCorpus("manifest lists no readings");

  Corpus corpus;
  corpus.vocabulary = build_vocabulary(reading_tokens, min_count);
  corpus.documents.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    corpus.documents.push_back(
        encode(tokens[i], corpus.vocabulary, e.doc_id, {e.title, e.role, e.date}));
  }
  return corpus;
}

}  // namespace topictrace
