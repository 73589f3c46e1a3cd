#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "notemine/corpus.hpp"
#include "notemine/io.hpp"

namespace notemine {

// ---------------------------------------------------------------------------
// Stoplist

class Stoplist {
 public:
  Stoplist() = default;
  explicit Stoplist(std::vector<std::string> words) {
    for (auto& w : words) words_.insert(to_lower(trim(w)));
    words_.erase("");
  }

  static Stoplist load(const fs::path& path) {
    std::vector<std::string> words;
    for (const auto& line : read_lines(path)) {
      std::string w = trim(line);
      auto hash = w.find('#');
      if (hash != std::string::npos) w = trim(w.substr(0, hash));
      if (!w.empty()) words.push_back(w);
    }
    return Stoplist(std::move(words));
  }

  // Common English stop words plus generic EHR boilerplate terms treated
  // the same way. Mirrors data/stoplist.txt.
  static const Stoplist& bundled();

  bool contains(const std::string& w) const { return words_.count(w) > 0; }
  std::size_t size() const { return words_.size(); }

  void insert(const std::string& w) { words_.insert(w); }
  void erase(const std::string& w) { words_.erase(w); }

  // Copy with the given tokens removed. The pipeline uses this to keep
  // negation cue words visible to the negation stage.
  Stoplist without(const std::unordered_set<std::string>& spare) const {
    Stoplist s = *this;
    for (const auto& w : spare) s.words_.erase(w);
    return s;
  }

  const std::unordered_set<std::string>& words() const { return words_; }

 private:
  std::unordered_set<std::string> words_;
};

namespace detail {

inline const char* const kEnglishStopwords[] = {
    "a", "able", "about", "across", "after", "all", "almost", "also", "am",
    "among", "an", "and", "any", "are", "as", "at", "be", "because", "been",
    "but", "by", "can", "cannot", "could", "dear", "did", "do", "does",
    "either", "else", "ever", "every", "for", "from", "get", "got", "had",
    "has", "have", "he", "her", "hers", "him", "his", "how", "however", "i",
    "if", "in", "into", "is", "it", "its", "just", "least", "let", "like",
    "likely", "may", "me", "might", "most", "must", "my", "neither", "no",
    "nor", "not", "of", "off", "often", "on", "only", "or", "other", "our",
    "own", "rather", "said", "say", "says", "she", "should", "since", "so",
    "some", "than", "that", "the", "their", "them", "then", "there", "these",
    "they", "this", "tis", "to", "too", "twas", "us", "wants", "was", "we",
    "were", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "without", "would", "yet", "you", "your"};

// Generic words commonly found in procedure notes, removed like ordinary
// stop words.
inline const char* const kGenericEhrWords[] = {
    "personalname", "alphanumericid", "examination", "preliminary",
    "impression", "chest", "view", "change", "final", "available",
    "evidence", "see", "right", "stable", "date", "compare",
    "interpretation", "portable", "lung", "leave", "report", "process",
    "review", "resident", "radiologist", "attend", "finding", "electronic",
    "sign"};

}  // namespace detail

inline const Stoplist& Stoplist::bundled() {
  static const Stoplist s = [] {
    std::vector<std::string> words;
    for (const char* w : detail::kEnglishStopwords) words.push_back(w);
    for (const char* w : detail::kGenericEhrWords) words.push_back(w);
    return Stoplist(std::move(words));
  }();
  return s;
}

// ---------------------------------------------------------------------------
// Section parsing

struct SectionSpan {
  std::string label;        // EXAM, FINDINGS, IMPRESSION or OTHER
  std::size_t begin = 0;    // byte offsets into raw_text
  std::size_t end = 0;
  std::string text;         // raw_text.substr(begin, end - begin)
};

struct ParsedNote {
  std::string note_id;
  std::vector<SectionSpan> sections;

  const SectionSpan* find(const std::string& label) const {
    for (const auto& s : sections)
      if (s.label == label) return &s;
    return nullptr;
  }
};

struct SectionerOptions {
  std::vector<std::string> labels{"EXAM", "FINDINGS", "IMPRESSION"};
};

namespace detail {

inline bool label_matches(const std::string& text, std::size_t pos,
                          const std::string& label) {
  if (pos + label.size() > text.size()) return false;
  for (std::size_t i = 0; i < label.size(); ++i) {
    char a = static_cast<char>(
        std::toupper(static_cast<unsigned char>(text[pos + i])));
    if (a != label[i]) return false;
  }
  // Reject prefixes of longer words (EXAM inside EXAMINATION).
  std::size_t after = pos + label.size();
  if (after < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[after]);
    if (std::isalnum(c) || c == '_') return false;
  }
  return true;
}

struct LabelHit {
  std::size_t pos;            // where the label text starts
  std::size_t content_begin;  // after label, optional colon and spacing
  std::string label;
};

inline std::vector<LabelHit> find_labels(const std::string& text,
                                         const SectionerOptions& opt) {
  std::vector<LabelHit> hits;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i > 0 && !std::isspace(static_cast<unsigned char>(text[i - 1])))
      continue;  // label must sit at line start or after whitespace
    for (const auto& label : opt.labels) {
      if (!label_matches(text, i, label)) continue;
      std::size_t j = i + label.size();
      if (j < text.size() && text[j] == ':') ++j;
      while (j < text.size() &&
             std::isspace(static_cast<unsigned char>(text[j])))
        ++j;
      hits.push_back({i, j, label});
      break;
    }
  }
  return hits;
}

inline std::size_t rtrim_offset(const std::string& text, std::size_t begin,
                                std::size_t end) {
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1])))
    --end;
  return end;
}

}  // namespace detail

// Parses the section structure of a note. Returns nothing when the note
// has no IMPRESSION section; that is the normal drop path, not an error.
inline std::optional<ParsedNote> extract_impression(
    const ClinicalNote& note, const SectionerOptions& opt = {}) {
  auto hits = detail::find_labels(note.raw_text, opt);
  bool has_impression = false;
  for (const auto& h : hits)
    if (h.label == "IMPRESSION") has_impression = true;
  if (!has_impression) return std::nullopt;

  ParsedNote parsed;
  parsed.note_id = note.note_id;
  if (!hits.empty() && hits.front().pos > 0) {
    std::size_t end = detail::rtrim_offset(note.raw_text, 0, hits.front().pos);
    if (end > 0)
      parsed.sections.push_back(
          {"OTHER", 0, end, note.raw_text.substr(0, end)});
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    std::size_t begin = hits[i].content_begin;
    std::size_t end =
        i + 1 < hits.size() ? hits[i + 1].pos : note.raw_text.size();
    end = detail::rtrim_offset(note.raw_text, begin, end);
    if (end < begin) end = begin;
    parsed.sections.push_back({hits[i].label, begin, end,
                               note.raw_text.substr(begin, end - begin)});
  }
  return parsed;
}

// ---------------------------------------------------------------------------
// Sentence splitting

// Splits on ., !, ?, ; and newlines. A period between two digits is part
// of a decimal number. Bare list markers ("1.", "2.") do not survive as
// sentences of their own.
inline std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> pieces;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool boundary = false;
    if (c == '!' || c == '?' || c == ';' || c == '\n') {
      boundary = true;
    } else if (c == '.') {
      bool digit_before =
          i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]));
      bool digit_after = i + 1 < text.size() &&
                         std::isdigit(static_cast<unsigned char>(text[i + 1]));
      boundary = !(digit_before && digit_after);
    }
    if (boundary) {
      pieces.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  pieces.push_back(cur);

  std::vector<std::string> sentences;
  for (auto& p : pieces) {
    std::string t = trim(p);
    if (t.empty()) continue;
    bool marker_only = std::all_of(t.begin(), t.end(), [](char c) {
      return std::isdigit(static_cast<unsigned char>(c));
    });
    if (marker_only) continue;
    sentences.push_back(t);
  }
  return sentences;
}

// ---------------------------------------------------------------------------
// Token normalization

struct NormalizeOptions {
  bool split_hyphens = false;  // default deletes intra-word punctuation
  bool stem = false;           // light suffix stripping
};

namespace detail {

inline bool has_vowel(const std::string& w) {
  for (char c : w)
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
  return false;
}

// Light suffix stripper, iterated to a fixed point so normalization stays
// idempotent. Deliberately conservative; not a full stemmer.
inline std::string strip_suffixes(std::string w) {
  auto ends = [&](const char* suf) {
    std::size_t n = std::char_traits<char>::length(suf);
    return w.size() >= n && w.compare(w.size() - n, n, suf) == 0;
  };
  for (;;) {
    std::string before = w;
    if (ends("sses")) {
      w.erase(w.size() - 2);
    } else if (ends("ies") && w.size() > 4) {
      w.erase(w.size() - 3);
      w += 'y';
    } else if (ends("ss")) {
      // keep
    } else if (ends("s") && w.size() > 3) {
      w.pop_back();
    }
    if (ends("ing") && w.size() > 5 && has_vowel(w.substr(0, w.size() - 3))) {
      w.erase(w.size() - 3);
    } else if (ends("ed") && w.size() > 4 &&
               has_vowel(w.substr(0, w.size() - 2))) {
      w.erase(w.size() - 2);
    } else if (ends("ly") && w.size() > 4 &&
               has_vowel(w.substr(0, w.size() - 2))) {
      w.erase(w.size() - 2);
    }
    if (w == before) return w;
  }
}

inline void clean_token(const std::string& raw, bool split_hyphens,
                        std::vector<std::string>& out) {
  std::vector<std::string> parts;
  if (split_hyphens) {
    std::string cur;
    for (char c : raw) {
      if (c == '-') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    parts.push_back(cur);
  } else {
    parts.push_back(raw);
  }
  for (const auto& part : parts) {
    std::string t;
    for (char c : part) {
      unsigned char u = static_cast<unsigned char>(c);
      if (u >= 0x80) {
        t.push_back(c);  // leave multi-byte sequences alone
      } else if (std::isalpha(u)) {
        t.push_back(static_cast<char>(std::tolower(u)));
      } else if (c == '_') {
        t.push_back(c);
      }
      // digits and remaining punctuation are dropped
    }
    if (!t.empty()) out.push_back(t);
  }
}

}  // namespace detail

// Lowercases, strips digits and punctuation (underscores survive so fused
// tokens pass through re-normalization), then drops stoplist tokens.
// Idempotent: normalize(normalize(x)) == normalize(x).
inline std::vector<std::string> normalize(const std::vector<std::string>& tokens,
                                          const Stoplist& stoplist,
                                          const NormalizeOptions& opt = {}) {
  std::vector<std::string> out;
  for (const auto& raw : tokens) {
    std::vector<std::string> cleaned;
    detail::clean_token(raw, opt.split_hyphens, cleaned);
    for (auto& t : cleaned) {
      if (opt.stem && t.find('_') == std::string::npos)
        t = detail::strip_suffixes(t);
      if (t.empty() || stoplist.contains(t)) continue;
      out.push_back(t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-note preprocessing

struct TokenizedDoc {
  std::string note_id;
  std::vector<std::vector<std::string>> sentences;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
  std::vector<std::string> flat_tokens() const {
    std::vector<std::string> out;
    for (const auto& s : sentences)
      out.insert(out.end(), s.begin(), s.end());
    return out;
  }
};

enum class PreprocessOutcome { ok, no_impression, emptied };

inline PreprocessOutcome preprocess_note(const ClinicalNote& note,
                                         const Stoplist& stoplist,
                                         const NormalizeOptions& nopt,
                                         TokenizedDoc& out,
                                         const SectionerOptions& sopt = {},
                                         std::string* impression = nullptr) {
  auto parsed = extract_impression(note, sopt);
  if (!parsed) return PreprocessOutcome::no_impression;
  const SectionSpan* span = parsed->find("IMPRESSION");
  if (impression) *impression = span->text;

  out.note_id = note.note_id;
  out.sentences.clear();
  for (const auto& sentence : split_sentences(span->text)) {
    auto tokens = normalize(split_whitespace(sentence), stoplist, nopt);
    if (!tokens.empty()) out.sentences.push_back(std::move(tokens));
  }
  return out.sentences.empty() ? PreprocessOutcome::emptied
                               : PreprocessOutcome::ok;
}

// ---------------------------------------------------------------------------
// Tokenized-doc artifact, one JSON object per line

inline void save_tokenized_jsonl(const fs::path& path,
                                 const std::vector<TokenizedDoc>& docs) {
  std::string out;
  for (const auto& d : docs) {
    nlohmann::json j{{"note_id", d.note_id}, {"sentences", d.sentences}};
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

inline std::vector<TokenizedDoc> load_tokenized_jsonl(const fs::path& path) {
  std::vector<TokenizedDoc> docs;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error(path.string() + ": line " +
                               std::to_string(lineno) + ": malformed JSON");
    TokenizedDoc d;
    d.note_id = j.at("note_id").get<std::string>();
    d.sentences =
        j.at("sentences").get<std::vector<std::vector<std::string>>>();
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace notemine
