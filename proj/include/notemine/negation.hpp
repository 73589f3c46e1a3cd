#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "notemine/io.hpp"
#include "notemine/sectioner.hpp"

namespace notemine {

// NegEx-style trigger lexicon. Four categories: pre-negation triggers scope
// forward, post-negation triggers scope backward, pseudo-negation phrases
// suppress a match, termination terms end a scope.
struct TriggerLexicon {
  std::vector<std::vector<std::string>> pre;
  std::vector<std::vector<std::string>> post;
  std::vector<std::vector<std::string>> pseudo;
  std::vector<std::vector<std::string>> termination;

  static TriggerLexicon bundled();
  static TriggerLexicon load(const fs::path& path);

  std::string serialize() const;
  void save(const fs::path& path) const { write_file(path, serialize()); }

  void validate() const {
    if (pre.empty() || post.empty() || pseudo.empty() || termination.empty())
      throw std::runtime_error("trigger lexicon: empty category");
  }

  // Every token appearing in any pattern. The preprocess stage keeps these
  // visible (even when stoplisted) so triggers still match; negation strips
  // the stoplisted ones again after fusion.
  std::unordered_set<std::string> cue_tokens() const {
    std::unordered_set<std::string> cues;
    for (const auto* cat : {&pre, &post, &pseudo, &termination})
      for (const auto& phrase : *cat)
        for (const auto& tok : phrase) cues.insert(tok);
    return cues;
  }
};

namespace detail {

inline std::vector<std::vector<std::string>> parse_phrases(
    const std::vector<std::string>& lines) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : lines) out.push_back(split_whitespace(to_lower(line)));
  return out;
}

// Triggers that are a lone negator vanish after fusion (the "no_" prefix
// already carries them); multi-word triggers stay in the token stream.
inline bool is_bare_negator(const std::vector<std::string>& phrase) {
  static const std::unordered_set<std::string> bare{"no", "not", "without"};
  return phrase.size() == 1 && bare.count(phrase[0]) > 0;
}

// Function words clipped from the far edge of a scope so fused tokens read
// as concept names. Intentionally small; the full stoplist would eat
// content-ish words like "change" that belong inside fused tokens.
inline const std::unordered_set<std::string>& scope_trim_words() {
  static const std::unordered_set<std::string> words{
      "a",  "an",  "and", "are", "as",  "at", "be", "by", "for", "from",
      "in", "is",  "it",  "of",  "on",  "or", "that", "the", "this", "to",
      "was", "were", "with"};
  return words;
}

}  // namespace detail

inline TriggerLexicon TriggerLexicon::bundled() {
  TriggerLexicon lex;
  lex.pre = detail::parse_phrases({
      "no", "not", "without", "absent", "absence of", "cannot see", "denied",
      "denies", "negative for", "never developed", "no evidence for",
      "no evidence of", "no new evidence of", "no sign of", "no signs of",
      "not demonstrate", "without evidence of", "without indication of",
  });
  lex.post = detail::parse_phrases({
      "free", "has resolved", "have resolved", "is ruled out", "unlikely",
      "was ruled out", "were ruled out",
  });
  lex.pseudo = detail::parse_phrases({
      "gram negative", "no change", "no definite change", "no further",
      "no increase", "no interval change", "no significant change",
      "not certain if", "not certain whether", "without difficulty",
  });
  lex.termination = detail::parse_phrases({
      "although", "but", "except", "however", "though", "which", "yet",
  });
  return lex;
}

inline TriggerLexicon TriggerLexicon::load(const fs::path& path) {
  TriggerLexicon lex;
  std::vector<std::vector<std::string>>* current = nullptr;
  std::size_t lineno = 0;
  for (const auto& raw : read_lines(path)) {
    ++lineno;
    std::string line = trim(raw);
    auto hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line == "[PRE]")
        current = &lex.pre;
      else if (line == "[POST]")
        current = &lex.post;
      else if (line == "[PSEUDO]")
        current = &lex.pseudo;
      else if (line == "[TERM]")
        current = &lex.termination;
      else
        throw std::runtime_error(path.string() + ": line " +
                                 std::to_string(lineno) +
                                 ": unknown category " + line);
      continue;
    }
    if (!current)
      throw std::runtime_error(path.string() + ": line " +
                               std::to_string(lineno) +
                               ": phrase before any category header");
    current->push_back(split_whitespace(to_lower(line)));
  }
  lex.validate();
  return lex;
}

inline std::string TriggerLexicon::serialize() const {
  std::string out;
  auto emit = [&](const char* header,
                  const std::vector<std::vector<std::string>>& phrases) {
    out += header;
    out += '\n';
    for (const auto& p : phrases) {
      out += join(p, " ");
      out += '\n';
    }
  };
  emit("[PRE]", pre);
  out += '\n';
  emit("[POST]", post);
  out += '\n';
  emit("[PSEUDO]", pseudo);
  out += '\n';
  emit("[TERM]", termination);
  return out;
}

struct NegationSpan {
  std::size_t sentence_index = 0;
  std::size_t trigger_begin = 0;  // token offsets into the input sentence
  std::size_t trigger_end = 0;
  std::size_t scope_begin = 0;
  std::size_t scope_end = 0;
  std::string fused_token;
};

struct NegationOptions {
  std::size_t window = 5;
};

// Phrase tables keyed by first token, longest pattern first. Build once,
// share read-only across sentences.
class TriggerIndex {
 public:
  explicit TriggerIndex(const TriggerLexicon& lexicon) : lexicon_(lexicon) {
    build(lexicon.pre, pre_);
    build(lexicon.post, post_);
    build(lexicon.pseudo, pseudo_);
    build(lexicon.termination, term_);
  }

  const TriggerLexicon& lexicon() const { return lexicon_; }

  // Returns the length in tokens of the longest matching pattern, 0 if none.
  std::size_t match_pre(const std::vector<std::string>& t, std::size_t i) const {
    return match(pre_, t, i);
  }
  std::size_t match_post(const std::vector<std::string>& t, std::size_t i) const {
    return match(post_, t, i);
  }
  std::size_t match_pseudo(const std::vector<std::string>& t, std::size_t i) const {
    return match(pseudo_, t, i);
  }
  std::size_t match_term(const std::vector<std::string>& t, std::size_t i) const {
    return match(term_, t, i);
  }

 private:
  using Table = std::unordered_map<std::string, std::vector<std::vector<std::string>>>;

  static void build(const std::vector<std::vector<std::string>>& phrases,
                    Table& table) {
    for (const auto& p : phrases) {
      if (p.empty()) continue;
      table[p[0]].push_back(p);
    }
    for (auto& [_, list] : table)
      std::sort(list.begin(), list.end(),
                [](const auto& a, const auto& b) { return a.size() > b.size(); });
  }

  static std::size_t match(const Table& table, const std::vector<std::string>& t,
                           std::size_t i) {
    if (i >= t.size()) return 0;
    auto it = table.find(t[i]);
    if (it == table.end()) return 0;
    for (const auto& p : it->second) {
      if (i + p.size() > t.size()) continue;
      bool ok = true;
      for (std::size_t k = 1; k < p.size(); ++k)
        if (t[i + k] != p[k]) { ok = false; break; }
      if (ok) return p.size();
    }
    return 0;
  }

  TriggerLexicon lexicon_;
  Table pre_, post_, pseudo_, term_;
};

namespace detail {

struct OutToken {
  std::string text;
  bool scopeable;  // plain content token, may be absorbed by a backward scope
};

inline std::string fuse(const std::vector<std::string>& scope) {
  return "no_" + join(scope, "_");
}

}  // namespace detail

// Core negation pass over one normalized sentence. Pre-negation triggers
// fuse the following tokens (up to the window, a termination term, or the
// next negation trigger) into one "no_..." token; post-negation triggers do
// the same looking backward. Pseudo-negation phrases pass through untouched.
inline std::vector<std::string> detect_and_fuse(
    const std::vector<std::string>& sentence, const TriggerIndex& index,
    const NegationOptions& opt = {}, std::vector<NegationSpan>* spans = nullptr,
    std::size_t sentence_index = 0) {
  const std::size_t n = sentence.size();
  std::vector<detail::OutToken> out;
  out.reserve(n);

  auto emit_plain = [&](std::size_t i) { out.push_back({sentence[i], true}); };
  auto emit_fixed = [&](std::size_t i) { out.push_back({sentence[i], false}); };

  std::size_t i = 0;
  while (i < n) {
    std::size_t pseudo_len = index.match_pseudo(sentence, i);
    std::size_t pre_len = index.match_pre(sentence, i);
    std::size_t post_len = index.match_post(sentence, i);

    if (pseudo_len > 0 && pseudo_len >= pre_len && pseudo_len >= post_len) {
      for (std::size_t k = 0; k < pseudo_len; ++k) emit_fixed(i + k);
      i += pseudo_len;
      continue;
    }

    if (pre_len > 0 && pre_len >= post_len) {
      std::size_t scope_begin = i + pre_len;
      std::size_t j = scope_begin;
      std::size_t term_len = 0;
      while (j < n && j - scope_begin < opt.window) {
        term_len = index.match_term(sentence, j);
        if (term_len > 0) break;
        if (index.match_pre(sentence, j) > 0 ||
            index.match_pseudo(sentence, j) > 0)
          break;  // the next negation context starts here
        ++j;
      }
      std::vector<std::string> scope(sentence.begin() + scope_begin,
                                     sentence.begin() + j);
      while (!scope.empty() && detail::scope_trim_words().count(scope.back()))
        scope.pop_back();

      if (scope.empty()) {
        for (std::size_t k = 0; k < pre_len; ++k) emit_fixed(i + k);
        i += pre_len;
        continue;
      }

      bool bare = detail::is_bare_negator(
          {sentence.begin() + i, sentence.begin() + i + pre_len});
      if (!bare)
        for (std::size_t k = 0; k < pre_len; ++k) emit_fixed(i + k);
      std::string fused = detail::fuse(scope);
      if (spans)
        spans->push_back({sentence_index, i, i + pre_len, scope_begin,
                          scope_begin + scope.size(), fused});
      out.push_back({std::move(fused), false});
      i = j + term_len;  // a terminating term is consumed with the scope
      continue;
    }

    if (post_len > 0) {
      std::size_t taken = 0;
      while (taken < out.size() && taken < opt.window &&
             out[out.size() - 1 - taken].scopeable)
        ++taken;
      std::vector<std::string> scope;
      for (std::size_t k = out.size() - taken; k < out.size(); ++k)
        scope.push_back(out[k].text);
      while (!scope.empty() && detail::scope_trim_words().count(scope.front()))
        scope.erase(scope.begin());

      if (scope.empty()) {
        for (std::size_t k = 0; k < post_len; ++k) emit_fixed(i + k);
        i += post_len;
        continue;
      }

      out.resize(out.size() - scope.size());
      std::string fused = detail::fuse(scope);
      if (spans)
        spans->push_back({sentence_index, i, i + post_len, i - scope.size(), i,
                          fused});
      out.push_back({std::move(fused), false});
      bool bare = detail::is_bare_negator(
          {sentence.begin() + i, sentence.begin() + i + post_len});
      if (!bare)
        for (std::size_t k = 0; k < post_len; ++k) emit_fixed(i + k);
      i += post_len;
      continue;
    }

    if (std::size_t term_len = index.match_term(sentence, i); term_len > 0) {
      // termination terms stay put; they just block backward scopes
      for (std::size_t k = 0; k < term_len; ++k) emit_fixed(i + k);
      i += term_len;
      continue;
    }

    emit_plain(i);
    ++i;
  }

  std::vector<std::string> result;
  result.reserve(out.size());
  for (auto& t : out) result.push_back(std::move(t.text));
  return result;
}

inline std::vector<std::string> detect_and_fuse(
    const std::vector<std::string>& sentence, const TriggerLexicon& lexicon,
    const NegationOptions& opt = {}, std::vector<NegationSpan>* spans = nullptr,
    std::size_t sentence_index = 0) {
  TriggerIndex index(lexicon);
  return detect_and_fuse(sentence, index, opt, spans, sentence_index);
}

// After fusion, cue words that the preprocess stage spared only for the
// negation pass lose their reason to exist; drop the ones the stoplist
// would have removed. Fused tokens are never touched (underscores make
// them distinct strings).
inline std::vector<std::string> strip_residual_cues(
    const std::vector<std::string>& tokens, const Stoplist& stoplist,
    const std::unordered_set<std::string>& cue_tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (cue_tokens.count(t) && stoplist.contains(t)) continue;
    out.push_back(t);
  }
  return out;
}

// Whole-document negation: fuse per sentence, then sweep residual cues.
// Sentences emptied by the sweep disappear; a document emptied here counts
// as dropped at the "emptied" funnel stage.
inline TokenizedDoc negate_doc(const TokenizedDoc& doc, const TriggerIndex& index,
                               const Stoplist& stoplist,
                               const std::unordered_set<std::string>& cue_tokens,
                               const NegationOptions& opt = {},
                               std::vector<NegationSpan>* spans = nullptr) {
  TokenizedDoc out;
  out.note_id = doc.note_id;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    auto fused = detect_and_fuse(doc.sentences[s], index, opt, spans, s);
    auto swept = strip_residual_cues(fused, stoplist, cue_tokens);
    if (!swept.empty()) out.sentences.push_back(std::move(swept));
  }
  return out;
}

}  // namespace notemine
