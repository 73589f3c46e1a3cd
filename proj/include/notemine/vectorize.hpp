#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "notemine/io.hpp"
#include "notemine/sectioner.hpp"

namespace notemine {

// ---------------------------------------------------------------------------
// Collocation detection

struct PhraseOptions {
  std::uint32_t min_count = 5;
  double threshold = 10.0;
  int passes = 1;  // a second pass builds trigrams out of fused bigrams
};

namespace detail {

struct PairHash {
  std::size_t operator()(const std::pair<std::string, std::string>& p) const {
    std::size_t h = std::hash<std::string>{}(p.first);
    return h ^ (std::hash<std::string>{}(p.second) + 0x9e3779b97f4a7c15ULL +
                (h << 6) + (h >> 2));
  }
};

}  // namespace detail

// Bigram collocation score: (count(ab) - min_count) * N / (count(a)*count(b)).
// Pairs scoring at or above the threshold fuse into "a_b" in one greedy
// left-to-right pass per sentence. Adjacency never crosses sentence bounds.
inline std::vector<TokenizedDoc> detect_phrases(
    const std::vector<TokenizedDoc>& docs, const PhraseOptions& opt = {}) {
  std::vector<TokenizedDoc> cur = docs;
  for (int pass = 0; pass < opt.passes; ++pass) {
    std::unordered_map<std::string, std::uint64_t> unigram;
    std::unordered_map<std::pair<std::string, std::string>, std::uint64_t,
                       detail::PairHash>
        bigram;
    std::uint64_t total = 0;
    for (const auto& d : cur) {
      for (const auto& sent : d.sentences) {
        for (std::size_t i = 0; i < sent.size(); ++i) {
          ++unigram[sent[i]];
          ++total;
          if (i + 1 < sent.size()) ++bigram[{sent[i], sent[i + 1]}];
        }
      }
    }

    auto score = [&](const std::string& a, const std::string& b) -> double {
      auto it = bigram.find({a, b});
      if (it == bigram.end()) return 0.0;
      double ab = static_cast<double>(it->second);
      double ca = static_cast<double>(unigram.at(a));
      double cb = static_cast<double>(unigram.at(b));
      return (ab - static_cast<double>(opt.min_count)) *
             static_cast<double>(total) / (ca * cb);
    };

    bool fused_any = false;
    std::vector<TokenizedDoc> next;
    next.reserve(cur.size());
    for (const auto& d : cur) {
      TokenizedDoc nd;
      nd.note_id = d.note_id;
      for (const auto& sent : d.sentences) {
        std::vector<std::string> out;
        std::size_t i = 0;
        while (i < sent.size()) {
          if (i + 1 < sent.size() &&
              score(sent[i], sent[i + 1]) >= opt.threshold) {
            out.push_back(sent[i] + "_" + sent[i + 1]);
            fused_any = true;
            i += 2;
          } else {
            out.push_back(sent[i]);
            ++i;
          }
        }
        nd.sentences.push_back(std::move(out));
      }
      next.push_back(std::move(nd));
    }
    cur = std::move(next);
    if (!fused_any) break;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Vocabulary and sparse corpus

struct Vocabulary {
  std::unordered_map<std::string, std::uint32_t> term_to_id;
  std::vector<std::string> terms;   // id -> term
  std::vector<std::uint32_t> df;    // id -> document frequency

  std::size_t size() const { return terms.size(); }

  std::uint32_t id(const std::string& term) const {
    auto it = term_to_id.find(term);
    if (it == term_to_id.end())
      throw std::runtime_error("unknown term: " + term);
    return it->second;
  }
  bool has(const std::string& term) const { return term_to_id.count(term) > 0; }
};

struct SparseCorpus {
  std::vector<std::string> note_ids;
  // per doc, (term id, count), term ids strictly increasing
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> counts;
  // per doc, (term id, tfidf weight); empty until tfidf() runs
  std::vector<std::vector<std::pair<std::uint32_t, double>>> weights;

  std::size_t num_docs() const { return counts.size(); }
};

inline std::pair<Vocabulary, SparseCorpus> build_vocabulary(
    const std::vector<TokenizedDoc>& docs) {
  if (docs.empty()) throw std::runtime_error("empty corpus");
  Vocabulary vocab;
  SparseCorpus corpus;
  for (const auto& d : docs) {
    std::unordered_map<std::uint32_t, std::uint32_t> tally;
    for (const auto& sent : d.sentences) {
      for (const auto& tok : sent) {
        auto it = vocab.term_to_id.find(tok);
        std::uint32_t id;
        if (it == vocab.term_to_id.end()) {
          id = static_cast<std::uint32_t>(vocab.terms.size());
          vocab.term_to_id.emplace(tok, id);
          vocab.terms.push_back(tok);
          vocab.df.push_back(0);
        } else {
          id = it->second;
        }
        ++tally[id];
      }
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> row(tally.begin(),
                                                             tally.end());
    std::sort(row.begin(), row.end());
    for (const auto& [id, _] : row) ++vocab.df[id];
    corpus.note_ids.push_back(d.note_id);
    corpus.counts.push_back(std::move(row));
  }
  return {std::move(vocab), std::move(corpus)};
}

// ---------------------------------------------------------------------------
// TF-IDF

struct TfidfOptions {
  bool natural_log = false;  // default log base 2
  bool smooth = false;       // idf = log((N+1)/(df+1)) + 1
  bool normalize = true;     // L2 per document
};

inline void tfidf(SparseCorpus& corpus, const Vocabulary& vocab,
                  const TfidfOptions& opt = {}) {
  const double n_docs = static_cast<double>(corpus.num_docs());
  const double ln2 = std::log(2.0);

  std::vector<double> idf(vocab.size(), 0.0);
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    double df = static_cast<double>(vocab.df[t]);
    if (df <= 0) continue;
    double v;
    if (opt.smooth)
      v = std::log((n_docs + 1.0) / (df + 1.0)) + (opt.natural_log ? 1.0 : ln2);
    else
      v = std::log(n_docs / df);
    if (!opt.natural_log) v /= ln2;
    idf[t] = v;
  }

  corpus.weights.clear();
  corpus.weights.reserve(corpus.num_docs());
  for (const auto& row : corpus.counts) {
    std::vector<std::pair<std::uint32_t, double>> w;
    for (const auto& [id, count] : row) {
      double weight = static_cast<double>(count) * idf[id];
      if (weight > 0.0) w.emplace_back(id, weight);
    }
    if (opt.normalize && !w.empty()) {
      double ss = 0.0;
      for (const auto& [_, x] : w) ss += x * x;
      double norm = std::sqrt(ss);
      for (auto& [_, x] : w) x /= norm;
    }
    corpus.weights.push_back(std::move(w));
  }
}

// ---------------------------------------------------------------------------
// File formats

inline void save_vocabulary(const fs::path& path, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += vocab.terms[i];
    out += '\t';
    out += std::to_string(vocab.df[i]);
    out += '\n';
  }
  write_file(path, out);
}

inline Vocabulary load_vocabulary(const fs::path& path) {
  Vocabulary vocab;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw std::runtime_error(path.string() + ": line " +
                               std::to_string(lineno) + ": expected 3 columns");
    std::uint32_t id = static_cast<std::uint32_t>(std::stoul(line.substr(0, t1)));
    std::string term = line.substr(t1 + 1, t2 - t1 - 1);
    std::uint32_t df = static_cast<std::uint32_t>(std::stoul(line.substr(t2 + 1)));
    if (id != vocab.terms.size())
      throw std::runtime_error(path.string() + ": line " +
                               std::to_string(lineno) + ": ids not dense");
    vocab.term_to_id.emplace(term, id);
    vocab.terms.push_back(term);
    vocab.df.push_back(df);
  }
  return vocab;
}

inline void save_sparse_counts(const fs::path& path, const SparseCorpus& corpus) {
  std::string out;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    out += corpus.note_ids[d];
    out += '\t';
    bool first = true;
    for (const auto& [id, count] : corpus.counts[d]) {
      if (!first) out += ',';
      first = false;
      out += std::to_string(id);
      out += ':';
      out += std::to_string(count);
    }
    out += '\n';
  }
  write_file(path, out);
}

inline void save_sparse_weights(const fs::path& path, const SparseCorpus& corpus) {
  std::string out;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    out += corpus.note_ids[d];
    out += '\t';
    bool first = true;
    for (const auto& [id, w] : corpus.weights[d]) {
      if (!first) out += ',';
      first = false;
      out += std::to_string(id);
      out += ':';
      out += format_double(w);
    }
    out += '\n';
  }
  write_file(path, out);
}

inline SparseCorpus load_sparse_counts(const fs::path& path) {
  SparseCorpus corpus;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path.string() + ": line " +
                               std::to_string(lineno) + ": missing tab");
    corpus.note_ids.push_back(line.substr(0, tab));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> row;
    std::size_t pos = tab + 1;
    while (pos < line.size()) {
      auto colon = line.find(':', pos);
      auto comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      if (colon == std::string::npos || colon > comma)
        throw std::runtime_error(path.string() + ": line " +
                                 std::to_string(lineno) + ": bad entry");
      row.emplace_back(
          static_cast<std::uint32_t>(std::stoul(line.substr(pos, colon - pos))),
          static_cast<std::uint32_t>(
              std::stoul(line.substr(colon + 1, comma - colon - 1))));
      pos = comma + 1;
    }
    corpus.counts.push_back(std::move(row));
  }
  return corpus;
}

inline void load_sparse_weights(const fs::path& path, SparseCorpus& corpus) {
  corpus.weights.assign(corpus.num_docs(), {});
  std::size_t lineno = 0;
  std::size_t d = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    if (d >= corpus.num_docs())
      throw std::runtime_error(path.string() + ": more rows than corpus docs");
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.substr(0, tab) != corpus.note_ids[d])
      throw std::runtime_error(path.string() + ": line " +
                               std::to_string(lineno) +
                               ": note_id mismatch with count corpus");
    std::vector<std::pair<std::uint32_t, double>> row;
    std::size_t pos = tab + 1;
    while (pos < line.size()) {
      auto colon = line.find(':', pos);
      auto comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      if (colon == std::string::npos || colon > comma)
        throw std::runtime_error(path.string() + ": line " +
                                 std::to_string(lineno) + ": bad entry");
      row.emplace_back(
          static_cast<std::uint32_t>(std::stoul(line.substr(pos, colon - pos))),
          std::stod(line.substr(colon + 1, comma - colon - 1)));
      pos = comma + 1;
    }
    corpus.weights[d] = std::move(row);
    ++d;
  }
  if (d != corpus.num_docs())
    throw std::runtime_error(path.string() + ": fewer rows than corpus docs");
}

}  // namespace notemine
