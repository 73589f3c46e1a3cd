#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "notemine/io.hpp"
#include "notemine/lda.hpp"
#include "notemine/stats.hpp"
#include "notemine/vectorize.hpp"

namespace notemine {

// One Table-2 row: a term, its chi-square against the topic labels, and
// how many notes per dominant topic contain it.
struct FeatureStats {
  std::uint32_t term_id = 0;
  std::string term;
  double chi2 = 0.0;
  unsigned dof = 0;
  double p_value = 1.0;
  std::vector<std::uint64_t> present;
};

struct FeatureRanking {
  std::vector<FeatureStats> rows;     // chi2 descending
  std::vector<std::uint64_t> topic_totals;
  double alpha_level = 0.01;
  unsigned k_count = 0;
  bool forward_mode = false;

  nlohmann::json to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows)
      rows_json.push_back({{"term_id", r.term_id},
                           {"term", r.term},
                           {"chi2", r.chi2},
                           {"dof", r.dof},
                           {"p_value", r.p_value},
                           {"present", r.present}});
    return {{"alpha_level", alpha_level},
            {"k", k_count},
            {"forward", forward_mode},
            {"topic_totals", topic_totals},
            {"rows", rows_json}};
  }
};

inline std::vector<std::uint64_t> topic_note_totals(
    const std::vector<TopicAssignment>& assignments, unsigned k_count) {
  std::vector<std::uint64_t> totals(k_count, 0);
  for (const auto& a : assignments) ++totals[a.dominant_topic];
  return totals;
}

// Notes per dominant topic whose count vector has the term.
inline std::vector<std::uint64_t> presence_counts(
    const SparseCorpus& corpus, const std::vector<TopicAssignment>& assignments,
    std::uint32_t term_id, unsigned k_count) {
  if (assignments.size() != corpus.num_docs())
    throw std::invalid_argument("presence_counts: assignment/corpus mismatch");
  std::vector<std::uint64_t> counts(k_count, 0);
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto& row = corpus.counts[d];
    auto it = std::lower_bound(
        row.begin(), row.end(), term_id,
        [](const auto& entry, std::uint32_t id) { return entry.first < id; });
    if (it != row.end() && it->first == term_id)
      ++counts[assignments[d].dominant_topic];
  }
  return counts;
}

namespace detail {

// Presence table for every term at once: one corpus pass.
inline std::vector<std::vector<std::uint64_t>> presence_matrix(
    const SparseCorpus& corpus, const std::vector<TopicAssignment>& assignments,
    std::size_t vocab_size, unsigned k_count,
    const std::vector<bool>* doc_mask = nullptr) {
  std::vector<std::vector<std::uint64_t>> present(
      vocab_size, std::vector<std::uint64_t>(k_count, 0));
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    if (doc_mask && !(*doc_mask)[d]) continue;
    unsigned topic = assignments[d].dominant_topic;
    for (const auto& [id, _] : corpus.counts[d]) ++present[id][topic];
  }
  return present;
}

inline FeatureStats feature_from_table(std::uint32_t term_id,
                                       const std::string& term,
                                       const std::vector<std::uint64_t>& present,
                                       const std::vector<std::uint64_t>& totals) {
  std::vector<std::uint64_t> absent(totals.size());
  for (std::size_t k = 0; k < totals.size(); ++k)
    absent[k] = totals[k] - present[k];
  Chi2Result r = pearson_chi2(present, absent);
  FeatureStats f;
  f.term_id = term_id;
  f.term = term;
  f.chi2 = r.chi2;
  f.dof = r.dof;
  f.p_value = r.p_value;
  f.present = present;
  return f;
}

}  // namespace detail

// Marginal ranking: chi2 for every term, keep p < alpha_level, sort by
// chi2 descending (term id breaks ties). Forward mode instead picks one
// term at a time, each round scoring only the notes no selected term has
// touched yet, a greedy stand-in for a forward entry procedure.
inline FeatureRanking rank_features(const SparseCorpus& corpus,
                                    const Vocabulary& vocab,
                                    const std::vector<TopicAssignment>& assignments,
                                    unsigned k_count, double alpha_level = 0.01,
                                    std::size_t top_n = 20,
                                    bool forward = false) {
  FeatureRanking ranking;
  ranking.alpha_level = alpha_level;
  ranking.k_count = k_count;
  ranking.forward_mode = forward;
  ranking.topic_totals = topic_note_totals(assignments, k_count);

  if (!forward) {
    auto present = detail::presence_matrix(corpus, assignments, vocab.size(),
                                           k_count);
    std::vector<FeatureStats> all;
    all.reserve(vocab.size());
    for (std::uint32_t t = 0; t < vocab.size(); ++t) {
      auto f = detail::feature_from_table(t, vocab.terms[t], present[t],
                                          ranking.topic_totals);
      if (f.p_value < alpha_level) all.push_back(std::move(f));
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      if (a.chi2 != b.chi2) return a.chi2 > b.chi2;
      return a.term_id < b.term_id;
    });
    if (all.size() > top_n) all.resize(top_n);
    ranking.rows = std::move(all);
    return ranking;
  }

  std::vector<bool> active(corpus.num_docs(), true);
  std::vector<bool> taken(vocab.size(), false);
  for (std::size_t round = 0; round < top_n; ++round) {
    std::vector<std::uint64_t> totals(k_count, 0);
    for (std::size_t d = 0; d < corpus.num_docs(); ++d)
      if (active[d]) ++totals[assignments[d].dominant_topic];
    std::uint64_t remaining = 0;
    for (auto t : totals) remaining += t;
    if (remaining == 0) break;

    auto present = detail::presence_matrix(corpus, assignments, vocab.size(),
                                           k_count, &active);
    bool found = false;
    FeatureStats best;
    for (std::uint32_t t = 0; t < vocab.size(); ++t) {
      if (taken[t]) continue;
      auto f = detail::feature_from_table(t, vocab.terms[t], present[t], totals);
      if (f.p_value >= alpha_level) continue;
      if (!found || f.chi2 > best.chi2 ||
          (f.chi2 == best.chi2 && f.term_id < best.term_id)) {
        best = std::move(f);
        found = true;
      }
    }
    if (!found) break;
    taken[best.term_id] = true;
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
      if (!active[d]) continue;
      const auto& row = corpus.counts[d];
      auto it = std::lower_bound(row.begin(), row.end(), best.term_id,
                                 [](const auto& entry, std::uint32_t id) {
                                   return entry.first < id;
                                 });
      if (it != row.end() && it->first == best.term_id) active[d] = false;
    }
    // report corpus-wide presence for the table, not the shrinking counts
    best.present = presence_counts(corpus, assignments, best.term_id, k_count);
    ranking.rows.push_back(std::move(best));
  }
  return ranking;
}

// Topic whose notes carry the ranked features most often.
inline unsigned topic_of_interest(const FeatureRanking& ranking) {
  if (ranking.rows.empty())
    throw std::invalid_argument("topic_of_interest: empty ranking");
  std::vector<std::uint64_t> score(ranking.k_count, 0);
  for (const auto& row : ranking.rows)
    for (std::size_t k = 0; k < row.present.size(); ++k)
      score[k] += row.present[k];
  unsigned best = 0;
  for (unsigned k = 1; k < ranking.k_count; ++k)
    if (score[k] > score[best]) best = k;  // ties keep the lowest id
  return best;
}

// TSV mirror of Table 2; the per-row maximum count is starred.
inline std::string ranking_tsv(const FeatureRanking& ranking) {
  std::string out = "term\tchi2\tdof\tp_value";
  for (unsigned k = 0; k < ranking.k_count; ++k)
    out += "\ttopic_" + std::to_string(k);
  out += '\n';
  for (const auto& row : ranking.rows) {
    out += row.term;
    out += '\t';
    out += format_double(row.chi2);
    out += '\t';
    out += std::to_string(row.dof);
    out += '\t';
    out += format_double(row.p_value);
    std::uint64_t maxv = 0;
    for (auto c : row.present) maxv = std::max(maxv, c);
    for (auto c : row.present) {
      out += '\t';
      out += std::to_string(c);
      if (c == maxv) out += '*';
    }
    out += '\n';
  }
  return out;
}

}  // namespace notemine
