#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "notemine/lda.hpp"
#include "notemine/parallel.hpp"
#include "notemine/vectorize.hpp"

namespace notemine {

struct CoherenceScore {
  std::vector<double> per_topic;
  double mean = 0.0;
};

namespace detail {

// Doc-index lists per candidate term, for co-occurrence intersection.
inline std::unordered_map<std::uint32_t, std::vector<std::uint32_t>>
term_doc_lists(const SparseCorpus& corpus,
               const std::unordered_set<std::uint32_t>& wanted) {
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> lists;
  for (auto t : wanted) lists[t];
  for (std::size_t d = 0; d < corpus.num_docs(); ++d)
    for (const auto& [id, _] : corpus.counts[d])
      if (wanted.count(id))
        lists[id].push_back(static_cast<std::uint32_t>(d));
  return lists;
}

inline std::size_t sorted_intersection_size(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace detail

// UMass coherence: per topic, sum over ranked top-term pairs (i earlier
// than j) of log((D(wi,wj)+1)/D(wj)), document counts from the count
// corpus. Higher (closer to 0) is better.
inline CoherenceScore umass_coherence(const TopicModel& model,
                                      const SparseCorpus& corpus,
                                      std::size_t top_n = 10) {
  auto top = top_keywords(model, top_n);
  std::unordered_set<std::uint32_t> wanted;
  for (const auto& list : top)
    for (auto id : list) wanted.insert(id);
  auto lists = detail::term_doc_lists(corpus, wanted);

  CoherenceScore score;
  score.per_topic.reserve(top.size());
  for (const auto& terms : top) {
    double c = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      for (std::size_t j = i + 1; j < terms.size(); ++j) {
        const auto& di = lists.at(terms[i]);
        const auto& dj = lists.at(terms[j]);
        if (dj.empty())
          throw std::runtime_error("umass_coherence: top term with df = 0");
        double co = static_cast<double>(
            detail::sorted_intersection_size(di, dj));
        c += std::log((co + 1.0) / static_cast<double>(dj.size()));
      }
    }
    score.per_topic.push_back(c);
  }
  double sum = 0.0;
  for (double c : score.per_topic) sum += c;
  score.mean = score.per_topic.empty()
                   ? 0.0
                   : sum / static_cast<double>(score.per_topic.size());
  return score;
}

// NPMI over sliding windows of the tokenized corpus. Windows act as
// virtual documents; a doc shorter than the window is one window.
inline CoherenceScore npmi_coherence(const TopicModel& model,
                                     const std::vector<TokenizedDoc>& docs,
                                     const Vocabulary& vocab,
                                     std::size_t window = 10,
                                     std::size_t top_n = 10) {
  if (window < 2) window = 2;
  auto top = top_keywords(model, top_n);
  std::unordered_set<std::uint32_t> wanted;
  for (const auto& list : top)
    for (auto id : list) wanted.insert(id);

  std::unordered_map<std::uint32_t, std::uint64_t> single;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> pair_count;
  std::uint64_t windows = 0;

  std::vector<std::uint32_t> present;
  for (const auto& doc : docs) {
    std::vector<std::uint32_t> ids;
    for (const auto& sent : doc.sentences)
      for (const auto& tok : sent)
        if (vocab.has(tok)) ids.push_back(vocab.id(tok));
    if (ids.empty()) continue;
    std::size_t count = ids.size() > window ? ids.size() - window + 1 : 1;
    for (std::size_t start = 0; start < count; ++start) {
      std::size_t end = std::min(start + window, ids.size());
      ++windows;
      present.clear();
      for (std::size_t i = start; i < end; ++i)
        if (wanted.count(ids[i])) present.push_back(ids[i]);
      std::sort(present.begin(), present.end());
      present.erase(std::unique(present.begin(), present.end()),
                    present.end());
      for (std::size_t i = 0; i < present.size(); ++i) {
        ++single[present[i]];
        for (std::size_t j = i + 1; j < present.size(); ++j)
          ++pair_count[{present[i], present[j]}];
      }
    }
  }
  if (windows == 0)
    throw std::runtime_error("npmi_coherence: empty corpus");

  auto npmi = [&](std::uint32_t a, std::uint32_t b) -> double {
    if (a > b) std::swap(a, b);
    auto it = pair_count.find({a, b});
    double cab = it == pair_count.end() ? 0.0 : static_cast<double>(it->second);
    if (cab == 0.0) return -1.0;
    double pa = static_cast<double>(single[a]) / static_cast<double>(windows);
    double pb = static_cast<double>(single[b]) / static_cast<double>(windows);
    double pab = cab / static_cast<double>(windows);
    if (pab >= 1.0) return 1.0;  // degenerate: together in every window
    return std::log(pab / (pa * pb)) / (-std::log(pab));
  };

  CoherenceScore score;
  for (const auto& terms : top) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < terms.size(); ++i)
      for (std::size_t j = i + 1; j < terms.size(); ++j) {
        sum += npmi(terms[i], terms[j]);
        ++pairs;
      }
    score.per_topic.push_back(pairs ? sum / static_cast<double>(pairs) : 0.0);
  }
  double sum = 0.0;
  for (double c : score.per_topic) sum += c;
  score.mean = score.per_topic.empty()
                   ? 0.0
                   : sum / static_cast<double>(score.per_topic.size());
  return score;
}

// ---------------------------------------------------------------------------
// K sweep

enum class CoherenceMeasure { umass, npmi };

inline const char* coherence_measure_name(CoherenceMeasure m) {
  return m == CoherenceMeasure::umass ? "umass" : "npmi";
}

inline CoherenceMeasure parse_coherence_measure(const std::string& s) {
  if (s == "umass") return CoherenceMeasure::umass;
  if (s == "npmi") return CoherenceMeasure::npmi;
  throw std::runtime_error("unknown coherence measure: " + s);
}

struct KRecord {
  unsigned k = 0;
  std::uint64_t seed = 0;
  double coherence = 0.0;
  std::string model_path;
  bool failed = false;
  std::string error;
};

struct SweepResult {
  std::vector<KRecord> records;
  unsigned selected_k = 0;
  CoherenceMeasure measure = CoherenceMeasure::umass;

  std::string tsv() const {
    std::string out = "k\tcoherence\n";
    for (const auto& r : records) {
      if (r.failed) continue;
      out += std::to_string(r.k);
      out += '\t';
      out += format_double(r.coherence);
      out += '\n';
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
      nlohmann::json j{{"k", r.k}, {"seed", r.seed}, {"failed", r.failed}};
      if (r.failed)
        j["error"] = r.error;
      else
        j["coherence"] = r.coherence;
      if (!r.model_path.empty()) j["model"] = r.model_path;
      recs.push_back(std::move(j));
    }
    return {{"measure", coherence_measure_name(measure)},
            {"selected_k", selected_k},
            {"records", recs}};
  }
};

struct SweepInputs {
  const TokenStreams* streams = nullptr;       // LDA input
  const SparseCorpus* counts = nullptr;        // umass co-occurrence base
  const std::vector<TokenizedDoc>* docs = nullptr;  // npmi only
  const Vocabulary* vocab = nullptr;           // npmi only
};

// Fits one model per candidate K with seed = base_seed + K, scores each,
// picks the argmax (ties to the smaller K). Candidate fits run in
// parallel; each fit is then single-threaded so the worker cap holds.
inline SweepResult sweep(const SweepInputs& in,
                         const std::vector<unsigned>& k_grid,
                         const LdaConfig& base,
                         CoherenceMeasure measure = CoherenceMeasure::umass,
                         const fs::path* models_dir = nullptr,
                         TopicModel* selected_model = nullptr) {
  if (k_grid.empty()) throw std::invalid_argument("sweep: empty k grid");
  for (std::size_t i = 1; i < k_grid.size(); ++i)
    if (k_grid[i] <= k_grid[i - 1])
      throw std::invalid_argument("sweep: k grid must be strictly increasing");
  if (!in.streams || !in.counts)
    throw std::invalid_argument("sweep: missing inputs");
  if (measure == CoherenceMeasure::npmi && (!in.docs || !in.vocab))
    throw std::invalid_argument("sweep: npmi needs tokenized docs");

  SweepResult result;
  result.measure = measure;
  result.records.resize(k_grid.size());
  std::vector<TopicModel> models(k_grid.size());

  unsigned workers = thread_count(k_grid.size());
  parallel_chunks(k_grid.size(), workers, [&](std::size_t lo, std::size_t hi,
                                              unsigned) {
    for (std::size_t i = lo; i < hi; ++i) {
      KRecord& rec = result.records[i];
      rec.k = k_grid[i];
      rec.seed = base.seed + k_grid[i];
      try {
        LdaConfig cfg = base;
        cfg.k = k_grid[i];
        cfg.alpha = base.alpha;  // <= 0 re-resolves as 50/K per candidate
        cfg.seed = rec.seed;
        TopicModel model = fit(*in.streams, cfg, {}, nullptr, 1);
        CoherenceScore score =
            measure == CoherenceMeasure::umass
                ? umass_coherence(model, *in.counts)
                : npmi_coherence(model, *in.docs, *in.vocab);
        rec.coherence = score.mean;
        models[i] = std::move(model);
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  });

  bool any = false;
  std::size_t best = 0;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    if (r.failed) continue;
    if (!any || r.coherence > result.records[best].coherence) {
      best = i;
      any = true;
    }
  }
  if (!any) throw std::runtime_error("sweep: every candidate K failed");
  result.selected_k = result.records[best].k;

  if (models_dir) {
    for (std::size_t i = 0; i < result.records.size(); ++i) {
      if (result.records[i].failed) continue;
      fs::path p = *models_dir / ("model_k" +
                                  std::to_string(result.records[i].k) +
                                  ".json");
      models[i].save(p);
      result.records[i].model_path = p.string();
    }
  }
  if (selected_model) *selected_model = std::move(models[best]);
  return result;
}

}  // namespace notemine
