#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "notemine/io.hpp"
#include "notemine/parallel.hpp"
#include "notemine/rng.hpp"
#include "notemine/vectorize.hpp"

namespace notemine {

enum class WeightMode { counts, scaled_tfidf };

inline const char* weight_mode_name(WeightMode m) {
  return m == WeightMode::counts ? "counts" : "scaled_tfidf";
}

inline WeightMode parse_weight_mode(const std::string& s) {
  if (s == "counts") return WeightMode::counts;
  if (s == "scaled_tfidf") return WeightMode::scaled_tfidf;
  throw std::runtime_error("unknown weight mode: " + s);
}

struct LdaConfig {
  unsigned k = 5;
  double alpha = 0.0;  // <= 0 means the 50/K default
  double beta = 0.01;
  unsigned iterations = 1000;
  unsigned burn_in = 500;
  unsigned sample_every = 10;
  std::uint64_t seed = 1;
  WeightMode weight_mode = WeightMode::scaled_tfidf;
  double tfidf_scale = 20.0;

  double resolved_alpha() const {
    return alpha > 0.0 ? alpha : 50.0 / static_cast<double>(k);
  }

  void validate() const {
    if (k < 1) throw std::invalid_argument("lda: k must be >= 1");
    if (beta <= 0.0) throw std::invalid_argument("lda: beta must be > 0");
    if (iterations < burn_in)
      throw std::invalid_argument("lda: iterations < burn_in");
    if (sample_every < 1)
      throw std::invalid_argument("lda: sample_every must be >= 1");
    if (tfidf_scale <= 0.0)
      throw std::invalid_argument("lda: tfidf_scale must be > 0");
  }
};

// Gibbs sampling wants integer token streams; TF-IDF weights become
// pseudo-counts of max(1, round(weight * scale)).
struct TokenStreams {
  std::vector<std::string> note_ids;
  std::vector<std::vector<std::uint32_t>> docs;
  std::size_t vocab_size = 0;

  std::size_t total_tokens() const {
    std::size_t n = 0;
    for (const auto& d : docs) n += d.size();
    return n;
  }
};

inline TokenStreams prepare_tokens(const SparseCorpus& corpus,
                                   std::size_t vocab_size, WeightMode mode,
                                   double scale = 20.0) {
  TokenStreams streams;
  streams.note_ids = corpus.note_ids;
  streams.vocab_size = vocab_size;
  streams.docs.reserve(corpus.num_docs());
  std::vector<std::string> empty_docs;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    std::vector<std::uint32_t> stream;
    if (mode == WeightMode::counts) {
      for (const auto& [id, count] : corpus.counts[d])
        stream.insert(stream.end(), count, id);
    } else {
      if (corpus.weights.size() != corpus.num_docs())
        throw std::runtime_error("prepare_tokens: tfidf weights missing");
      for (const auto& [id, w] : corpus.weights[d]) {
        auto reps = static_cast<std::uint32_t>(
            std::max<long long>(1, std::llround(w * scale)));
        stream.insert(stream.end(), reps, id);
      }
    }
    if (stream.empty()) empty_docs.push_back(corpus.note_ids[d]);
    streams.docs.push_back(std::move(stream));
  }
  if (!empty_docs.empty())
    throw std::runtime_error("prepare_tokens: empty token stream for " +
                             join(empty_docs, ", "));
  return streams;
}

struct TopicModel {
  LdaConfig config;
  std::size_t vocab_size = 0;
  std::size_t num_docs = 0;
  std::vector<std::string> note_ids;
  std::string vocab_hash;

  std::vector<double> phi;    // k * vocab_size, row per topic
  std::vector<double> theta;  // num_docs * k, row per doc

  std::vector<std::uint32_t> n_dk;  // num_docs * k
  std::vector<std::uint32_t> n_kw;  // k * vocab_size
  std::vector<std::uint64_t> n_k;   // k
  std::vector<std::vector<std::uint16_t>> z;

  double phi_at(unsigned k, std::uint32_t w) const {
    return phi[static_cast<std::size_t>(k) * vocab_size + w];
  }
  double theta_at(std::size_t d, unsigned k) const {
    return theta[d * config.k + k];
  }

  nlohmann::json to_json() const;
  static TopicModel from_json(const nlohmann::json& j);
  void save(const fs::path& path) const { write_file(path, to_json().dump()); }
  static TopicModel load(const fs::path& path) {
    return from_json(nlohmann::json::parse(read_file(path)));
  }
};

// State handed to the per-sweep hook (used by invariant checks).
struct SweepView {
  unsigned sweep;
  unsigned k;
  std::size_t vocab_size;
  const std::vector<std::uint32_t>& n_dk;
  const std::vector<std::uint32_t>& n_kw;
  const std::vector<std::uint64_t>& n_k;
  const TokenStreams& streams;
};

using SweepHook = std::function<void(const SweepView&)>;

// Collapsed Gibbs sampler. Within a sweep every document reads the global
// topic-word counts frozen at sweep start plus its own in-document deltas,
// and draws from its own generator stream seeded by (seed, sweep, salt).
// Deltas merge at sweep end. Consequences: document order never affects
// the result (merging integer deltas commutes), so cross-document
// parallelism is free and bit-reproducible, and permuting documents
// together with their salts permutes theta rows exactly.
inline TopicModel fit(const TokenStreams& streams, const LdaConfig& config,
                      const std::vector<std::uint64_t>& doc_salts = {},
                      const SweepHook& hook = nullptr,
                      unsigned workers_override = 0) {
  config.validate();
  const std::size_t d_count = streams.docs.size();
  const std::size_t v = streams.vocab_size;
  const unsigned k_count = config.k;
  if (d_count == 0) throw std::invalid_argument("lda: empty corpus");
  if (v == 0) throw std::invalid_argument("lda: empty vocabulary");
  for (std::size_t d = 0; d < d_count; ++d)
    if (streams.docs[d].empty())
      throw std::invalid_argument("lda: empty token stream for doc " +
                                  std::to_string(d));
  if (!doc_salts.empty() && doc_salts.size() != d_count)
    throw std::invalid_argument("lda: doc_salts size mismatch");

  const double alpha = config.resolved_alpha();
  const double beta = config.beta;
  const double vbeta = static_cast<double>(v) * beta;
  const std::size_t total_tokens = streams.total_tokens();
  if (k_count > total_tokens)
    std::fprintf(stderr,
                 "lda: warning: k=%u exceeds total token count %zu\n",
                 k_count, total_tokens);

  auto salt = [&](std::size_t d) {
    return doc_salts.empty() ? static_cast<std::uint64_t>(d) : doc_salts[d];
  };

  TopicModel model;
  model.config = config;
  model.config.alpha = alpha;
  model.vocab_size = v;
  model.num_docs = d_count;
  model.note_ids = streams.note_ids;
  model.n_dk.assign(d_count * k_count, 0);
  model.n_kw.assign(static_cast<std::size_t>(k_count) * v, 0);
  model.n_k.assign(k_count, 0);
  model.z.resize(d_count);

  // per-doc unique terms and per-token column into the delta scratch
  std::vector<std::vector<std::uint32_t>> doc_terms(d_count);
  std::vector<std::vector<std::uint32_t>> token_col(d_count);
  std::size_t max_unique = 0;
  for (std::size_t d = 0; d < d_count; ++d) {
    const auto& toks = streams.docs[d];
    auto& terms = doc_terms[d];
    auto& cols = token_col[d];
    cols.reserve(toks.size());
    for (auto w : toks) {
      if (terms.empty() || terms.back() != w) terms.push_back(w);
      cols.push_back(static_cast<std::uint32_t>(terms.size() - 1));
    }
    max_unique = std::max(max_unique, terms.size());
  }

  // init sweep: uniform assignments from each doc's own stream
  for (std::size_t d = 0; d < d_count; ++d) {
    SplitMix64 rng(mix_seed(config.seed, 0, salt(d)));
    const auto& toks = streams.docs[d];
    auto& zd = model.z[d];
    zd.resize(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) {
      auto k = static_cast<std::uint16_t>(rng.uniform_int(k_count));
      zd[i] = k;
      ++model.n_dk[d * k_count + k];
      ++model.n_kw[static_cast<std::size_t>(k) * v + toks[i]];
      ++model.n_k[k];
    }
  }

  std::vector<double> phi_sum(static_cast<std::size_t>(k_count) * v, 0.0);
  std::vector<double> theta_sum(d_count * k_count, 0.0);
  unsigned samples = 0;

  auto accumulate = [&] {
    for (unsigned k = 0; k < k_count; ++k) {
      double denom = static_cast<double>(model.n_k[k]) + vbeta;
      for (std::size_t w = 0; w < v; ++w) {
        std::size_t idx = static_cast<std::size_t>(k) * v + w;
        phi_sum[idx] += (model.n_kw[idx] + beta) / denom;
      }
    }
    for (std::size_t d = 0; d < d_count; ++d) {
      double denom = static_cast<double>(streams.docs[d].size()) +
                     static_cast<double>(k_count) * alpha;
      for (unsigned k = 0; k < k_count; ++k)
        theta_sum[d * k_count + k] +=
            (model.n_dk[d * k_count + k] + alpha) / denom;
    }
    ++samples;
  };

  struct Delta {
    std::uint32_t w;
    std::uint16_t k;
    std::int32_t dv;
  };

  unsigned workers =
      workers_override > 0 ? workers_override : thread_count(d_count);
  std::vector<std::vector<Delta>> merge(workers);

  for (unsigned sweep = 1; sweep <= config.iterations; ++sweep) {
    for (auto& m : merge) m.clear();

    parallel_chunks(d_count, workers, [&](std::size_t lo, std::size_t hi,
                                          unsigned worker) {
      std::vector<std::int32_t> delta(static_cast<std::size_t>(k_count) *
                                          max_unique,
                                      0);
      std::vector<std::int64_t> delta_k(k_count, 0);
      std::vector<double> probs(k_count);
      auto& out = merge[worker];

      for (std::size_t d = lo; d < hi; ++d) {
        SplitMix64 rng(mix_seed(config.seed, sweep, salt(d)));
        const auto& toks = streams.docs[d];
        const auto& cols = token_col[d];
        const std::size_t u = doc_terms[d].size();
        auto& zd = model.z[d];
        std::uint32_t* dk = &model.n_dk[d * k_count];

        for (std::size_t i = 0; i < toks.size(); ++i) {
          const std::uint32_t w = toks[i];
          const std::uint32_t col = cols[i];
          const std::uint16_t old = zd[i];
          --dk[old];
          --delta[static_cast<std::size_t>(old) * u + col];
          --delta_k[old];

          double total = 0.0;
          for (unsigned k = 0; k < k_count; ++k) {
            double nw = static_cast<double>(
                            model.n_kw[static_cast<std::size_t>(k) * v + w]) +
                        static_cast<double>(
                            delta[static_cast<std::size_t>(k) * u + col]);
            double nk = static_cast<double>(model.n_k[k]) +
                        static_cast<double>(delta_k[k]);
            total += (dk[k] + alpha) * (nw + beta) / (nk + vbeta);
            probs[k] = total;
          }
          double target = rng.uniform01() * total;
          unsigned pick = 0;
          while (pick + 1 < k_count && probs[pick] <= target) ++pick;

          zd[i] = static_cast<std::uint16_t>(pick);
          ++dk[pick];
          ++delta[static_cast<std::size_t>(pick) * u + col];
          ++delta_k[pick];
        }

        for (std::size_t col = 0; col < u; ++col) {
          for (unsigned k = 0; k < k_count; ++k) {
            std::size_t idx = static_cast<std::size_t>(k) * u + col;
            if (delta[idx] != 0) {
              out.push_back({doc_terms[d][col],
                             static_cast<std::uint16_t>(k), delta[idx]});
              delta[idx] = 0;
            }
          }
        }
        std::fill(delta_k.begin(), delta_k.end(), 0);
      }
    });

    for (const auto& buf : merge) {
      for (const auto& dl : buf) {
        std::size_t idx = static_cast<std::size_t>(dl.k) * v + dl.w;
        model.n_kw[idx] = static_cast<std::uint32_t>(
            static_cast<std::int64_t>(model.n_kw[idx]) + dl.dv);
        model.n_k[dl.k] = static_cast<std::uint64_t>(
            static_cast<std::int64_t>(model.n_k[dl.k]) + dl.dv);
      }
    }

    if (hook)
      hook(SweepView{sweep, k_count, v, model.n_dk, model.n_kw, model.n_k,
                     streams});
    if (sweep > config.burn_in &&
        (sweep - config.burn_in) % config.sample_every == 0)
      accumulate();
  }

  if (samples == 0) accumulate();  // fall back to the final state

  model.phi.resize(phi_sum.size());
  for (std::size_t i = 0; i < phi_sum.size(); ++i)
    model.phi[i] = phi_sum[i] / samples;
  model.theta.resize(theta_sum.size());
  for (std::size_t i = 0; i < theta_sum.size(); ++i)
    model.theta[i] = theta_sum[i] / samples;
  return model;
}

// ---------------------------------------------------------------------------
// Model serialization

inline nlohmann::json TopicModel::to_json() const {
  nlohmann::json j;
  j["format"] = "notemine-model";
  j["version"] = 1;
  j["config"] = {{"k", config.k},
                 {"alpha", config.alpha},
                 {"beta", config.beta},
                 {"iterations", config.iterations},
                 {"burn_in", config.burn_in},
                 {"sample_every", config.sample_every},
                 {"seed", config.seed},
                 {"weight_mode", weight_mode_name(config.weight_mode)},
                 {"tfidf_scale", config.tfidf_scale}};
  j["vocab_size"] = vocab_size;
  j["num_docs"] = num_docs;
  j["vocab_hash"] = vocab_hash;
  j["note_ids"] = note_ids;
  auto rows = [](const std::vector<double>& flat, std::size_t ncols) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < flat.size(); i += ncols) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = 0; c < ncols; ++c) row.push_back(flat[i + c]);
      out.push_back(std::move(row));
    }
    return out;
  };
  j["phi"] = rows(phi, vocab_size);
  j["theta"] = rows(theta, config.k);
  j["n_dk"] = n_dk;
  j["n_kw"] = n_kw;
  j["n_k"] = n_k;
  j["z"] = z;
  return j;
}

inline TopicModel TopicModel::from_json(const nlohmann::json& j) {
  if (j.at("format").get<std::string>() != "notemine-model")
    throw std::runtime_error("not a model file");
  TopicModel m;
  const auto& c = j.at("config");
  m.config.k = c.at("k").get<unsigned>();
  m.config.alpha = c.at("alpha").get<double>();
  m.config.beta = c.at("beta").get<double>();
  m.config.iterations = c.at("iterations").get<unsigned>();
  m.config.burn_in = c.at("burn_in").get<unsigned>();
  m.config.sample_every = c.at("sample_every").get<unsigned>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.config.weight_mode =
      parse_weight_mode(c.at("weight_mode").get<std::string>());
  m.config.tfidf_scale = c.at("tfidf_scale").get<double>();
  m.vocab_size = j.at("vocab_size").get<std::size_t>();
  m.num_docs = j.at("num_docs").get<std::size_t>();
  m.vocab_hash = j.at("vocab_hash").get<std::string>();
  m.note_ids = j.at("note_ids").get<std::vector<std::string>>();
  for (const auto& row : j.at("phi"))
    for (const auto& x : row) m.phi.push_back(x.get<double>());
  for (const auto& row : j.at("theta"))
    for (const auto& x : row) m.theta.push_back(x.get<double>());
  m.n_dk = j.at("n_dk").get<std::vector<std::uint32_t>>();
  m.n_kw = j.at("n_kw").get<std::vector<std::uint32_t>>();
  m.n_k = j.at("n_k").get<std::vector<std::uint64_t>>();
  m.z = j.at("z").get<std::vector<std::vector<std::uint16_t>>>();
  return m;
}

// ---------------------------------------------------------------------------
// Topic labeling

struct TopicAssignment {
  std::string note_id;
  unsigned dominant_topic = 0;
  double contribution = 0.0;
};

inline std::vector<TopicAssignment> dominant_topics(const TopicModel& model) {
  std::vector<TopicAssignment> out;
  out.reserve(model.num_docs);
  for (std::size_t d = 0; d < model.num_docs; ++d) {
    unsigned best = 0;
    double best_p = model.theta_at(d, 0);
    for (unsigned k = 1; k < model.config.k; ++k) {
      double p = model.theta_at(d, k);
      if (p > best_p) {  // ties keep the lowest topic id
        best_p = p;
        best = k;
      }
    }
    out.push_back({model.note_ids[d], best, best_p});
  }
  return out;
}

// Fraction of docs labeled with each topic, in [0,1].
inline std::vector<double> topic_shares(
    const std::vector<TopicAssignment>& assignments, unsigned k_count) {
  std::vector<double> shares(k_count, 0.0);
  for (const auto& a : assignments) shares[a.dominant_topic] += 1.0;
  for (auto& s : shares) s /= static_cast<double>(assignments.size());
  return shares;
}

struct RepresentativeNote {
  std::string note_id;
  double contribution = 0.0;
};

inline std::vector<std::vector<RepresentativeNote>> representative_notes(
    const std::vector<TopicAssignment>& assignments, unsigned k_count,
    double threshold = 0.80) {
  std::vector<std::vector<RepresentativeNote>> out(k_count);
  for (const auto& a : assignments)
    if (a.contribution >= threshold)  // inclusive boundary
      out[a.dominant_topic].push_back({a.note_id, a.contribution});
  for (auto& list : out)
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      if (a.contribution != b.contribution)
        return a.contribution > b.contribution;
      return a.note_id < b.note_id;
    });
  return out;
}

// Per topic, the n highest-phi term ids (ties resolved toward lower ids).
inline std::vector<std::vector<std::uint32_t>> top_keywords(
    const TopicModel& model, std::size_t n = 10) {
  std::vector<std::vector<std::uint32_t>> out(model.config.k);
  n = std::min(n, model.vocab_size);
  for (unsigned k = 0; k < model.config.k; ++k) {
    std::vector<std::uint32_t> ids(model.vocab_size);
    for (std::uint32_t w = 0; w < model.vocab_size; ++w) ids[w] = w;
    std::partial_sort(ids.begin(), ids.begin() + n, ids.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        double pa = model.phi_at(k, a), pb = model.phi_at(k, b);
                        if (pa != pb) return pa > pb;
                        return a < b;
                      });
    ids.resize(n);
    out[k] = std::move(ids);
  }
  return out;
}

// Keywords appearing in exactly one topic's top-n list, rank order kept.
inline std::vector<std::vector<std::uint32_t>> unique_keywords(
    const std::vector<std::vector<std::uint32_t>>& top) {
  std::unordered_map<std::uint32_t, unsigned> seen;
  for (const auto& list : top)
    for (auto id : list) ++seen[id];
  std::vector<std::vector<std::uint32_t>> out(top.size());
  for (std::size_t k = 0; k < top.size(); ++k)
    for (auto id : top[k])
      if (seen[id] == 1) out[k].push_back(id);
  return out;
}

}  // namespace notemine
