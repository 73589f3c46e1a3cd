#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "notemine/corpus.hpp"
#include "notemine/io.hpp"
#include "notemine/rng.hpp"

namespace notemine {

// Synthetic corpus with known everything: topic blocks, labels, planted
// negations, notes designed to fall out of the funnel at a known stage.
struct GeneratorSpec {
  unsigned k = 5;
  unsigned terms_per_topic = 40;
  std::size_t docs = 2000;
  double frac_no_impression = 0.0;  // notes emitted without an IMPRESSION
  double frac_empty = 0.0;          // impressions made only of stop words
  double negation_rate = 0.0;       // notes that get one "No X Y." sentence
  double noise = 0.05;              // off-block word probability
  unsigned min_sentences = 2;
  unsigned max_sentences = 4;
  unsigned min_words = 3;
  unsigned max_words = 6;
  std::uint64_t seed = 42;

  std::size_t vocab_size() const {
    return static_cast<std::size_t>(k) * terms_per_topic;
  }

  void validate() const {
    if (k < 1 || terms_per_topic < 1 || docs < 1)
      throw std::invalid_argument("synth: k, terms_per_topic, docs >= 1");
    for (double r : {frac_no_impression, frac_empty, negation_rate, noise})
      if (r < 0.0 || r > 1.0)
        throw std::invalid_argument("synth: rates must be in [0,1]");
    if (frac_no_impression + frac_empty > 1.0)
      throw std::invalid_argument("synth: drop fractions exceed 1");
    if (min_sentences < 1 || max_sentences < min_sentences ||
        min_words < 1 || max_words < min_words)
      throw std::invalid_argument("synth: bad length bounds");
  }

  nlohmann::json to_json() const {
    return {{"k", k},
            {"terms_per_topic", terms_per_topic},
            {"docs", docs},
            {"frac_no_impression", frac_no_impression},
            {"frac_empty", frac_empty},
            {"negation_rate", negation_rate},
            {"noise", noise},
            {"min_sentences", min_sentences},
            {"max_sentences", max_sentences},
            {"min_words", min_words},
            {"max_words", max_words},
            {"seed", seed}};
  }

  static GeneratorSpec from_json(const nlohmann::json& j) {
    GeneratorSpec s;
    s.k = j.value("k", s.k);
    s.terms_per_topic = j.value("terms_per_topic", s.terms_per_topic);
    s.docs = j.value("docs", s.docs);
    s.frac_no_impression = j.value("frac_no_impression", s.frac_no_impression);
    s.frac_empty = j.value("frac_empty", s.frac_empty);
    s.negation_rate = j.value("negation_rate", s.negation_rate);
    s.noise = j.value("noise", s.noise);
    s.min_sentences = j.value("min_sentences", s.min_sentences);
    s.max_sentences = j.value("max_sentences", s.max_sentences);
    s.min_words = j.value("min_words", s.min_words);
    s.max_words = j.value("max_words", s.max_words);
    s.seed = j.value("seed", s.seed);
    s.validate();
    return s;
  }
};

struct GroundTruth {
  unsigned k_true = 0;
  std::vector<std::string> vocab;   // planted terms, id order
  std::vector<double> phi_true;     // k_true * vocab.size()
  std::vector<std::pair<std::string, unsigned>> labels;  // note_id, topic
  std::vector<std::pair<std::string, std::string>> negations;  // note_id, fused
  std::vector<std::string> no_impression_ids;
  std::vector<std::string> empty_ids;
  std::size_t total_notes = 0;
  std::size_t with_impression = 0;
  std::size_t nonempty_after_preprocess = 0;
  std::vector<std::vector<std::string>> topic_terms;  // per-topic blocks

  double phi_at(unsigned k, std::size_t w) const {
    return phi_true[static_cast<std::size_t>(k) * vocab.size() + w];
  }

  nlohmann::json to_json() const {
    nlohmann::json labels_json = nlohmann::json::array();
    for (const auto& [id, t] : labels) labels_json.push_back({id, t});
    nlohmann::json neg_json = nlohmann::json::array();
    for (const auto& [id, tok] : negations) neg_json.push_back({id, tok});
    return {{"k_true", k_true},
            {"vocab", vocab},
            {"phi_true", phi_true},
            {"labels", labels_json},
            {"negations", neg_json},
            {"no_impression_ids", no_impression_ids},
            {"empty_ids", empty_ids},
            {"funnel",
             {{"total", total_notes},
              {"with_impression", with_impression},
              {"nonempty_after_preprocess", nonempty_after_preprocess}}},
            {"topic_terms", topic_terms}};
  }

  static GroundTruth from_json(const nlohmann::json& j) {
    GroundTruth g;
    g.k_true = j.at("k_true").get<unsigned>();
    g.vocab = j.at("vocab").get<std::vector<std::string>>();
    g.phi_true = j.at("phi_true").get<std::vector<double>>();
    for (const auto& row : j.at("labels"))
      g.labels.emplace_back(row[0].get<std::string>(), row[1].get<unsigned>());
    for (const auto& row : j.at("negations"))
      g.negations.emplace_back(row[0].get<std::string>(),
                               row[1].get<std::string>());
    g.no_impression_ids =
        j.at("no_impression_ids").get<std::vector<std::string>>();
    g.empty_ids = j.at("empty_ids").get<std::vector<std::string>>();
    const auto& f = j.at("funnel");
    g.total_notes = f.at("total").get<std::size_t>();
    g.with_impression = f.at("with_impression").get<std::size_t>();
    g.nonempty_after_preprocess =
        f.at("nonempty_after_preprocess").get<std::size_t>();
    g.topic_terms =
        j.at("topic_terms").get<std::vector<std::vector<std::string>>>();
    return g;
  }

  void save(const fs::path& path) const { write_file(path, to_json().dump()); }
  static GroundTruth load(const fs::path& path) {
    return from_json(nlohmann::json::parse(read_file(path)));
  }
};

struct GenResult {
  std::vector<ClinicalNote> notes;
  GroundTruth truth;
};

namespace detail {

// Planted terms are purely alphabetic so normalization passes them through.
inline std::string synth_term(unsigned topic, unsigned word) {
  std::string t = "t";
  t += static_cast<char>('a' + topic % 26);
  t += 'w';
  t += static_cast<char>('a' + (word / 26) % 26);
  t += static_cast<char>('a' + word % 26);
  return t;
}

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(s[0]));
  return s;
}

inline std::string synth_timestamp(std::size_t d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "2024-01-%02uT%02u:%02u:00",
                static_cast<unsigned>(d / 1440 % 28 + 1),
                static_cast<unsigned>(d / 60 % 24),
                static_cast<unsigned>(d % 60));
  return buf;
}

}  // namespace detail

inline GenResult generate(const GeneratorSpec& spec) {
  spec.validate();
  const std::size_t v = spec.vocab_size();

  GenResult result;
  GroundTruth& truth = result.truth;
  truth.k_true = spec.k;
  truth.topic_terms.resize(spec.k);
  for (unsigned t = 0; t < spec.k; ++t)
    for (unsigned w = 0; w < spec.terms_per_topic; ++w) {
      truth.vocab.push_back(detail::synth_term(t, w));
      truth.topic_terms[t].push_back(truth.vocab.back());
    }

  truth.phi_true.assign(static_cast<std::size_t>(spec.k) * v, spec.noise / v);
  for (unsigned t = 0; t < spec.k; ++t)
    for (unsigned w = 0; w < spec.terms_per_topic; ++w)
      truth.phi_true[static_cast<std::size_t>(t) * v + t * spec.terms_per_topic +
                     w] += (1.0 - spec.noise) / spec.terms_per_topic;

  // role assignment: shuffle indices, carve off the drop-stage notes
  std::vector<std::size_t> order(spec.docs);
  for (std::size_t i = 0; i < spec.docs; ++i) order[i] = i;
  SplitMix64 role_rng(mix_seed(spec.seed, 0x726f6c65));  // "role"
  for (std::size_t i = spec.docs; i > 1; --i)
    std::swap(order[i - 1], order[role_rng.uniform_int(i)]);

  auto n_noimp = static_cast<std::size_t>(
      std::llround(spec.frac_no_impression * spec.docs));
  auto n_empty =
      static_cast<std::size_t>(std::llround(spec.frac_empty * spec.docs));
  enum class Role { normal, no_impression, empty };
  std::vector<Role> role(spec.docs, Role::normal);
  for (std::size_t i = 0; i < n_noimp; ++i)
    role[order[i]] = Role::no_impression;
  for (std::size_t i = 0; i < n_empty; ++i)
    role[order[n_noimp + i]] = Role::empty;

  std::size_t n_normal = spec.docs - n_noimp - n_empty;
  auto n_negated = static_cast<std::size_t>(
      std::llround(spec.negation_rate * n_normal));
  std::vector<bool> negated(spec.docs, false);
  for (std::size_t i = n_noimp + n_empty, planted = 0;
       i < spec.docs && planted < n_negated; ++i) {
    negated[order[i]] = true;  // order tail is all normal notes
    ++planted;
  }

  auto draw_word = [&](SplitMix64& rng, unsigned topic) -> std::string {
    if (rng.uniform01() < spec.noise)
      return truth.vocab[rng.uniform_int(v)];
    return truth.topic_terms[topic][rng.uniform_int(spec.terms_per_topic)];
  };

  // glue strictly from the stoplist so generated token streams reduce to
  // exactly the planted content words
  static const char* const kOpeners[] = {"There is", "Stable", "Evidence of",
                                         "See"};

  for (std::size_t d = 0; d < spec.docs; ++d) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "note_%06zu", d);
    ClinicalNote note;
    note.note_id = idbuf;
    note.patient_id = "patient_" + std::to_string(d / 4);
    note.timestamp = detail::synth_timestamp(d);

    unsigned topic = static_cast<unsigned>(d % spec.k);
    SplitMix64 rng(mix_seed(spec.seed, 1, d));

    std::string text = "EXAM: Chest one view\nFINDINGS: The report is stable";
    if (role[d] == Role::no_impression) {
      text += "\n";
      note.raw_text = text;
      truth.no_impression_ids.push_back(note.note_id);
      result.notes.push_back(std::move(note));
      continue;
    }

    text += "\nIMPRESSION: ";
    if (role[d] == Role::empty) {
      text += "Stable chest view final report.";
      truth.empty_ids.push_back(note.note_id);
    } else {
      unsigned n_sent =
          spec.min_sentences +
          static_cast<unsigned>(rng.uniform_int(
              spec.max_sentences - spec.min_sentences + 1));
      std::vector<std::string> sentences;
      for (unsigned s = 0; s < n_sent; ++s) {
        unsigned n_words =
            spec.min_words + static_cast<unsigned>(rng.uniform_int(
                                 spec.max_words - spec.min_words + 1));
        std::string sent = kOpeners[rng.uniform_int(4)];
        for (unsigned w = 0; w < n_words; ++w) {
          sent += ' ';
          sent += draw_word(rng, topic);
        }
        sent += '.';
        sentences.push_back(std::move(sent));
      }
      if (negated[d]) {
        std::string x = truth.topic_terms[topic][rng.uniform_int(
            spec.terms_per_topic)];
        std::string y = truth.topic_terms[topic][rng.uniform_int(
            spec.terms_per_topic)];
        std::size_t at = rng.uniform_int(sentences.size() + 1);
        sentences.insert(sentences.begin() + at, "No " + x + " " + y + ".");
        truth.negations.emplace_back(note.note_id, "no_" + x + "_" + y);
      }
      text += join(sentences, " ");
      truth.labels.emplace_back(note.note_id, topic);
    }
    note.raw_text = text;
    result.notes.push_back(std::move(note));
  }

  truth.total_notes = spec.docs;
  truth.with_impression = spec.docs - n_noimp;
  truth.nonempty_after_preprocess = truth.with_impression - n_empty;
  return result;
}

inline void write_generated(const GenResult& gen, const fs::path& dir) {
  save_corpus_jsonl(dir / "corpus.jsonl", gen.notes);
  gen.truth.save(dir / "groundtruth.json");
}

}  // namespace notemine
