#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "notemine/coherence.hpp"
#include "notemine/corpus.hpp"
#include "notemine/discriminate.hpp"
#include "notemine/lda.hpp"
#include "notemine/negation.hpp"
#include "notemine/report.hpp"
#include "notemine/sectioner.hpp"
#include "notemine/synthgen.hpp"
#include "notemine/vectorize.hpp"

namespace notemine {

// ---------------------------------------------------------------------------
// Sectioned key=value config

struct PipelineConfig {
  std::string raw;
  std::map<std::string, std::map<std::string, std::string>> sections;

  static PipelineConfig parse(const std::string& text,
                              const std::string& origin = "<config>");
  static PipelineConfig load(const fs::path& path) {
    auto cfg = parse(read_file(path), path.string());
    return cfg;
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
  }
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback = "") const {
    auto s = sections.find(section);
    if (s == sections.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const {
    std::string v = to_lower(get(section, key));
    if (v.empty()) return fallback;
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw std::runtime_error("config: bad boolean " + section + "." + key +
                             " = " + v);
  }
  long long get_int(const std::string& section, const std::string& key,
                    long long fallback) const {
    std::string v = get(section, key);
    return v.empty() ? fallback : std::stoll(v);
  }
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const {
    std::string v = get(section, key);
    return v.empty() ? fallback : std::stod(v);
  }

  void validate() const;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"input", {"path", "format"}},
      {"output", {"dir"}},
      {"preprocess",
       {"stoplist", "stem", "split_hyphens", "section_labels"}},
      {"negation", {"lexicon", "window"}},
      {"phrases", {"min_count", "threshold", "passes"}},
      {"tfidf", {"natural_log", "smooth", "normalize"}},
      {"lda",
       {"k", "alpha", "beta", "iterations", "burn_in", "sample_every", "seed",
        "weight_mode", "tfidf_scale"}},
      {"sweep", {"enabled", "kmin", "kmax", "measure"}},
      {"discriminate", {"alpha_level", "top_n", "forward"}},
      {"report",
       {"top_keywords", "rep_threshold", "max_representatives", "labels"}},
  };
  return schema;
}

}  // namespace detail

inline PipelineConfig PipelineConfig::parse(const std::string& text,
                                            const std::string& origin) {
  PipelineConfig cfg;
  cfg.raw = text;
  std::string section;
  std::size_t lineno = 0;
  std::istringstream in(text);
  std::string raw_line;
  while (std::getline(in, raw_line)) {
    ++lineno;
    std::string line = raw_line;
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error(origin + ": line " + std::to_string(lineno) +
                                 ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections[section];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ": line " + std::to_string(lineno) +
                               ": expected key = value");
    if (section.empty())
      throw std::runtime_error(origin + ": line " + std::to_string(lineno) +
                               ": key outside any section");
    cfg.sections[section][trim(line.substr(0, eq))] =
        trim(line.substr(eq + 1));
  }
  return cfg;
}

inline void PipelineConfig::validate() const {
  const auto& schema = detail::config_schema();
  for (const auto& [section, keys] : sections) {
    auto s = schema.find(section);
    if (s == schema.end())
      throw std::runtime_error("config: unknown section [" + section + "]");
    for (const auto& [key, _] : keys)
      if (!s->second.count(key))
        throw std::runtime_error("config: unknown key " + section + "." + key);
  }
  if (get("input", "path").empty())
    throw std::runtime_error("config: input.path is required");
  if (get("output", "dir").empty())
    throw std::runtime_error("config: output.dir is required");
  for (const char* key : {"stoplist"})
    if (!get("preprocess", key).empty() && !fs::exists(get("preprocess", key)))
      throw std::runtime_error("config: preprocess." + std::string(key) +
                               " does not exist: " + get("preprocess", key));
  if (!get("negation", "lexicon").empty() &&
      !fs::exists(get("negation", "lexicon")))
    throw std::runtime_error("config: negation.lexicon does not exist: " +
                             get("negation", "lexicon"));
  if (!get("report", "labels").empty() && !fs::exists(get("report", "labels")))
    throw std::runtime_error("config: report.labels does not exist: " +
                             get("report", "labels"));
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineError : std::runtime_error {
  std::string stage;
  PipelineError(std::string stage_, const std::string& what_)
      : std::runtime_error(what_), stage(std::move(stage_)) {}
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config)
      : cfg_(std::move(config)), out_(cfg_.get("output", "dir")) {
    cfg_.validate();
  }

  // Full run. With resume=true, stages whose recorded inputs and outputs
  // still hash-match are skipped and their artifacts reloaded on demand.
  void run(bool resume = false);

  const CorpusStats& stats() const { return stats_; }
  const fs::path& out_dir() const { return out_; }

 private:
  using StageFn = void (Pipeline::*)();

  struct StageDef {
    const char* name;
    StageFn fn;
  };

  std::vector<StageDef> stage_list() {
    std::vector<StageDef> stages{
        {"ingest", &Pipeline::stage_ingest},
        {"preprocess", &Pipeline::stage_preprocess},
        {"negate", &Pipeline::stage_negate},
        {"phrases", &Pipeline::stage_phrases},
        {"vectorize", &Pipeline::stage_vectorize},
    };
    if (cfg_.get_bool("sweep", "enabled", true))
      stages.push_back({"sweep", &Pipeline::stage_sweep});
    else
      stages.push_back({"fit", &Pipeline::stage_fit});
    stages.push_back({"discriminate", &Pipeline::stage_discriminate});
    stages.push_back({"report", &Pipeline::stage_report});
    return stages;
  }

  // --- stage bodies ---
  void stage_ingest();
  void stage_preprocess();
  void stage_negate();
  void stage_phrases();
  void stage_vectorize();
  void stage_sweep();
  void stage_fit();
  void stage_discriminate();
  void stage_report();

  // --- lazy artifact access for skipped stages ---
  std::vector<ClinicalNote>& notes();
  std::vector<TokenizedDoc>& preprocessed();
  std::vector<TokenizedDoc>& negated();
  std::vector<TokenizedDoc>& phrased();
  Vocabulary& vocab();
  SparseCorpus& corpus();
  TopicModel& model();
  FeatureRanking& ranking();
  CorpusStats& funnel();

  Stoplist active_stoplist() const {
    std::string path = cfg_.get("preprocess", "stoplist");
    return path.empty() ? Stoplist::bundled() : Stoplist::load(path);
  }
  TriggerLexicon active_lexicon() const {
    std::string path = cfg_.get("negation", "lexicon");
    return path.empty() ? TriggerLexicon::bundled()
                        : TriggerLexicon::load(path);
  }
  SectionerOptions sectioner_options() const {
    SectionerOptions opt;
    std::string labels = cfg_.get("preprocess", "section_labels");
    if (!labels.empty()) {
      opt.labels.clear();
      std::string cur;
      for (char c : labels + ",") {
        if (c == ',') {
          std::string t = trim(cur);
          if (!t.empty()) opt.labels.push_back(t);
          cur.clear();
        } else {
          cur.push_back(c);
        }
      }
    }
    return opt;
  }
  LdaConfig lda_config() const {
    LdaConfig c;
    c.k = static_cast<unsigned>(cfg_.get_int("lda", "k", 5));
    c.alpha = cfg_.get_double("lda", "alpha", 0.0);
    c.beta = cfg_.get_double("lda", "beta", 0.01);
    c.iterations =
        static_cast<unsigned>(cfg_.get_int("lda", "iterations", 1000));
    c.burn_in = static_cast<unsigned>(cfg_.get_int("lda", "burn_in", 500));
    c.sample_every =
        static_cast<unsigned>(cfg_.get_int("lda", "sample_every", 10));
    c.seed = static_cast<std::uint64_t>(cfg_.get_int("lda", "seed", 42));
    c.weight_mode =
        parse_weight_mode(cfg_.get("lda", "weight_mode", "scaled_tfidf"));
    c.tfidf_scale = cfg_.get_double("lda", "tfidf_scale", 20.0);
    return c;
  }
  TokenStreams streams() {
    LdaConfig c = lda_config();
    return prepare_tokens(corpus(), vocab().size(), c.weight_mode,
                          c.tfidf_scale);
  }

  // --- resume bookkeeping ---
  fs::path stage_dir(const std::string& name) const { return out_ / name; }
  fs::path state_path(const std::string& name) const {
    return out_ / ".stages" / (name + ".json");
  }
  void record_stage(const std::string& name,
                    const std::vector<fs::path>& outputs);
  bool stage_current(const std::string& name);

  PipelineConfig cfg_;
  fs::path out_;
  std::string chain_;  // rolling hash over config, input, stage outputs

  std::optional<std::vector<ClinicalNote>> notes_;
  std::optional<std::vector<TokenizedDoc>> preprocessed_;
  std::optional<std::vector<TokenizedDoc>> negated_;
  std::optional<std::vector<TokenizedDoc>> phrased_;
  std::optional<Vocabulary> vocab_;
  std::optional<SparseCorpus> corpus_;
  std::optional<TopicModel> model_;
  std::optional<FeatureRanking> ranking_;
  std::optional<SweepResult> sweep_;
  CorpusStats stats_;
  bool stats_loaded_ = false;
  std::map<std::string, std::map<std::string, std::string>> manifest_stages_;
};

// ---------------------------------------------------------------------------

inline void Pipeline::record_stage(const std::string& name,
                                   const std::vector<fs::path>& outputs) {
  nlohmann::json state;
  state["chain_in"] = chain_;
  nlohmann::json outs;
  for (const auto& p : outputs)
    outs[fs::relative(p, out_).generic_string()] = hash_file_hex(p);
  // Chain in key order so a resumed (skipped) stage advances the chain
  // exactly as the original run did.
  std::string combined = chain_;
  for (auto& [rel, h] : outs.items()) combined += h.get<std::string>();
  state["outputs"] = outs;
  write_file(state_path(name), state.dump());
  for (auto& [rel, h] : outs.items())
    manifest_stages_[name][rel] = h.get<std::string>();
  chain_ = hex64(fnv1a64(combined));
}

inline bool Pipeline::stage_current(const std::string& name) {
  fs::path sp = state_path(name);
  if (!fs::exists(sp)) return false;
  nlohmann::json state;
  try {
    state = nlohmann::json::parse(read_file(sp));
  } catch (...) {
    return false;
  }
  if (state.value("chain_in", "") != chain_) return false;
  std::string combined = chain_;
  for (auto& [rel, h] : state.at("outputs").items()) {
    fs::path p = out_ / rel;
    if (!fs::exists(p) || hash_file_hex(p) != h.get<std::string>())
      return false;
    combined += h.get<std::string>();
  }
  for (auto& [rel, h] : state.at("outputs").items())
    manifest_stages_[name][rel] = h.get<std::string>();
  chain_ = hex64(fnv1a64(combined));
  return true;
}

inline void Pipeline::run(bool resume) {
  fs::create_directories(out_ / ".stages");
  std::string input_hash;
  try {
    input_hash = hash_file_hex(cfg_.get("input", "path"));
  } catch (const std::exception& e) {
    throw PipelineError("ingest", e.what());
  }
  chain_ = hex64(fnv1a64(hex64(fnv1a64(cfg_.raw)) + input_hash));
  manifest_stages_.clear();

  for (const auto& stage : stage_list()) {
    if (resume && stage_current(stage.name)) {
      std::fprintf(stderr, "[%s] up to date, skipped\n", stage.name);
      continue;
    }
    std::fprintf(stderr, "[%s] running\n", stage.name);
    try {
      (this->*stage.fn)();
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(stage.name, e.what());
    }
  }
}

// --- lazy loaders -----------------------------------------------------------

inline std::vector<ClinicalNote>& Pipeline::notes() {
  if (!notes_)
    notes_ = load_corpus(stage_dir("ingest") / "corpus.jsonl",
                         CorpusFormat::jsonl);
  return *notes_;
}
inline std::vector<TokenizedDoc>& Pipeline::preprocessed() {
  if (!preprocessed_)
    preprocessed_ =
        load_tokenized_jsonl(stage_dir("preprocess") / "tokens.jsonl");
  return *preprocessed_;
}
inline std::vector<TokenizedDoc>& Pipeline::negated() {
  if (!negated_)
    negated_ = load_tokenized_jsonl(stage_dir("negate") / "tokens.jsonl");
  return *negated_;
}
inline std::vector<TokenizedDoc>& Pipeline::phrased() {
  if (!phrased_)
    phrased_ = load_tokenized_jsonl(stage_dir("phrases") / "tokens.jsonl");
  return *phrased_;
}
inline Vocabulary& Pipeline::vocab() {
  if (!vocab_) vocab_ = load_vocabulary(stage_dir("vectorize") / "vocab.tsv");
  return *vocab_;
}
inline SparseCorpus& Pipeline::corpus() {
  if (!corpus_) {
    SparseCorpus c = load_sparse_counts(stage_dir("vectorize") / "corpus.counts");
    load_sparse_weights(stage_dir("vectorize") / "corpus.tfidf", c);
    corpus_ = std::move(c);
  }
  return *corpus_;
}
inline TopicModel& Pipeline::model() {
  if (!model_) model_ = TopicModel::load(out_ / "model" / "model.json");
  return *model_;
}
inline CorpusStats& Pipeline::funnel() {
  if (!stats_loaded_) {
    stats_ = funnel_from_json(
        nlohmann::json::parse(read_file(stage_dir("negate") / "funnel.json")));
    stats_loaded_ = true;
  }
  return stats_;
}
inline FeatureRanking& Pipeline::ranking() {
  if (!ranking_) {
    auto j = nlohmann::json::parse(
        read_file(stage_dir("discriminate") / "ranking.json"));
    FeatureRanking r;
    r.alpha_level = j.at("alpha_level").get<double>();
    r.k_count = j.at("k").get<unsigned>();
    r.forward_mode = j.at("forward").get<bool>();
    r.topic_totals = j.at("topic_totals").get<std::vector<std::uint64_t>>();
    for (const auto& row : j.at("rows")) {
      FeatureStats f;
      f.term_id = row.at("term_id").get<std::uint32_t>();
      f.term = row.at("term").get<std::string>();
      f.chi2 = row.at("chi2").get<double>();
      f.dof = row.at("dof").get<unsigned>();
      f.p_value = row.at("p_value").get<double>();
      f.present = row.at("present").get<std::vector<std::uint64_t>>();
      r.rows.push_back(std::move(f));
    }
    ranking_ = std::move(r);
  }
  return *ranking_;
}

// --- stages -----------------------------------------------------------------

inline void Pipeline::stage_ingest() {
  auto format = parse_corpus_format(cfg_.get("input", "format", "jsonl"));
  notes_ = load_corpus(cfg_.get("input", "path"), format);
  stats_ = CorpusStats{};
  stats_.total_notes = notes_->size();
  fs::path p = stage_dir("ingest") / "corpus.jsonl";
  save_corpus_jsonl(p, *notes_);
  record_stage("ingest", {p});
}

inline void Pipeline::stage_preprocess() {
  Stoplist stoplist = active_stoplist();
  TriggerLexicon lexicon = active_lexicon();
  Stoplist effective = stoplist.without(lexicon.cue_tokens());
  NormalizeOptions nopt;
  nopt.stem = cfg_.get_bool("preprocess", "stem", false);
  nopt.split_hyphens = cfg_.get_bool("preprocess", "split_hyphens", false);
  SectionerOptions sopt = sectioner_options();

  stats_.total_notes = notes().size();
  stats_.notes_with_impression = 0;
  stats_.dropped.clear();

  std::vector<TokenizedDoc> docs;
  std::string impressions;
  for (const auto& note : notes()) {
    TokenizedDoc doc;
    std::string impression;
    auto outcome = preprocess_note(note, effective, nopt, doc, sopt,
                                   &impression);
    switch (outcome) {
      case PreprocessOutcome::no_impression:
        stats_.dropped.emplace_back(note.note_id, DropStage::no_impression);
        continue;
      case PreprocessOutcome::emptied:
        ++stats_.notes_with_impression;
        stats_.dropped.emplace_back(note.note_id, DropStage::emptied);
        continue;
      case PreprocessOutcome::ok:
        ++stats_.notes_with_impression;
        docs.push_back(std::move(doc));
        break;
    }
    impressions += nlohmann::json{{"note_id", note.note_id},
                                  {"impression", impression}}
                       .dump() +
                   "\n";
  }
  preprocessed_ = std::move(docs);

  fs::path tokens = stage_dir("preprocess") / "tokens.jsonl";
  fs::path impr = stage_dir("preprocess") / "impressions.jsonl";
  fs::path partial = stage_dir("preprocess") / "funnel.json";
  save_tokenized_jsonl(tokens, *preprocessed_);
  write_file(impr, impressions);
  write_file(partial, funnel_to_json(stats_).dump());
  record_stage("preprocess", {tokens, impr, partial});
}

inline void Pipeline::stage_negate() {
  Stoplist stoplist = active_stoplist();
  TriggerLexicon lexicon = active_lexicon();
  TriggerIndex index(lexicon);
  auto cues = lexicon.cue_tokens();
  NegationOptions nopt;
  nopt.window =
      static_cast<std::size_t>(cfg_.get_int("negation", "window", 5));

  // start from the persisted preprocess funnel so a resumed run and a
  // fresh run agree
  stats_ = funnel_from_json(nlohmann::json::parse(
      read_file(stage_dir("preprocess") / "funnel.json")));

  std::vector<TokenizedDoc> docs;
  std::vector<NegationSpan> spans;
  std::size_t fused_total = 0;
  for (const auto& doc : preprocessed()) {
    spans.clear();
    TokenizedDoc out = negate_doc(doc, index, stoplist, cues, nopt, &spans);
    fused_total += spans.size();
    if (out.sentences.empty()) {
      stats_.dropped.emplace_back(doc.note_id, DropStage::emptied);
      continue;
    }
    docs.push_back(std::move(out));
  }
  negated_ = std::move(docs);
  stats_.notes_nonempty_after_preprocess = negated_->size();
  stats_loaded_ = true;

  fs::path tokens = stage_dir("negate") / "tokens.jsonl";
  fs::path funnel_path = stage_dir("negate") / "funnel.json";
  save_tokenized_jsonl(tokens, *negated_);
  write_file(funnel_path, funnel_to_json(stats_).dump());
  std::fprintf(stderr, "[negate] fused %zu spans\n", fused_total);
  record_stage("negate", {tokens, funnel_path});
}

inline void Pipeline::stage_phrases() {
  PhraseOptions popt;
  popt.min_count =
      static_cast<std::uint32_t>(cfg_.get_int("phrases", "min_count", 5));
  popt.threshold = cfg_.get_double("phrases", "threshold", 10.0);
  popt.passes = static_cast<int>(cfg_.get_int("phrases", "passes", 1));

  phrased_ = detect_phrases(negated(), popt);
  fs::path tokens = stage_dir("phrases") / "tokens.jsonl";
  save_tokenized_jsonl(tokens, *phrased_);
  record_stage("phrases", {tokens});
}

inline void Pipeline::stage_vectorize() {
  auto [vocab, corpus] = build_vocabulary(phrased());
  TfidfOptions topt;
  topt.natural_log = cfg_.get_bool("tfidf", "natural_log", false);
  topt.smooth = cfg_.get_bool("tfidf", "smooth", false);
  topt.normalize = cfg_.get_bool("tfidf", "normalize", true);
  tfidf(corpus, vocab, topt);

  fs::path vp = stage_dir("vectorize") / "vocab.tsv";
  fs::path cp = stage_dir("vectorize") / "corpus.counts";
  fs::path wp = stage_dir("vectorize") / "corpus.tfidf";
  save_vocabulary(vp, vocab);
  save_sparse_counts(cp, corpus);
  save_sparse_weights(wp, corpus);
  vocab_ = std::move(vocab);
  corpus_ = std::move(corpus);
  record_stage("vectorize", {vp, cp, wp});
}

inline void Pipeline::stage_fit() {
  LdaConfig c = lda_config();
  TokenStreams st = streams();
  TopicModel m = fit(st, c);
  m.vocab_hash = hash_file_hex(stage_dir("vectorize") / "vocab.tsv");
  fs::path mp = out_ / "model" / "model.json";
  m.save(mp);
  model_ = std::move(m);
  record_stage("fit", {mp});
}

inline void Pipeline::stage_sweep() {
  LdaConfig base = lda_config();
  auto kmin = static_cast<unsigned>(cfg_.get_int("sweep", "kmin", 2));
  auto kmax = static_cast<unsigned>(cfg_.get_int("sweep", "kmax", 10));
  if (kmin < 1 || kmax < kmin)
    throw std::runtime_error("sweep: bad k range");
  auto measure =
      parse_coherence_measure(cfg_.get("sweep", "measure", "umass"));
  std::vector<unsigned> grid;
  for (unsigned k = kmin; k <= kmax; ++k) grid.push_back(k);

  TokenStreams st = streams();
  SweepInputs in;
  in.streams = &st;
  in.counts = &corpus();
  auto& docs = phrased();
  in.docs = &docs;
  in.vocab = &vocab();

  fs::path models_dir = stage_dir("sweep") / "models";
  TopicModel selected;
  sweep_ = sweep(in, grid, base, measure, &models_dir, &selected);

  selected.vocab_hash = hash_file_hex(stage_dir("vectorize") / "vocab.tsv");
  fs::path mp = out_ / "model" / "model.json";
  selected.save(mp);
  model_ = std::move(selected);

  fs::path tsv = stage_dir("sweep") / "sweep.tsv";
  fs::path js = stage_dir("sweep") / "sweep.json";
  fs::path svg = stage_dir("sweep") / "coherence.svg";
  write_file(tsv, sweep_->tsv());
  write_file(js, sweep_->to_json().dump());
  write_file(svg, coherence_svg(*sweep_));

  std::vector<fs::path> outputs{tsv, js, svg, mp};
  for (const auto& r : sweep_->records)
    if (!r.model_path.empty()) outputs.push_back(r.model_path);
  record_stage("sweep", outputs);
}

inline void Pipeline::stage_discriminate() {
  auto assignments = dominant_topics(model());
  double alpha = cfg_.get_double("discriminate", "alpha_level", 0.01);
  auto top_n =
      static_cast<std::size_t>(cfg_.get_int("discriminate", "top_n", 20));
  bool forward = cfg_.get_bool("discriminate", "forward", false);
  ranking_ = rank_features(corpus(), vocab(), assignments, model().config.k,
                           alpha, top_n, forward);

  fs::path tsv = stage_dir("discriminate") / "ranking.tsv";
  fs::path js = stage_dir("discriminate") / "ranking.json";
  write_file(tsv, ranking_tsv(*ranking_));
  write_file(js, ranking_->to_json().dump());
  record_stage("discriminate", {tsv, js});
}

inline void Pipeline::stage_report() {
  auto assignments = dominant_topics(model());
  auto top_n =
      static_cast<std::size_t>(cfg_.get_int("report", "top_keywords", 10));
  double threshold = cfg_.get_double("report", "rep_threshold", 0.80);
  auto max_reps = static_cast<std::size_t>(
      cfg_.get_int("report", "max_representatives", 3));

  std::map<unsigned, std::string> labels;
  const std::map<unsigned, std::string>* labels_ptr = nullptr;
  std::string labels_path = cfg_.get("report", "labels");
  if (!labels_path.empty()) {
    labels = load_topic_labels(labels_path);
    labels_ptr = &labels;
  }

  std::map<std::string, std::string> impressions;
  fs::path impr = stage_dir("preprocess") / "impressions.jsonl";
  if (fs::exists(impr)) {
    for (const auto& line : read_lines(impr)) {
      if (trim(line).empty()) continue;
      auto j = nlohmann::json::parse(line);
      impressions[j.at("note_id").get<std::string>()] =
          j.at("impression").get<std::string>();
    }
  }

  auto rows = build_table1(model(), assignments, vocab(), top_n, threshold,
                           max_reps, labels_ptr);
  unsigned interest = ranking().rows.empty() ? 0 : topic_of_interest(ranking());

  fs::path dir = stage_dir("report");
  std::vector<fs::path> outputs;
  auto emit = [&](const char* name, const std::string& content) {
    fs::path p = dir / name;
    write_file(p, content);
    outputs.push_back(p);
  };
  emit("table1.md", table1_markdown(rows, &impressions));
  emit("table1.csv", table1_csv(rows));
  emit("table2.md", table2_markdown(ranking()));
  emit("table2.csv", table2_csv(ranking()));
  emit("funnel.txt", funnel_report(funnel()));
  if (sweep_) emit("coherence.svg", coherence_svg(*sweep_));

  std::string summary = "topic_of_interest\t" + std::to_string(interest) + "\n";
  summary += "k\t" + std::to_string(model().config.k) + "\n";
  emit("summary.tsv", summary);
  record_stage("report", outputs);

  // manifest last: covers config, input, every stage artifact
  nlohmann::json manifest;
  manifest["version"] = "0.1.0";
  manifest["config"] = cfg_.raw;
  manifest["input"] = {{"path", cfg_.get("input", "path")},
                       {"hash", hash_file_hex(cfg_.get("input", "path"))}};
  manifest["seed"] = lda_config().seed;
  nlohmann::json stages;
  for (const auto& [stage, outs] : manifest_stages_) {
    nlohmann::json entry;
    for (const auto& [rel, h] : outs) entry[rel] = h;
    stages[stage] = entry;
  }
  manifest["stages"] = stages;
  write_file(out_ / "manifest.json", manifest.dump(2));
}

}  // namespace notemine
