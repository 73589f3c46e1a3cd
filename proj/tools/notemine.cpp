// notemine: mine latent themes from clinical procedure notes.
// Subcommands cover each pipeline stage plus an end-to-end `run`.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "notemine/pipeline.hpp"

using namespace notemine;

namespace {

Stoplist stoplist_from(const std::string& path) {
  return path.empty() ? Stoplist::bundled() : Stoplist::load(path);
}

TriggerLexicon lexicon_from(const std::string& path) {
  return path.empty() ? TriggerLexicon::bundled() : TriggerLexicon::load(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topic mining over clinical note impressions"};
  app.require_subcommand(1);

  // --- ingest ---
  std::string in_path, in_format = "jsonl", out_dir;
  auto* ingest = app.add_subcommand("ingest", "load and canonicalize a corpus");
  ingest->add_option("--input", in_path, "corpus file")->required();
  ingest->add_option("--format", in_format, "jsonl or csv");
  ingest->add_option("--out", out_dir, "output directory")->required();

  // --- preprocess ---
  std::string pp_in, pp_out, pp_stoplist, pp_lexicon, pp_impressions,
      pp_funnel;
  bool pp_stem = false, pp_split_hyphens = false;
  auto* preprocess =
      app.add_subcommand("preprocess", "extract impressions into tokens");
  preprocess->add_option("--input", pp_in, "corpus jsonl")->required();
  preprocess->add_option("--out", pp_out, "tokens jsonl")->required();
  preprocess->add_option("--stoplist", pp_stoplist, "stoplist file");
  preprocess->add_option("--lexicon", pp_lexicon,
                         "negation lexicon (its cue words are kept)");
  preprocess->add_option("--impressions", pp_impressions,
                         "write raw impressions jsonl here");
  preprocess->add_option("--funnel", pp_funnel, "write funnel json here");
  preprocess->add_flag("--stem", pp_stem, "light suffix stripping");
  preprocess->add_flag("--split-hyphens", pp_split_hyphens,
                       "split on hyphens instead of deleting them");

  // --- negate ---
  std::string ng_in, ng_out, ng_lexicon, ng_stoplist, ng_funnel_in,
      ng_funnel_out;
  std::size_t ng_window = 5;
  auto* negate = app.add_subcommand("negate", "fuse negated phrases");
  negate->add_option("--input", ng_in, "tokens jsonl")->required();
  negate->add_option("--out", ng_out, "tokens jsonl")->required();
  negate->add_option("--lexicon", ng_lexicon, "trigger lexicon file");
  negate->add_option("--stoplist", ng_stoplist, "stoplist file");
  negate->add_option("--window", ng_window, "scope window in tokens");
  negate->add_option("--funnel-in", ng_funnel_in, "funnel json to extend");
  negate->add_option("--funnel-out", ng_funnel_out, "funnel json to write");

  // --- vectorize ---
  std::string vz_in, vz_out;
  std::uint32_t vz_min_count = 5;
  double vz_threshold = 10.0;
  int vz_passes = 1;
  bool vz_natural = false, vz_smooth = false, vz_no_norm = false;
  auto* vectorize =
      app.add_subcommand("vectorize", "phrases, vocabulary, counts, tf-idf");
  vectorize->add_option("--input", vz_in, "tokens jsonl")->required();
  vectorize->add_option("--out", vz_out, "output directory")->required();
  vectorize->add_option("--min-count", vz_min_count, "phrase min pair count");
  vectorize->add_option("--threshold", vz_threshold, "phrase score threshold");
  vectorize->add_option("--passes", vz_passes, "phrase passes");
  vectorize->add_flag("--natural-log", vz_natural, "idf with natural log");
  vectorize->add_flag("--smooth", vz_smooth, "smoothed idf");
  vectorize->add_flag("--no-normalize", vz_no_norm, "skip L2 normalization");

  // --- fit ---
  std::string ft_corpus, ft_out, ft_mode = "scaled_tfidf";
  LdaConfig ft_cfg;
  auto* fit_cmd = app.add_subcommand("fit", "fit one LDA model");
  fit_cmd->add_option("--corpus", ft_corpus, "vectorize output dir")
      ->required();
  fit_cmd->add_option("--out", ft_out, "model json path")->required();
  fit_cmd->add_option("--k", ft_cfg.k, "topic count");
  fit_cmd->add_option("--alpha", ft_cfg.alpha, "doc-topic prior (0 = 50/k)");
  fit_cmd->add_option("--beta", ft_cfg.beta, "topic-word prior");
  fit_cmd->add_option("--iterations", ft_cfg.iterations, "gibbs sweeps");
  fit_cmd->add_option("--burn-in", ft_cfg.burn_in, "burn-in sweeps");
  fit_cmd->add_option("--sample-every", ft_cfg.sample_every,
                      "sampling stride after burn-in");
  fit_cmd->add_option("--seed", ft_cfg.seed, "rng seed");
  fit_cmd->add_option("--weight-mode", ft_mode, "counts or scaled_tfidf");
  fit_cmd->add_option("--scale", ft_cfg.tfidf_scale, "tf-idf count scale");

  // --- sweep ---
  std::string sw_corpus, sw_tokens, sw_out, sw_measure = "umass",
              sw_mode = "scaled_tfidf";
  unsigned sw_kmin = 2, sw_kmax = 10;
  LdaConfig sw_cfg;
  auto* sweep_cmd = app.add_subcommand("sweep", "select k by coherence");
  sweep_cmd->add_option("--corpus", sw_corpus, "vectorize output dir")
      ->required();
  sweep_cmd->add_option("--tokens", sw_tokens, "tokens jsonl (npmi only)");
  sweep_cmd->add_option("--out", sw_out, "output directory")->required();
  sweep_cmd->add_option("--kmin", sw_kmin, "smallest k");
  sweep_cmd->add_option("--kmax", sw_kmax, "largest k");
  sweep_cmd->add_option("--measure", sw_measure, "umass or npmi");
  sweep_cmd->add_option("--seed", sw_cfg.seed, "base seed (per-k seed adds k)");
  sweep_cmd->add_option("--iterations", sw_cfg.iterations, "gibbs sweeps");
  sweep_cmd->add_option("--burn-in", sw_cfg.burn_in, "burn-in sweeps");
  sweep_cmd->add_option("--weight-mode", sw_mode, "counts or scaled_tfidf");
  sweep_cmd->add_option("--scale", sw_cfg.tfidf_scale, "tf-idf count scale");

  // --- discriminate ---
  std::string dc_model, dc_corpus, dc_out;
  double dc_alpha = 0.01;
  std::size_t dc_top_n = 20;
  bool dc_forward = false;
  auto* discriminate =
      app.add_subcommand("discriminate", "chi-square feature ranking");
  discriminate->add_option("--model", dc_model, "model json")->required();
  discriminate->add_option("--corpus", dc_corpus, "vectorize output dir")
      ->required();
  discriminate->add_option("--out", dc_out, "output directory")->required();
  discriminate->add_option("--alpha-level", dc_alpha, "significance level");
  discriminate->add_option("--top-n", dc_top_n, "features to keep");
  discriminate->add_flag("--forward", dc_forward, "greedy forward selection");

  // --- report ---
  std::string rp_model, rp_corpus, rp_ranking, rp_funnel, rp_out, rp_labels,
      rp_impressions;
  std::size_t rp_top = 10, rp_max_reps = 3;
  double rp_threshold = 0.80;
  auto* report = app.add_subcommand("report", "render tables and funnel");
  report->add_option("--model", rp_model, "model json")->required();
  report->add_option("--corpus", rp_corpus, "vectorize output dir")
      ->required();
  report->add_option("--ranking", rp_ranking, "ranking json")->required();
  report->add_option("--out", rp_out, "output directory")->required();
  report->add_option("--funnel", rp_funnel, "funnel json");
  report->add_option("--labels", rp_labels, "topic label file");
  report->add_option("--impressions", rp_impressions, "impressions jsonl");
  report->add_option("--top-keywords", rp_top, "keywords per topic");
  report->add_option("--rep-threshold", rp_threshold,
                     "representative-note contribution threshold");
  report->add_option("--max-representatives", rp_max_reps,
                     "representative notes per topic");

  // --- synth ---
  std::string sy_out, sy_spec;
  GeneratorSpec sy;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", sy_out, "output directory")->required();
  synth->add_option("--spec", sy_spec, "generator spec json");
  synth->add_option("--docs", sy.docs, "note count");
  synth->add_option("--k", sy.k, "true topic count");
  synth->add_option("--terms-per-topic", sy.terms_per_topic, "block size");
  synth->add_option("--seed", sy.seed, "rng seed");
  synth->add_option("--noise", sy.noise, "off-block word probability");
  synth->add_option("--negation-rate", sy.negation_rate,
                    "fraction of notes given a negated sentence");
  synth->add_option("--frac-no-impression", sy.frac_no_impression,
                    "fraction of notes without an IMPRESSION");
  synth->add_option("--frac-empty", sy.frac_empty,
                    "fraction of notes whose impression is all stop words");

  // --- run ---
  std::string rn_config;
  bool rn_resume = false;
  auto* run = app.add_subcommand("run", "full pipeline from a config file");
  run->add_option("--config", rn_config, "pipeline config")->required();
  run->add_flag("--resume", rn_resume, "skip stages whose artifacts are current");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      auto notes = load_corpus(in_path, parse_corpus_format(in_format));
      save_corpus_jsonl(fs::path(out_dir) / "corpus.jsonl", notes);
      std::printf("loaded %zu notes\n", notes.size());
    } else if (*preprocess) {
      auto notes = load_corpus(pp_in, CorpusFormat::jsonl);
      Stoplist stoplist = stoplist_from(pp_stoplist);
      TriggerLexicon lexicon = lexicon_from(pp_lexicon);
      Stoplist effective = stoplist.without(lexicon.cue_tokens());
      NormalizeOptions nopt;
      nopt.stem = pp_stem;
      nopt.split_hyphens = pp_split_hyphens;
      CorpusStats stats;
      stats.total_notes = notes.size();
      std::vector<TokenizedDoc> docs;
      std::string impressions;
      for (const auto& note : notes) {
        TokenizedDoc doc;
        std::string impression;
        auto outcome =
            preprocess_note(note, effective, nopt, doc, {}, &impression);
        if (outcome == PreprocessOutcome::no_impression) {
          stats.dropped.emplace_back(note.note_id, DropStage::no_impression);
          continue;
        }
        ++stats.notes_with_impression;
        if (outcome == PreprocessOutcome::emptied) {
          stats.dropped.emplace_back(note.note_id, DropStage::emptied);
          continue;
        }
        docs.push_back(std::move(doc));
        impressions += nlohmann::json{{"note_id", note.note_id},
                                      {"impression", impression}}
                           .dump() +
                       "\n";
      }
      save_tokenized_jsonl(pp_out, docs);
      if (!pp_impressions.empty()) write_file(pp_impressions, impressions);
      if (!pp_funnel.empty())
        write_file(pp_funnel, funnel_to_json(stats).dump());
      std::printf("%zu notes in, %zu docs out\n", notes.size(), docs.size());
    } else if (*negate) {
      auto docs = load_tokenized_jsonl(ng_in);
      Stoplist stoplist = stoplist_from(ng_stoplist);
      TriggerLexicon lexicon = lexicon_from(ng_lexicon);
      TriggerIndex index(lexicon);
      auto cues = lexicon.cue_tokens();
      NegationOptions nopt;
      nopt.window = ng_window;
      CorpusStats stats;
      if (!ng_funnel_in.empty())
        stats = funnel_from_json(nlohmann::json::parse(read_file(ng_funnel_in)));
      std::vector<TokenizedDoc> out;
      std::size_t fused = 0;
      for (const auto& doc : docs) {
        std::vector<NegationSpan> spans;
        TokenizedDoc nd = negate_doc(doc, index, stoplist, cues, nopt, &spans);
        fused += spans.size();
        if (nd.sentences.empty()) {
          stats.dropped.emplace_back(doc.note_id, DropStage::emptied);
          continue;
        }
        out.push_back(std::move(nd));
      }
      stats.notes_nonempty_after_preprocess = out.size();
      save_tokenized_jsonl(ng_out, out);
      if (!ng_funnel_out.empty())
        write_file(ng_funnel_out, funnel_to_json(stats).dump());
      std::printf("fused %zu spans, %zu docs out\n", fused, out.size());
    } else if (*vectorize) {
      auto docs = load_tokenized_jsonl(vz_in);
      PhraseOptions popt;
      popt.min_count = vz_min_count;
      popt.threshold = vz_threshold;
      popt.passes = vz_passes;
      auto fused = detect_phrases(docs, popt);
      auto [vocab, corpus] = build_vocabulary(fused);
      TfidfOptions topt;
      topt.natural_log = vz_natural;
      topt.smooth = vz_smooth;
      topt.normalize = !vz_no_norm;
      tfidf(corpus, vocab, topt);
      fs::path dir(vz_out);
      save_tokenized_jsonl(dir / "tokens.jsonl", fused);
      save_vocabulary(dir / "vocab.tsv", vocab);
      save_sparse_counts(dir / "corpus.counts", corpus);
      save_sparse_weights(dir / "corpus.tfidf", corpus);
      std::printf("%zu docs, %zu terms\n", corpus.num_docs(), vocab.size());
    } else if (*fit_cmd) {
      fs::path dir(ft_corpus);
      auto vocab = load_vocabulary(dir / "vocab.tsv");
      auto corpus = load_sparse_counts(dir / "corpus.counts");
      ft_cfg.weight_mode = parse_weight_mode(ft_mode);
      if (ft_cfg.weight_mode == WeightMode::scaled_tfidf)
        load_sparse_weights(dir / "corpus.tfidf", corpus);
      auto streams = prepare_tokens(corpus, vocab.size(), ft_cfg.weight_mode,
                                    ft_cfg.tfidf_scale);
      TopicModel model = fit(streams, ft_cfg);
      model.vocab_hash = hash_file_hex(dir / "vocab.tsv");
      model.save(ft_out);
      std::printf("fitted k=%u on %zu docs\n", ft_cfg.k, corpus.num_docs());
    } else if (*sweep_cmd) {
      fs::path dir(sw_corpus);
      auto vocab = load_vocabulary(dir / "vocab.tsv");
      auto corpus = load_sparse_counts(dir / "corpus.counts");
      sw_cfg.weight_mode = parse_weight_mode(sw_mode);
      if (sw_cfg.weight_mode == WeightMode::scaled_tfidf)
        load_sparse_weights(dir / "corpus.tfidf", corpus);
      auto streams = prepare_tokens(corpus, vocab.size(), sw_cfg.weight_mode,
                                    sw_cfg.tfidf_scale);
      auto measure = parse_coherence_measure(sw_measure);
      std::vector<TokenizedDoc> docs;
      if (measure == CoherenceMeasure::npmi) {
        if (sw_tokens.empty())
          throw std::runtime_error("npmi needs --tokens");
        docs = load_tokenized_jsonl(sw_tokens);
      }
      if (sw_kmin < 1 || sw_kmax < sw_kmin)
        throw std::runtime_error("bad k range");
      std::vector<unsigned> grid;
      for (unsigned k = sw_kmin; k <= sw_kmax; ++k) grid.push_back(k);
      SweepInputs in;
      in.streams = &streams;
      in.counts = &corpus;
      in.docs = &docs;
      in.vocab = &vocab;
      fs::path out(sw_out);
      fs::path models_dir = out / "models";
      TopicModel selected;
      SweepResult result =
          sweep(in, grid, sw_cfg, measure, &models_dir, &selected);
      selected.vocab_hash = hash_file_hex(dir / "vocab.tsv");
      selected.save(out / "model.json");
      write_file(out / "sweep.tsv", result.tsv());
      write_file(out / "sweep.json", result.to_json().dump());
      write_file(out / "coherence.svg", coherence_svg(result));
      std::printf("selected k=%u\n", result.selected_k);
    } else if (*discriminate) {
      fs::path dir(dc_corpus);
      auto vocab = load_vocabulary(dir / "vocab.tsv");
      auto corpus = load_sparse_counts(dir / "corpus.counts");
      TopicModel model = TopicModel::load(dc_model);
      auto assignments = dominant_topics(model);
      auto ranking = rank_features(corpus, vocab, assignments, model.config.k,
                                   dc_alpha, dc_top_n, dc_forward);
      fs::path out(dc_out);
      write_file(out / "ranking.tsv", ranking_tsv(ranking));
      write_file(out / "ranking.json", ranking.to_json().dump());
      std::printf("%zu features, topic of interest %u\n", ranking.rows.size(),
                  ranking.rows.empty() ? 0 : topic_of_interest(ranking));
    } else if (*report) {
      fs::path dir(rp_corpus);
      auto vocab = load_vocabulary(dir / "vocab.tsv");
      TopicModel model = TopicModel::load(rp_model);
      auto assignments = dominant_topics(model);
      auto j = nlohmann::json::parse(read_file(rp_ranking));
      FeatureRanking ranking;
      ranking.alpha_level = j.at("alpha_level").get<double>();
      ranking.k_count = j.at("k").get<unsigned>();
      ranking.forward_mode = j.at("forward").get<bool>();
      ranking.topic_totals =
          j.at("topic_totals").get<std::vector<std::uint64_t>>();
      for (const auto& row : j.at("rows")) {
        FeatureStats f;
        f.term_id = row.at("term_id").get<std::uint32_t>();
        f.term = row.at("term").get<std::string>();
        f.chi2 = row.at("chi2").get<double>();
        f.dof = row.at("dof").get<unsigned>();
        f.p_value = row.at("p_value").get<double>();
        f.present = row.at("present").get<std::vector<std::uint64_t>>();
        ranking.rows.push_back(std::move(f));
      }
      std::map<unsigned, std::string> labels;
      const std::map<unsigned, std::string>* labels_ptr = nullptr;
      if (!rp_labels.empty()) {
        labels = load_topic_labels(rp_labels);
        labels_ptr = &labels;
      }
      std::map<std::string, std::string> impressions;
      if (!rp_impressions.empty()) {
        for (const auto& line : read_lines(rp_impressions)) {
          if (trim(line).empty()) continue;
          auto rec = nlohmann::json::parse(line);
          impressions[rec.at("note_id").get<std::string>()] =
              rec.at("impression").get<std::string>();
        }
      }
      auto rows = build_table1(model, assignments, vocab, rp_top, rp_threshold,
                               rp_max_reps, labels_ptr);
      fs::path out(rp_out);
      write_file(out / "table1.md", table1_markdown(rows, &impressions));
      write_file(out / "table1.csv", table1_csv(rows));
      write_file(out / "table2.md", table2_markdown(ranking));
      write_file(out / "table2.csv", table2_csv(ranking));
      if (!rp_funnel.empty()) {
        auto stats =
            funnel_from_json(nlohmann::json::parse(read_file(rp_funnel)));
        write_file(out / "funnel.txt", funnel_report(stats));
      }
      std::printf("report written to %s\n", rp_out.c_str());
    } else if (*synth) {
      GeneratorSpec spec = sy;
      if (!sy_spec.empty())
        spec = GeneratorSpec::from_json(
            nlohmann::json::parse(read_file(sy_spec)));
      GenResult gen = generate(spec);
      write_generated(gen, sy_out);
      std::printf("%zu notes (%zu with impression, %zu surviving)\n",
                  gen.truth.total_notes, gen.truth.with_impression,
                  gen.truth.nonempty_after_preprocess);
    } else if (*run) {
      Pipeline pipeline(PipelineConfig::load(rn_config));
      pipeline.run(rn_resume);
      std::printf("pipeline complete: %s\n",
                  pipeline.out_dir().string().c_str());
    }
  } catch (const PipelineError& e) {
    std::fprintf(stderr, "error at stage %s: %s\n", e.stage.c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
