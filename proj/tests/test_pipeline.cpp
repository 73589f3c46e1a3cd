#include <set>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "notemine/pipeline.hpp"

using namespace notemine;

namespace {

std::string base_config(const fs::path& corpus, const fs::path& outdir) {
  std::string c;
  c += "[input]\npath = " + corpus.string() + "\nformat = jsonl\n";
  c += "[output]\ndir = " + outdir.string() + "\n";
  c += "[phrases]\nthreshold = 1e9\n";  // keep the planted unigrams intact
  c += "[sweep]\nenabled = false\n";
  c += "[lda]\nk = 2\niterations = 60\nburn_in = 30\nsample_every = 10\n"
       "seed = 11\nweight_mode = counts\n";
  c += "[discriminate]\nalpha_level = 0.05\ntop_n = 10\n";
  return c;
}

GenResult synth_corpus(const fs::path& dir) {
  GeneratorSpec spec;
  spec.k = 2;
  spec.terms_per_topic = 12;
  spec.docs = 60;
  spec.frac_no_impression = 0.2;
  spec.frac_empty = 0.1;
  spec.negation_rate = 0.25;
  spec.noise = 0.05;
  spec.seed = 2024;
  GenResult gen = generate(spec);
  write_generated(gen, dir);
  return gen;
}

}  // namespace

TEST_CASE("config parsing") {
  PipelineConfig cfg = PipelineConfig::parse(
      "# run settings\n"
      "[input]\n"
      "path = /x/corpus.jsonl   ; trailing comment\n"
      "format=jsonl\n"
      "\n"
      "[lda]\n"
      "k = 7\n"
      "alpha = 0.3\n");
  CHECK(cfg.get("input", "path") == "/x/corpus.jsonl");
  CHECK(cfg.get("input", "format") == "jsonl");
  CHECK(cfg.has("lda", "k"));
  CHECK(!cfg.has("lda", "beta"));
  CHECK(cfg.get_int("lda", "k", 5) == 7);
  CHECK(cfg.get_int("lda", "iterations", 1000) == 1000);
  CHECK(cfg.get_double("lda", "alpha", 0.0) == 0.3);
  CHECK(cfg.get("missing", "key", "fallback") == "fallback");

  SECTION("booleans") {
    PipelineConfig b = PipelineConfig::parse(
        "[sweep]\nenabled = off\n[tfidf]\nsmooth = YES\nnormalize = maybe\n");
    CHECK(b.get_bool("sweep", "enabled", true) == false);
    CHECK(b.get_bool("tfidf", "smooth", false) == true);
    CHECK(b.get_bool("tfidf", "natural_log", false) == false);
    CHECK_THROWS_WITH(b.get_bool("tfidf", "normalize", true),
                      Catch::Matchers::ContainsSubstring("bad boolean"));
  }

  SECTION("parse errors carry the line number") {
    CHECK_THROWS_WITH(PipelineConfig::parse("path = x\n"),
                      Catch::Matchers::ContainsSubstring("outside any section"));
    CHECK_THROWS_WITH(PipelineConfig::parse("[input]\nnovalue\n"),
                      Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(PipelineConfig::parse("[input\npath = x\n"),
                      Catch::Matchers::ContainsSubstring("unterminated"));
  }
}

TEST_CASE("config validation") {
  TempDir tmp;
  std::string ok = "[input]\npath = " + (tmp / "c.jsonl").string() +
                   "\n[output]\ndir = " + (tmp / "out").string() + "\n";

  CHECK_NOTHROW(PipelineConfig::parse(ok).validate());
  CHECK_THROWS_WITH(PipelineConfig::parse(ok + "[bogus]\nx = 1\n").validate(),
                    Catch::Matchers::ContainsSubstring("unknown section"));
  CHECK_THROWS_WITH(
      PipelineConfig::parse(ok + "[lda]\ntopics = 4\n").validate(),
      Catch::Matchers::ContainsSubstring("unknown key lda.topics"));
  CHECK_THROWS_WITH(
      PipelineConfig::parse("[input]\nformat = jsonl\n[output]\ndir = x\n")
          .validate(),
      Catch::Matchers::ContainsSubstring("input.path"));
  CHECK_THROWS_WITH(PipelineConfig::parse("[input]\npath = x\n").validate(),
                    Catch::Matchers::ContainsSubstring("output.dir"));
  CHECK_THROWS_WITH(
      PipelineConfig::parse(ok + "[preprocess]\nstoplist = /nope.txt\n")
          .validate(),
      Catch::Matchers::ContainsSubstring("does not exist"));
}

TEST_CASE("full pipeline run on a generated corpus") {
  TempDir tmp;
  GenResult gen = synth_corpus(tmp.path);
  fs::path out = tmp / "out";
  PipelineConfig cfg =
      PipelineConfig::parse(base_config(tmp / "corpus.jsonl", out));

  Pipeline p(cfg);
  p.run();

  SECTION("every stage leaves its artifacts") {
    for (const char* rel :
         {"ingest/corpus.jsonl", "preprocess/tokens.jsonl",
          "preprocess/impressions.jsonl", "preprocess/funnel.json",
          "negate/tokens.jsonl", "negate/funnel.json", "phrases/tokens.jsonl",
          "vectorize/vocab.tsv", "vectorize/corpus.counts",
          "vectorize/corpus.tfidf", "model/model.json",
          "discriminate/ranking.tsv", "discriminate/ranking.json",
          "report/table1.md", "report/table1.csv", "report/table2.md",
          "report/table2.csv", "report/funnel.txt", "report/summary.tsv",
          "manifest.json"})
      CHECK(fs::exists(out / rel));
    CHECK(!fs::exists(out / "sweep"));
    CHECK(!fs::exists(out / "report" / "coherence.svg"));
  }

  SECTION("funnel matches the generator ground truth") {
    CHECK(p.stats().total_notes == gen.truth.total_notes);
    CHECK(p.stats().notes_with_impression == gen.truth.with_impression);
    CHECK(p.stats().notes_nonempty_after_preprocess ==
          gen.truth.nonempty_after_preprocess);
  }

  SECTION("the model covers exactly the surviving notes") {
    TopicModel m = TopicModel::load(out / "model" / "model.json");
    CHECK(m.config.k == 2);
    CHECK(m.num_docs == gen.truth.nonempty_after_preprocess);
    CHECK(m.vocab_hash == hash_file_hex(out / "vectorize" / "vocab.tsv"));
  }

  SECTION("vocabulary reduces to planted terms and fused negations") {
    Vocabulary vocab = load_vocabulary(out / "vectorize" / "vocab.tsv");
    std::set<std::string> planted(gen.truth.vocab.begin(),
                                  gen.truth.vocab.end());
    REQUIRE(!vocab.terms.empty());
    for (const auto& t : vocab.terms)
      CHECK((planted.count(t) == 1 || t.rfind("no_", 0) == 0));
  }

  SECTION("manifest records config, input hash, and stage hashes") {
    auto manifest = nlohmann::json::parse(read_file(out / "manifest.json"));
    CHECK(manifest.at("config").get<std::string>() == cfg.raw);
    CHECK(manifest.at("input").at("hash").get<std::string>() ==
          hash_file_hex(tmp / "corpus.jsonl"));
    CHECK(manifest.at("seed").get<std::uint64_t>() == 11);
    for (const char* stage : {"ingest", "preprocess", "negate", "phrases",
                              "vectorize", "fit", "discriminate", "report"})
      CHECK(manifest.at("stages").contains(stage));
    CHECK(!manifest.at("stages").contains("sweep"));
  }

  SECTION("summary names the fitted k") {
    CHECK(read_file(out / "report" / "summary.tsv").find("k\t2") !=
          std::string::npos);
  }
}

TEST_CASE("pipeline runs are reproducible across output directories") {
  TempDir tmp;
  synth_corpus(tmp.path);
  fs::path out1 = tmp / "out1";
  fs::path out2 = tmp / "out2";

  Pipeline(PipelineConfig::parse(base_config(tmp / "corpus.jsonl", out1)))
      .run();
  Pipeline(PipelineConfig::parse(base_config(tmp / "corpus.jsonl", out2)))
      .run();

  for (const char* rel :
       {"ingest/corpus.jsonl", "preprocess/tokens.jsonl",
        "negate/tokens.jsonl", "negate/funnel.json", "phrases/tokens.jsonl",
        "vectorize/vocab.tsv", "vectorize/corpus.counts",
        "vectorize/corpus.tfidf", "model/model.json",
        "discriminate/ranking.tsv", "discriminate/ranking.json",
        "report/table1.md", "report/table1.csv", "report/table2.md",
        "report/table2.csv", "report/funnel.txt", "report/summary.tsv"}) {
    INFO(rel);
    CHECK(read_file(out1 / rel) == read_file(out2 / rel));
  }

  // manifests differ only through the embedded config (output dir)
  auto m1 = nlohmann::json::parse(read_file(out1 / "manifest.json"));
  auto m2 = nlohmann::json::parse(read_file(out2 / "manifest.json"));
  CHECK(m1.at("stages") == m2.at("stages"));
  CHECK(m1.at("input") == m2.at("input"));
}

TEST_CASE("resume skips current stages and repairs damaged ones") {
  TempDir tmp;
  synth_corpus(tmp.path);
  fs::path out = tmp / "out";
  fs::path conf_path = tmp / "pipeline.conf";
  write_file(conf_path, base_config(tmp / "corpus.jsonl", out));

  Pipeline(PipelineConfig::load(conf_path)).run();

  auto t_ingest = fs::last_write_time(out / "ingest" / "corpus.jsonl");
  auto t_pre = fs::last_write_time(out / "preprocess" / "tokens.jsonl");
  std::string negate_bytes = read_file(out / "negate" / "tokens.jsonl");
  std::string model_bytes = read_file(out / "model" / "model.json");

  SECTION("a clean resume touches nothing") {
    auto t_model = fs::last_write_time(out / "model" / "model.json");
    Pipeline(PipelineConfig::load(conf_path)).run(true);
    CHECK(fs::last_write_time(out / "ingest" / "corpus.jsonl") == t_ingest);
    CHECK(fs::last_write_time(out / "preprocess" / "tokens.jsonl") == t_pre);
    CHECK(fs::last_write_time(out / "model" / "model.json") == t_model);
  }

  SECTION("a corrupted artifact reruns its stage and everything after") {
    write_file(out / "negate" / "tokens.jsonl", negate_bytes + "garbage\n");
    Pipeline(PipelineConfig::load(conf_path)).run(true);
    // upstream untouched, downstream rebuilt to the same bytes
    CHECK(fs::last_write_time(out / "ingest" / "corpus.jsonl") == t_ingest);
    CHECK(fs::last_write_time(out / "preprocess" / "tokens.jsonl") == t_pre);
    CHECK(read_file(out / "negate" / "tokens.jsonl") == negate_bytes);
    CHECK(read_file(out / "model" / "model.json") == model_bytes);
  }

  SECTION("a config change invalidates the whole chain") {
    write_file(conf_path, base_config(tmp / "corpus.jsonl", out) +
                              "[report]\ntop_keywords = 9\n");
    Pipeline(PipelineConfig::load(conf_path)).run(true);
    CHECK(fs::last_write_time(out / "ingest" / "corpus.jsonl") != t_ingest);
  }
}

TEST_CASE("pipeline with sweep stage") {
  TempDir tmp;
  synth_corpus(tmp.path);
  fs::path out = tmp / "out";
  std::string conf = base_config(tmp / "corpus.jsonl", out);
  auto at = conf.find("enabled = false");
  REQUIRE(at != std::string::npos);
  conf.replace(at, 15, "enabled = true\nkmin = 2\nkmax = 3\nmeasure = umass");
  conf.replace(conf.find("iterations = 60"), 15, "iterations = 40");

  Pipeline p(PipelineConfig::parse(conf));
  p.run();

  for (const char* rel :
       {"sweep/sweep.tsv", "sweep/sweep.json", "sweep/coherence.svg",
        "sweep/models/model_k2.json", "sweep/models/model_k3.json",
        "model/model.json", "report/coherence.svg"})
    CHECK(fs::exists(out / rel));

  auto sweep_json = nlohmann::json::parse(read_file(out / "sweep/sweep.json"));
  unsigned selected = sweep_json.at("selected_k").get<unsigned>();
  CHECK((selected == 2 || selected == 3));
  TopicModel m = TopicModel::load(out / "model" / "model.json");
  CHECK(m.config.k == selected);
  CHECK(read_file(out / "report" / "summary.tsv")
            .find("k\t" + std::to_string(selected)) != std::string::npos);

  auto manifest = nlohmann::json::parse(read_file(out / "manifest.json"));
  CHECK(manifest.at("stages").contains("sweep"));
  CHECK(!manifest.at("stages").contains("fit"));
}

TEST_CASE("negation can empty a note inside the pipeline") {
  TempDir tmp;
  std::vector<ClinicalNote> notes(3);
  notes[0].note_id = "keep";
  notes[0].raw_text = "IMPRESSION: Severe cardiomegaly.";
  notes[1].note_id = "pseudo_only";
  notes[1].raw_text = "IMPRESSION: No change.";
  notes[2].note_id = "headerless";
  notes[2].raw_text = "FINDINGS: Lines and tubes unchanged.";
  save_corpus_jsonl(tmp / "mini.jsonl", notes);

  fs::path out = tmp / "out";
  Pipeline p(PipelineConfig::parse(base_config(tmp / "mini.jsonl", out)));
  p.run();

  // "No change." survives sectioning but dissolves after the trigger sweep
  CHECK(p.stats().total_notes == 3);
  CHECK(p.stats().notes_with_impression == 2);
  CHECK(p.stats().notes_nonempty_after_preprocess == 1);
  CHECK(p.stats().drop_count(DropStage::no_impression) == 1);
  CHECK(p.stats().drop_count(DropStage::emptied) == 1);

  std::string funnel = read_file(out / "report" / "funnel.txt");
  CHECK(funnel.find("3") != std::string::npos);
  CHECK(funnel.find("1") != std::string::npos);

  // one surviving doc, one live term pair; the report must still come out
  TopicModel m = TopicModel::load(out / "model" / "model.json");
  CHECK(m.num_docs == 1);
  CHECK(read_file(out / "report" / "table1.md").find("| Topic |") !=
        std::string::npos);
}

TEST_CASE("pipeline errors name their stage") {
  TempDir tmp;
  fs::path out = tmp / "out";

  SECTION("missing input file") {
    PipelineConfig cfg = PipelineConfig::parse(
        base_config(tmp / "absent.jsonl", out));
    Pipeline p(cfg);
    try {
      p.run();
      FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
      CHECK(e.stage == "ingest");
    }
  }

  SECTION("malformed corpus") {
    write_file(tmp / "bad.jsonl", "{\"note_id\": \"a\"}\n");
    Pipeline p(PipelineConfig::parse(base_config(tmp / "bad.jsonl", out)));
    try {
      p.run();
      FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
      CHECK(e.stage == "ingest");
      CHECK(std::string(e.what()).find("text") != std::string::npos);
    }
  }

  SECTION("constructor rejects an incomplete config") {
    CHECK_THROWS_WITH(
        Pipeline(PipelineConfig::parse("[input]\npath = x\n")),
        Catch::Matchers::ContainsSubstring("output.dir"));
  }
}
