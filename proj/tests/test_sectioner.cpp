#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "notemine/sectioner.hpp"

using namespace notemine;
using Catch::Matchers::Equals;

namespace {

ClinicalNote note(const std::string& id, const std::string& text) {
  ClinicalNote n;
  n.note_id = id;
  n.raw_text = text;
  return n;
}

}  // namespace

TEST_CASE("impression extraction") {
  SECTION("three labeled sections") {
    auto parsed = extract_impression(
        note("n1",
             "EXAM: Chest, one view.\n"
             "FINDINGS: Lungs are clear bilaterally.\n"
             "IMPRESSION: No acute cardiopulmonary process."));
    REQUIRE(parsed.has_value());
    REQUIRE(parsed->sections.size() == 3);
    CHECK(parsed->find("EXAM")->text == "Chest, one view.");
    CHECK(parsed->find("FINDINGS")->text == "Lungs are clear bilaterally.");
    CHECK(parsed->find("IMPRESSION")->text ==
          "No acute cardiopulmonary process.");
  }

  SECTION("note without an impression is dropped, not an error") {
    CHECK_FALSE(extract_impression(
                    note("n2", "EXAM: Chest.\nFINDINGS: Clear lungs."))
                    .has_value());
  }

  SECTION("labels are case insensitive and the colon is optional") {
    auto parsed = extract_impression(note("n3", "impression  stable chest"));
    REQUIRE(parsed.has_value());
    CHECK(parsed->find("IMPRESSION")->text == "stable chest");

    parsed = extract_impression(note("n4", "Impression:No acute disease."));
    REQUIRE(parsed.has_value());
    CHECK(parsed->find("IMPRESSION")->text == "No acute disease.");
  }

  SECTION("a label is not matched inside a longer word") {
    // EXAMINATION must not register as EXAM.
    auto parsed = extract_impression(
        note("n5", "EXAMINATION of the chest.\nIMPRESSION: Effusion."));
    REQUIRE(parsed.has_value());
    CHECK(parsed->find("EXAM") == nullptr);
    REQUIRE(parsed->find("OTHER") != nullptr);
    CHECK(parsed->find("OTHER")->text == "EXAMINATION of the chest.");
  }

  SECTION("text before the first label lands in OTHER") {
    auto parsed = extract_impression(
        note("n6", "Dictated by Dr. X.\nIMPRESSION: Normal."));
    REQUIRE(parsed.has_value());
    REQUIRE(parsed->sections.size() == 2);
    CHECK(parsed->sections[0].label == "OTHER");
    CHECK(parsed->sections[1].label == "IMPRESSION");
    CHECK(parsed->sections[1].text == "Normal.");
  }

  SECTION("spans carry byte offsets into the raw text") {
    std::string text = "EXAM: A\nIMPRESSION: B";
    auto parsed = extract_impression(note("n7", text));
    REQUIRE(parsed.has_value());
    for (const auto& s : parsed->sections)
      CHECK(text.substr(s.begin, s.end - s.begin) == s.text);
  }
}

TEST_CASE("sentence splitting") {
  SECTION("terminators") {
    CHECK_THAT(split_sentences("One. Two! Three? Four; Five\nSix"),
               Equals(std::vector<std::string>{"One", "Two", "Three", "Four",
                                               "Five", "Six"}));
  }

  SECTION("decimals survive") {
    CHECK_THAT(split_sentences("Effusion measures 3.5 cm. Stable."),
               Equals(std::vector<std::string>{"Effusion measures 3.5 cm",
                                               "Stable"}));
  }

  SECTION("list markers are not sentences") {
    CHECK_THAT(split_sentences("1. No pneumonia. 2. Stable edema."),
               Equals(std::vector<std::string>{"No pneumonia",
                                               "Stable edema"}));
  }

  SECTION("empty and whitespace input") {
    CHECK(split_sentences("").empty());
    CHECK(split_sentences("  \n  ").empty());
  }
}

TEST_CASE("token normalization") {
  Stoplist stop({"the", "is", "of"});

  SECTION("lowercase, digits and punctuation dropped") {
    CHECK_THAT(normalize({"The", "Heart", "is", "ENLARGED,", "3.5", "cm"},
                         stop),
               Equals(std::vector<std::string>{"heart", "enlarged", "cm"}));
  }

  SECTION("hyphens deleted by default, split on request") {
    CHECK_THAT(normalize({"x-ray"}, stop),
               Equals(std::vector<std::string>{"xray"}));
    NormalizeOptions opt;
    opt.split_hyphens = true;
    CHECK_THAT(normalize({"x-ray"}, stop, opt),
               Equals(std::vector<std::string>{"x", "ray"}));
  }

  SECTION("underscores pass through untouched") {
    CHECK_THAT(normalize({"no_acute_disease"}, stop),
               Equals(std::vector<std::string>{"no_acute_disease"}));
  }

  SECTION("light stemming") {
    NormalizeOptions opt;
    opt.stem = true;
    CHECK_THAT(
        normalize({"effusions", "opacities", "masses", "improved", "slowly"},
                  stop, opt),
        Equals(std::vector<std::string>{"effusion", "opacity", "mass",
                                        "improv", "slow"}));
    // fused tokens are never stemmed
    CHECK_THAT(normalize({"no_interval_changes"}, stop, opt),
               Equals(std::vector<std::string>{"no_interval_changes"}));
  }

  SECTION("idempotent") {
    NormalizeOptions opt;
    opt.stem = true;
    std::vector<std::string> raw{"Opacities", "x-ray", "IMPROVED", "3cm"};
    auto once = normalize(raw, stop, opt);
    CHECK_THAT(normalize(once, stop, opt), Equals(once));
  }
}

TEST_CASE("preprocess outcomes") {
  Stoplist stop = Stoplist::bundled();
  NormalizeOptions nopt;
  TokenizedDoc doc;

  SECTION("ok") {
    auto outcome = preprocess_note(
        note("n1", "IMPRESSION: Mild pulmonary edema. No pneumothorax."),
        stop, nopt, doc);
    CHECK(outcome == PreprocessOutcome::ok);
    REQUIRE(doc.sentences.size() == 2);
    CHECK_THAT(doc.sentences[0],
               Equals(std::vector<std::string>{"mild", "pulmonary", "edema"}));
    CHECK(doc.token_count() == 4);
  }

  SECTION("negation cues vanish unless the stoplist spares them") {
    // "no" sits on the bundled stoplist; the pipeline spares cue words so
    // the negation stage still sees them.
    auto outcome = preprocess_note(note("n2", "IMPRESSION: No pneumonia."),
                                   stop, nopt, doc);
    CHECK(outcome == PreprocessOutcome::ok);
    CHECK_THAT(doc.flat_tokens(),
               Equals(std::vector<std::string>{"pneumonia"}));

    Stoplist spared = stop.without({"no"});
    outcome = preprocess_note(note("n2", "IMPRESSION: No pneumonia."), spared,
                              nopt, doc);
    CHECK(outcome == PreprocessOutcome::ok);
    CHECK_THAT(doc.flat_tokens(),
               Equals(std::vector<std::string>{"no", "pneumonia"}));
  }

  SECTION("no impression") {
    CHECK(preprocess_note(note("n3", "FINDINGS: clear"), stop, nopt, doc) ==
          PreprocessOutcome::no_impression);
  }

  SECTION("emptied by the stoplist") {
    std::string impression;
    auto outcome = preprocess_note(
        note("n4", "EXAM: CXR\nIMPRESSION: See final report."), stop, nopt,
        doc, {}, &impression);
    CHECK(outcome == PreprocessOutcome::emptied);
    CHECK(impression == "See final report.");
  }
}

TEST_CASE("stoplist loading") {
  TempDir tmp;
  auto path = tmp / "stop.txt";
  write_file(path, "# comment line\nthe\nAnd  # trailing comment\n\n  IS\n");
  Stoplist s = Stoplist::load(path);
  CHECK(s.size() == 3);
  CHECK(s.contains("the"));
  CHECK(s.contains("and"));
  CHECK(s.contains("is"));
  CHECK_FALSE(s.contains("comment"));

  SECTION("without() spares words") {
    Stoplist spared = s.without({"the", "missing"});
    CHECK_FALSE(spared.contains("the"));
    CHECK(spared.contains("and"));
    CHECK(s.contains("the"));  // original untouched
  }
}

TEST_CASE("bundled stoplist matches the data file") {
  Stoplist from_file =
      Stoplist::load(std::string(NOTEMINE_DATA_DIR) + "/stoplist.txt");
  const Stoplist& bundled = Stoplist::bundled();
  CHECK(from_file.size() == bundled.size());
  for (const auto& w : bundled.words()) {
    INFO("missing from data file: " << w);
    CHECK(from_file.contains(w));
  }
}

TEST_CASE("tokenized doc jsonl round trip") {
  TempDir tmp;
  std::vector<TokenizedDoc> docs(2);
  docs[0].note_id = "a";
  docs[0].sentences = {{"no_pneumonia"}, {"mild", "edema"}};
  docs[1].note_id = "b";
  docs[1].sentences = {{"stable"}};

  auto path = tmp / "tokens.jsonl";
  save_tokenized_jsonl(path, docs);
  auto loaded = load_tokenized_jsonl(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].note_id == "a");
  CHECK(loaded[0].sentences == docs[0].sentences);
  CHECK(loaded[1].sentences == docs[1].sentences);
}
