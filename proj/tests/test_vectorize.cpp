#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "notemine/vectorize.hpp"

using namespace notemine;
using Catch::Matchers::WithinAbs;

namespace {

TokenizedDoc doc(const std::string& id,
                 std::vector<std::vector<std::string>> sentences) {
  TokenizedDoc d;
  d.note_id = id;
  d.sentences = std::move(sentences);
  return d;
}

}  // namespace

TEST_CASE("phrase detection") {
  SECTION("score threshold decides fusion") {
    // right+effusion adjacent 3 of 4 times, left/heart once each.
    std::vector<TokenizedDoc> docs{
        doc("d1", {{"right", "effusion"}}), doc("d2", {{"right", "effusion"}}),
        doc("d3", {{"right", "effusion"}}), doc("d4", {{"left", "effusion"}}),
        doc("d5", {{"right", "heart"}})};
    PhraseOptions opt;
    opt.min_count = 1;
    // score(right, effusion) = (3-1)*10/(4*4) = 1.25
    opt.threshold = 1.2;
    auto fused = detect_phrases(docs, opt);
    CHECK(fused[0].sentences[0] ==
          std::vector<std::string>{"right_effusion"});
    CHECK(fused[3].sentences[0] == std::vector<std::string>{"left", "effusion"});
    CHECK(fused[4].sentences[0] == std::vector<std::string>{"right", "heart"});

    opt.threshold = 1.3;  // just above the score: nothing fuses
    fused = detect_phrases(docs, opt);
    CHECK(fused[0].sentences[0] ==
          std::vector<std::string>{"right", "effusion"});
  }

  SECTION("greedy left to right") {
    std::vector<TokenizedDoc> docs{doc("d1", {{"b", "b", "b"}})};
    PhraseOptions opt;
    opt.min_count = 0;
    opt.threshold = 0.1;  // score(b,b) = 2*3/9
    auto fused = detect_phrases(docs, opt);
    CHECK(fused[0].sentences[0] == std::vector<std::string>{"b_b", "b"});
  }

  SECTION("adjacency never crosses sentences") {
    std::vector<TokenizedDoc> docs{doc("d1", {{"a"}, {"b"}}),
                                   doc("d2", {{"a", "b"}})};
    PhraseOptions opt;
    opt.min_count = 0;
    opt.threshold = 0.5;  // score(a,b) = 1*4/4 = 1
    auto fused = detect_phrases(docs, opt);
    CHECK(fused[0].sentences[0] == std::vector<std::string>{"a"});
    CHECK(fused[0].sentences[1] == std::vector<std::string>{"b"});
    CHECK(fused[1].sentences[0] == std::vector<std::string>{"a_b"});
  }

  SECTION("a second pass builds longer phrases") {
    std::vector<TokenizedDoc> docs{doc("d1", {{"a", "b", "c"}}),
                                   doc("d2", {{"a", "b", "c"}}),
                                   doc("d3", {{"a", "b", "c"}})};
    PhraseOptions opt;
    opt.min_count = 0;
    opt.threshold = 0.5;
    opt.passes = 1;
    auto once = detect_phrases(docs, opt);
    CHECK(once[0].sentences[0] == std::vector<std::string>{"a_b", "c"});
    opt.passes = 2;
    auto twice = detect_phrases(docs, opt);
    CHECK(twice[0].sentences[0] == std::vector<std::string>{"a_b_c"});
  }

  SECTION("defaults leave sparse corpora untouched") {
    std::vector<TokenizedDoc> docs{doc("d1", {{"mild", "edema"}}),
                                   doc("d2", {{"mild", "edema"}})};
    auto fused = detect_phrases(docs);  // min_count 5 never reached
    CHECK(fused[0].sentences[0] == std::vector<std::string>{"mild", "edema"});
  }
}

TEST_CASE("vocabulary ids follow first occurrence") {
  std::vector<TokenizedDoc> docs{doc("d1", {{"b", "a"}}),
                                 doc("d2", {{"a", "c", "a"}})};
  auto [vocab, corpus] = build_vocabulary(docs);
  REQUIRE(vocab.size() == 3);
  CHECK(vocab.id("b") == 0);
  CHECK(vocab.id("a") == 1);
  CHECK(vocab.id("c") == 2);
  CHECK(vocab.df == std::vector<std::uint32_t>{1, 2, 1});
  CHECK(vocab.has("a"));
  CHECK_FALSE(vocab.has("z"));
  CHECK_THROWS(vocab.id("z"));

  REQUIRE(corpus.num_docs() == 2);
  CHECK(corpus.note_ids == std::vector<std::string>{"d1", "d2"});
  using Row = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
  CHECK(corpus.counts[0] == Row{{0, 1}, {1, 1}});
  CHECK(corpus.counts[1] == Row{{1, 2}, {2, 1}});

  CHECK_THROWS(build_vocabulary({}));
}

TEST_CASE("tfidf") {
  // d1 = {a b}, d2 = {a c}, d3 = {a b c}; df(a)=3, df(b)=df(c)=2.
  std::vector<TokenizedDoc> docs{doc("d1", {{"a", "b"}}),
                                 doc("d2", {{"a", "c"}}),
                                 doc("d3", {{"a", "b", "c"}})};
  auto [vocab, corpus] = build_vocabulary(docs);
  const std::uint32_t a = vocab.id("a"), b = vocab.id("b"), c = vocab.id("c");

  SECTION("ubiquitous terms drop out; weights normalize") {
    tfidf(corpus, vocab);
    // d2 keeps only c, so its normalized weight is exactly 1.
    REQUIRE(corpus.weights[1].size() == 1);
    CHECK(corpus.weights[1][0].first == c);
    CHECK_THAT(corpus.weights[1][0].second, WithinAbs(1.0, 1e-15));
    // d3: b and c share the weight evenly.
    REQUIRE(corpus.weights[2].size() == 2);
    CHECK_THAT(corpus.weights[2][0].second,
               WithinAbs(0.7071067811865476, 1e-12));
    CHECK_THAT(corpus.weights[2][1].second,
               WithinAbs(0.7071067811865476, 1e-12));
    for (const auto& row : corpus.weights) {
      double ss = 0.0;
      for (const auto& [_, w] : row) ss += w * w;
      if (!row.empty()) CHECK_THAT(ss, WithinAbs(1.0, 1e-12));
    }
  }

  SECTION("raw base-2 weights") {
    TfidfOptions opt;
    opt.normalize = false;
    tfidf(corpus, vocab, opt);
    REQUIRE(corpus.weights[0].size() == 1);
    CHECK(corpus.weights[0][0].first == b);
    // log2(3/2)
    CHECK_THAT(corpus.weights[0][0].second,
               WithinAbs(0.5849625007211562, 1e-12));
  }

  SECTION("natural log") {
    TfidfOptions opt;
    opt.natural_log = true;
    opt.normalize = false;
    tfidf(corpus, vocab, opt);
    CHECK_THAT(corpus.weights[0][0].second,
               WithinAbs(0.4054651081081644, 1e-12));
  }

  SECTION("smoothing keeps df == N terms") {
    TfidfOptions opt;
    opt.smooth = true;
    opt.natural_log = true;
    opt.normalize = false;
    tfidf(corpus, vocab, opt);
    // idf(a) = ln(4/4)+1 = 1, idf(b) = ln(4/3)+1
    REQUIRE(corpus.weights[0].size() == 2);
    CHECK(corpus.weights[0][0].first == a);
    CHECK_THAT(corpus.weights[0][0].second, WithinAbs(1.0, 1e-12));
    CHECK_THAT(corpus.weights[0][1].second,
               WithinAbs(1.2876820724517809, 1e-12));
  }

  SECTION("repeated terms multiply the idf") {
    // d2 in this corpus has a twice
    std::vector<TokenizedDoc> rep{doc("r1", {{"a", "a", "b"}}),
                                  doc("r2", {{"b"}})};
    auto [v2, c2] = build_vocabulary(rep);
    TfidfOptions opt;
    opt.normalize = false;
    tfidf(c2, v2, opt);
    REQUIRE(c2.weights[0].size() == 1);
    CHECK(c2.weights[0][0].first == v2.id("a"));
    CHECK_THAT(c2.weights[0][0].second, WithinAbs(2.0, 1e-12));  // 2*log2(2)
  }
}

TEST_CASE("vectorizer file formats") {
  TempDir tmp;
  std::vector<TokenizedDoc> docs{doc("d1", {{"b", "a"}}),
                                 doc("d2", {{"a", "c", "a"}})};
  auto [vocab, corpus] = build_vocabulary(docs);
  tfidf(corpus, vocab);

  SECTION("vocabulary") {
    auto path = tmp / "vocab.tsv";
    save_vocabulary(path, vocab);
    Vocabulary loaded = load_vocabulary(path);
    CHECK(loaded.terms == vocab.terms);
    CHECK(loaded.df == vocab.df);
    CHECK(loaded.id("c") == vocab.id("c"));
  }

  SECTION("vocabulary ids must be dense") {
    auto path = tmp / "sparse.tsv";
    write_file(path, "0\ta\t1\n2\tb\t1\n");
    CHECK_THROWS_WITH(load_vocabulary(path),
                      Catch::Matchers::ContainsSubstring("ids not dense"));
  }

  SECTION("counts round trip") {
    auto path = tmp / "corpus.counts";
    save_sparse_counts(path, corpus);
    SparseCorpus loaded = load_sparse_counts(path);
    CHECK(loaded.note_ids == corpus.note_ids);
    CHECK(loaded.counts == corpus.counts);
  }

  SECTION("weights align with the count corpus") {
    auto counts_path = tmp / "corpus.counts";
    auto weights_path = tmp / "corpus.tfidf";
    save_sparse_counts(counts_path, corpus);
    save_sparse_weights(weights_path, corpus);
    SparseCorpus loaded = load_sparse_counts(counts_path);
    load_sparse_weights(weights_path, loaded);
    REQUIRE(loaded.weights.size() == 2);
    REQUIRE(loaded.weights[1].size() == corpus.weights[1].size());
    CHECK_THAT(loaded.weights[1][0].second,
               WithinAbs(corpus.weights[1][0].second, 1e-12));
  }

  SECTION("weight rows for a different corpus are rejected") {
    auto weights_path = tmp / "corpus.tfidf";
    save_sparse_weights(weights_path, corpus);
    SparseCorpus other = corpus;
    other.note_ids[0] = "zzz";
    CHECK_THROWS_WITH(load_sparse_weights(weights_path, other),
                      Catch::Matchers::ContainsSubstring("note_id mismatch"));
  }
}
