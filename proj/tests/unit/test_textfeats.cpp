#include <doctest.h>

#include <cmath>

#include "aes/error.hpp"
#include "aes/textfeats.hpp"
#include "test_util.hpp"

using namespace aes::textfeats;

namespace {

double l2(const SparseRow& r) {
    double s = 0;
    for (double v : r.values) s += v * v;
    return std::sqrt(s);
}

}  // namespace

TEST_SUITE("textfeats") {
    TEST_CASE("segmentation of a two paragraph text") {
        const auto f = extract_handcrafted("Hello world. This is a test.\n\nSecond paragraph here.");
        CHECK(f.n_paragraphs == 2);
        CHECK(f.n_sentences == 3);
        CHECK(f.n_words == 9);
        CHECK(f.words_per_paragraph_max == 6);
        CHECK(f.words_per_paragraph_min == 3);
        CHECK(f.words_per_sentence_max == 4);
        CHECK_FALSE(f.spelling_checked);
    }

    TEST_CASE("empty text gives all zeros") {
        const auto f = extract_handcrafted("");
        for (double v : f.values()) CHECK(v == 0.0);
        const auto w = extract_handcrafted("   \n\n  \t ");
        CHECK(w.n_words == 0);
        CHECK(w.n_sentences == 0);
        CHECK(w.n_paragraphs == 0);
    }

    TEST_CASE("dictionary out-of-vocabulary count") {
        Dictionary dict({"aaa"});
        const auto f = extract_handcrafted("aaa bbb", &dict);
        CHECK(f.spelling_error_count == 1);
        CHECK(f.spelling_checked);
        const auto g = extract_handcrafted("AAA Aaa", &dict);
        CHECK(g.spelling_error_count == 0);
    }

    TEST_CASE("tokenizer details") {
        const auto w = words("don't stop-now, caf\xC3\xA9 x' 42");
        REQUIRE(w.size() == 6);
        CHECK(w[0] == "don't");
        CHECK(w[1] == "stop");
        CHECK(w[2] == "now");
        CHECK(w[3] == "caf\xC3\xA9");
        CHECK(w[4] == "x");
        CHECK(w[5] == "42");
        CHECK(casefold("Caf\xC3\x89") == "caf\xC3\xA9");
        CHECK(count_codepoints("caf\xC3\xA9") == 4);
        CHECK(is_valid_utf8("ok \xE2\x80\x99"));
        CHECK_FALSE(is_valid_utf8("\xC3"));
        CHECK(segment("Wait... what?! Yes").front().sentences.size() == 3);
    }

    TEST_CASE("feature invariants on sample texts") {
        for (const char* t : {"One. Two three!\n\nFour five six? Seven", "a", "Long wordsssss here.\n\n\n\nNext."}) {
            const auto f = extract_handcrafted(t);
            CHECK(f.type_token_ratio > 0.0);
            CHECK(f.type_token_ratio <= 1.0);
            CHECK(f.n_unique_words <= f.n_words);
            CHECK(f.words_per_paragraph_min <= f.words_per_paragraph_mean);
            CHECK(f.words_per_paragraph_mean <= f.words_per_paragraph_max);
            CHECK(f.word_length_std >= 0.0);
            CHECK(f.values().size() == kHandcraftedCount);
        }
        CHECK(HandcraftedFeatures::names().size() == 16);
    }

    TEST_CASE("vectorizer vocabulary ranking and idf") {
        const std::vector<std::string> docs{"apple banana", "apple cherry", "banana apple dog"};
        const auto m = fit_vectorizer(docs, VectorizerKind::tfidf, 10, 2);
        REQUIRE(m.vocabulary() == std::vector<std::string>{"apple", "banana"});
        CHECK(m.document_frequencies() == std::vector<std::size_t>{3, 2});
        CHECK(m.idf(1) == doctest::Approx(std::log(4.0 / 3.0) + 1.0).epsilon(1e-15));
        CHECK(m.idf(1) == doctest::Approx(1.28768).epsilon(1e-5));
        CHECK(m.column("banana") == 1);
        CHECK(m.column("cherry") == -1);

        const auto capped = fit_vectorizer(docs, VectorizerKind::count, 1, 1);
        CHECK(capped.vocabulary() == std::vector<std::string>{"apple"});
        CHECK_THROWS_AS(fit_vectorizer(std::vector<std::string>{}, VectorizerKind::count), aes::ValidationError);
        CHECK_THROWS_AS(fit_vectorizer(std::vector<std::string>{"x", "y"}, VectorizerKind::count, 10, 2),
                        aes::ValidationError);
    }

    TEST_CASE("count and tfidf transforms") {
        const std::vector<std::string> docs{"a b", "b a"};
        const auto cm = fit_vectorizer(docs, VectorizerKind::count, 10, 1);
        const auto r = transform(cm, "a a b zzz");
        CHECK(r.cols == std::vector<std::uint32_t>{0, 1});
        CHECK(r.values == std::vector<double>{2, 1});

        const auto tm = fit_vectorizer(std::vector<std::string>{"a b c", "a b", "a", "c d d"}, VectorizerKind::tfidf, 10, 1);
        for (const char* t : {"a b c d", "d d d", "a"}) CHECK(l2(transform(tm, t)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(transform(tm, "nothing known").cols.empty());
    }

    TEST_CASE("vectorizer json and triplets round trip") {
        const auto dir = testutil::scratch("textfeats_triplets");
        const std::vector<std::string> docs{"x y z", "y z", "z w"};
        const std::vector<std::string> ids{"d1", "d2", "d3"};
        const auto m = fit_vectorizer(docs, VectorizerKind::tfidf, 10, 1);
        const auto back = vectorizer_from_json(to_json(m));
        CHECK(back.vocabulary() == m.vocabulary());
        CHECK(back.document_frequencies() == m.document_frequencies());
        const auto sm = transform_all(m, ids, docs);
        write_triplets(dir / "t.csv", sm);
        const auto rt = read_triplets(dir / "t.csv", ids, sm.column_names);
        REQUIRE(rt.rows.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(rt.rows[i].cols == sm.rows[i].cols);
            CHECK(rt.rows[i].values == sm.rows[i].values);
        }
        const auto dense = sm.to_dense();
        CHECK(dense.rows() == 3);
        CHECK(dense.cols() == m.size());
    }

    TEST_CASE("assembly widths, prefixes and row alignment") {
        std::vector<std::string> ids, texts;
        for (int i = 0; i < 30; ++i) {
            ids.push_back("e" + std::to_string(i));
            std::string t;
            for (int k = 0; k < 120; ++k) t += "w" + std::to_string((k * 7 + i) % 150) + " ";
            texts.push_back(t);
        }
        const auto hand = handcrafted_matrix(ids, texts);
        const auto tf = transform_all(fit_vectorizer(texts, VectorizerKind::tfidf, 100, 2), ids, texts).to_dense();
        const auto ct = transform_all(fit_vectorizer(texts, VectorizerKind::count, 100, 2), ids, texts).to_dense();
        REQUIRE(tf.cols() == 100);
        std::vector<FeaturePart> parts{{"handcrafted", hand}, {"tfidf", tf}, {"count", ct}};
        const auto all = build_feature_matrix(parts);
        CHECK(all.cols() == 216);
        CHECK(all.column_names().front().rfind("handcrafted/", 0) == 0);
        CHECK(all.column_names()[16].rfind("tfidf/", 0) == 0);
        CHECK(all.column_names().back().rfind("count/", 0) == 0);

        auto shifted_ids = ids;
        shifted_ids.back() = "other";
        std::vector<FeaturePart> bad{{"handcrafted", hand}, {"x", handcrafted_matrix(shifted_ids, texts)}};
        CHECK_THROWS_AS(build_feature_matrix(bad), aes::ValidationError);
    }
}
