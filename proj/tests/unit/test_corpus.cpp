#include <doctest.h>

#include <algorithm>
#include <set>

#include "aes/corpus.hpp"
#include "aes/csv.hpp"
#include "aes/error.hpp"
#include "test_util.hpp"

using namespace aes::corpus;

namespace {

Corpus make_corpus(const std::vector<int>& class_sizes) {
    Corpus c;
    int serial = 0;
    for (std::size_t k = 0; k < class_sizes.size(); ++k) {
        for (int i = 0; i < class_sizes[k]; ++i) {
            c.push_back({"id" + std::to_string(serial++), "text", static_cast<int>(k) + 1});
        }
    }
    return c;
}

std::size_t count_class(const Corpus& c, const std::vector<std::string>& ids, int score) {
    std::size_t n = 0;
    for (const auto& id : ids) {
        const auto it = std::find_if(c.begin(), c.end(), [&](const auto& r) { return r.essay_id == id; });
        if (it != c.end() && it->score == score) ++n;
    }
    return n;
}

}  // namespace

TEST_SUITE("corpus") {
    TEST_CASE("load valid file and keep order") {
        const auto c = parse_corpus("essay_id,full_text,score\nb,\"x, y\",3\na,hello,\nc,z,6\n");
        REQUIRE(c.size() == 3);
        CHECK(c[0].essay_id == "b");
        CHECK(c[0].text == "x, y");
        CHECK(c[0].score == 3);
        CHECK_FALSE(c[1].score.has_value());
        CHECK(c[2].score == 6);
    }

    TEST_CASE("header-only file gives an empty corpus") {
        CHECK(parse_corpus("essay_id,full_text,score\n").empty());
    }

    TEST_CASE("score file without score column") {
        const auto c = parse_corpus("essay_id,full_text\na,x\n");
        REQUIRE(c.size() == 1);
        CHECK_FALSE(c[0].score.has_value());
    }

    TEST_CASE("validation errors name the offending line") {
        try {
            parse_corpus("essay_id,full_text,score\na,x,3\nb,y,7\n", {}, "f.csv");
            FAIL("expected error");
        } catch (const aes::ValidationError& e) {
            CHECK(std::string(e.what()).find("f.csv:3") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_corpus("essay_id,full_text,score\na,x,0\n"), aes::ValidationError);
        CHECK_THROWS_AS(parse_corpus("essay_id,full_text,score\na,x,2.5\n"), aes::ValidationError);
        CHECK_THROWS_AS(parse_corpus("essay_id,full_text,score\na,x,1\na,y,2\n"), aes::ValidationError);
        CHECK_THROWS_AS(parse_corpus("essay_id,full_text,score\n,x,1\n"), aes::ValidationError);
        CHECK_THROWS_AS(parse_corpus("id,full_text\na,x\n"), aes::ValidationError);
        CHECK_THROWS_AS(parse_corpus("essay_id,full_text\na,\xff\xfe\n"), aes::ValidationError);
        CHECK_THROWS_AS(load_corpus(testutil::scratch("corpus_missing") / "nope.csv"), aes::IoError);
    }

    TEST_CASE("stats on a tiny corpus") {
        Corpus c{{"a", "one two three", 2}, {"b", "four", 5}, {"u", "unscored essay", std::nullopt}};
        const auto s = compute_stats(c);
        CHECK(s.n_essays == 2);
        CHECK(s.n_unscored == 1);
        CHECK(s.score_histogram[1] == 1);
        CHECK(s.score_histogram[4] == 1);
        CHECK(s.word_length_min == 1);
        CHECK(s.word_length_max == 3);
        CHECK(s.n_over_500_words == 0);
        CHECK(s.word_length_histogram.at(0) == 2);
        const auto j = to_json(s);
        CHECK(j.is_object());
        CHECK_THROWS_AS(compute_stats(Corpus{}), aes::ValidationError);
    }

    TEST_CASE("unstratified split of ten essays is 8/1/1") {
        Corpus c;
        for (int i = 0; i < 10; ++i) c.push_back({"e" + std::to_string(i), "t", 1 + i % 6});
        SplitSpec spec;
        spec.stratified = false;
        const auto s = split(c, spec);
        CHECK(s.train.size() == 8);
        CHECK(s.validation.size() == 1);
        CHECK(s.test.size() == 1);
    }

    TEST_CASE("stratified split of 60 essays gives 8/1/1 per class") {
        const auto c = make_corpus({10, 10, 10, 10, 10, 10});
        const auto s = split(c, SplitSpec{});
        CHECK(s.train.size() == 48);
        for (int k = 1; k <= 6; ++k) {
            CHECK(count_class(c, s.train, k) == 8);
            CHECK(count_class(c, s.validation, k) == 1);
            CHECK(count_class(c, s.test, k) == 1);
        }
    }

    TEST_CASE("split is a deterministic partition that keeps corpus order") {
        const auto c = make_corpus({25, 40, 61, 39, 20, 3});
        for (bool strat : {true, false}) {
            SplitSpec spec;
            spec.stratified = strat;
            spec.seed = 7;
            const auto a = split(c, spec);
            const auto b = split(c, spec);
            CHECK(a.train == b.train);
            CHECK(a.validation == b.validation);
            CHECK(a.test == b.test);
            std::set<std::string> all;
            for (const auto* part : {&a.train, &a.validation, &a.test}) {
                for (const auto& id : *part) CHECK(all.insert(id).second);
                CHECK(std::is_sorted(part->begin(), part->end(), [](const auto& x, const auto& y) {
                    return std::stoi(x.substr(2)) < std::stoi(y.substr(2));
                }));
            }
            CHECK(all.size() == c.size());
            spec.seed = 8;
            CHECK(split(c, spec).test != a.test);
        }
    }

    TEST_CASE("split ratio and corpus validation") {
        SplitSpec spec;
        spec.ratios = {0.5, 0.3, 0.3};
        CHECK_THROWS_AS(spec.validate(), aes::ValidationError);
        spec.ratios = {0.8, 0.0, 0.2};
        CHECK_THROWS_AS(spec.validate(), aes::ValidationError);
        CHECK_THROWS_AS(split(make_corpus({2}), SplitSpec{}), aes::ValidationError);
        Corpus unscored{{"a", "t", std::nullopt}, {"b", "t", std::nullopt}, {"c", "t", std::nullopt}};
        CHECK_THROWS_AS(split(unscored, SplitSpec{}), aes::ValidationError);
    }

    TEST_CASE("write_split produces id files and manifest") {
        const auto dir = testutil::scratch("corpus_split");
        const auto c = make_corpus({10, 10, 10, 10, 10, 10});
        const auto s = split(c, SplitSpec{});
        write_split(dir, SplitSpec{}, s);
        CHECK(aes::read_lines(dir / "train_ids.txt") == s.train);
        CHECK(aes::read_lines(dir / "validation_ids.txt") == s.validation);
        CHECK(aes::read_lines(dir / "test_ids.txt") == s.test);
        CHECK(std::filesystem::exists(dir / "split.json"));
    }
}
