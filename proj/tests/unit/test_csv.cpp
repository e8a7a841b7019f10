#include <doctest.h>

#include <sstream>

#include "aes/csv.hpp"
#include "aes/error.hpp"
#include "aes/feature_matrix.hpp"
#include "test_util.hpp"

TEST_SUITE("csv") {
    TEST_CASE("quoted fields, escapes, CRLF and embedded newlines") {
        const auto t = aes::parse_csv("\xEF\xBB\xBFid,text\r\n1,\"a, \"\"b\"\"\nc\"\r\n2,plain\n");
        REQUIRE(t.header == std::vector<std::string>{"id", "text"});
        REQUIRE(t.rows.size() == 2);
        CHECK(t.rows[0].fields[1] == "a, \"b\"\nc");
        CHECK(t.rows[1].fields[1] == "plain");
        CHECK(t.rows[1].line == 4);
        CHECK(t.column("text") == 1);
        CHECK(t.column("nope") == aes::CsvTable::npos);
    }

    TEST_CASE("malformed input names the line") {
        CHECK_THROWS_AS(aes::parse_csv("a,b\n1,\"open\n"), aes::ValidationError);
        try {
            aes::parse_csv("a,b\n1,2\n3\n");
            FAIL("expected error");
        } catch (const aes::ValidationError& e) {
            CHECK(std::string(e.what()).find(":3") != std::string::npos);
        }
    }

    TEST_CASE("escape and write round trip") {
        std::ostringstream os;
        aes::write_csv_row(os, {"x", "has,comma", "has\"quote", "line\nbreak"});
        const auto t = aes::parse_csv("h1,h2,h3,h4\n" + os.str());
        REQUIRE(t.rows.size() == 1);
        CHECK(t.rows[0].fields == std::vector<std::string>{"x", "has,comma", "has\"quote", "line\nbreak"});
    }

    TEST_CASE("format_double round-trips") {
        for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 6.0}) {
            CHECK(aes::parse_double(aes::format_double(v), "v") == v);
        }
        CHECK(aes::format_double(3.0) == "3");
        CHECK(aes::parse_double(aes::format_double(3.1017994877595759e-313), "v") == 3.1017994877595759e-313);
        CHECK(aes::parse_double("1e-400", "v") == 0.0);
        CHECK_THROWS_AS(aes::parse_double("1e400", "v"), aes::ValidationError);
        CHECK_THROWS_AS(aes::parse_double("abc", "v"), aes::ValidationError);
        CHECK_THROWS_AS(aes::parse_int("2.5", "v"), aes::ValidationError);
    }

    TEST_CASE("dense matrix CSV round trip and hconcat alignment") {
        const auto dir = testutil::scratch("csv_dense");
        aes::FeatureMatrix m({"a", "b"}, {"r1", "r2"});
        m(0, 0) = 0.1;
        m(0, 1) = -3;
        m(1, 0) = 1e-17;
        m(1, 1) = 42;
        aes::write_dense_csv(dir / "m.csv", m);
        const auto back = aes::read_dense_csv(dir / "m.csv");
        CHECK(back.column_names() == m.column_names());
        CHECK(back.row_ids() == m.row_ids());
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c) CHECK(back(r, c) == m(r, c));

        aes::FeatureMatrix other({"c"}, {"r2", "r1"});
        other(0, 0) = 2;
        other(1, 0) = 1;
        std::vector<aes::FeatureMatrix> parts{m, other};
        const auto joined = aes::hconcat(parts);
        CHECK(joined.cols() == 3);
        CHECK(joined(0, 2) == 1);
        CHECK(joined(1, 2) == 2);

        aes::FeatureMatrix bad({"c"}, {"r1", "zz"});
        std::vector<aes::FeatureMatrix> bad_parts{m, bad};
        CHECK_THROWS_AS(aes::hconcat(bad_parts), aes::ValidationError);
        CHECK_THROWS_AS(aes::FeatureMatrix({"a"}, {"x", "x"}), aes::ValidationError);
    }
}
