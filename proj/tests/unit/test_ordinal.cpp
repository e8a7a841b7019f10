#include <doctest.h>

#include <numeric>

#include "aes/error.hpp"
#include "aes/ordinal.hpp"
#include "aes/rng.hpp"

using namespace aes::ordinal;

TEST_SUITE("ordinal") {
    TEST_CASE("encode examples and range") {
        CHECK(encode(1) == OrdinalCode{0, 0, 0, 0, 0});
        CHECK(encode(6) == OrdinalCode{1, 1, 1, 1, 1});
        CHECK(encode(3) == OrdinalCode{1, 1, 0, 0, 0});
        CHECK_THROWS_AS(encode(0), aes::ValidationError);
        CHECK_THROWS_AS(encode(7), aes::ValidationError);
    }

    TEST_CASE("decode examples") {
        CHECK(decode(std::vector<double>{0.9, 0.8, 0.2, 0.1, 0.0}) == 3);
        CHECK(decode(std::vector<double>{0.5, 0.5, 0.5, 0.5, 0.5}) == 1);
        CHECK(decode(std::vector<double>{0.1, 0.9, 0.1, 0.9, 0.1}) == 3);
        for (int s = 1; s <= 6; ++s) CHECK(decode(encode(s)) == s);
    }

    TEST_CASE("monotone in every coordinate, output in range") {
        aes::Rng rng(99);
        for (int i = 0; i < 2000; ++i) {
            std::vector<double> q(5);
            for (auto& v : q) v = rng.uniform01();
            const int before = decode(q);
            CHECK(before >= 1);
            CHECK(before <= 6);
            const auto k = rng.uniform_index(5);
            q[k] = q[k] + (1.0 - q[k]) * rng.uniform01();
            CHECK(decode(q) >= before);
        }
    }

    TEST_CASE("to_distribution lies on the simplex") {
        aes::Rng rng(5);
        for (int i = 0; i < 500; ++i) {
            std::vector<double> q(5);
            for (auto& v : q) v = rng.uniform01();
            const auto p = to_distribution(q);
            double sum = 0;
            for (double v : p) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
        const auto p = to_distribution(std::vector<double>{1, 1, 0, 0, 0});
        CHECK(p[2] == 1.0);
    }
}
