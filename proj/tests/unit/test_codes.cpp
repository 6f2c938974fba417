#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "cvqkd/codes.hpp"

using namespace cvqkd;

namespace {

BitVec xor_vec(const BitVec& a, const BitVec& b) {
    BitVec out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

BitVec from_mask(std::uint32_t mask, int n) {
    BitVec v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = (mask >> i) & 1u;
    return v;
}

int weight(const BitVec& v) { return std::accumulate(v.begin(), v.end(), 0); }

}  // namespace

TEST_CASE("hamming [7,4] check matrix has the position-index columns") {
    auto h = hamming74_check();
    CHECK(h.rows == 3);
    CHECK(h.cols == 7);
    CHECK(h.rank == 3);
    CHECK(h.full_row_rank);
    for (int j = 0; j < 7; ++j) {
        for (int r = 0; r < 3; ++r) {
            const unsigned bit = (h.row_masks[static_cast<size_t>(r)] >> j) & 1u;
            CHECK(bit == (((j + 1) >> r) & 1));
        }
    }
    // single-position syndrome equals that column
    auto s = syndrome(h, from_mask(1u << 2, 7));
    CHECK(s == BitVec{1, 1, 0});  // position 2 -> 3 = 0b011
}

TEST_CASE("syndrome decoding corrects every single error on every word") {
    auto h = hamming74_check();
    for (std::uint32_t word = 0; word < 128; ++word) {
        auto a = from_mask(word, 7);
        auto xi = syndrome(h, a);
        for (int epos = -1; epos < 7; ++epos) {
            auto v = a;
            if (epos >= 0) v[static_cast<size_t>(epos)] ^= 1u;
            CHECK(syndrome_decode(v, xi, h) == a);
        }
    }
}

TEST_CASE("two flips exceed the correction radius") {
    auto h = hamming74_check();
    BitVec a(7, 0);
    auto xi = syndrome(h, a);
    auto v = from_mask(0b0000011, 7);
    auto decoded = syndrome_decode(v, xi, h);
    CHECK(decoded != a);  // lands on the wrong coset representative
    CHECK(syndrome(h, decoded) == xi);
}

TEST_CASE("decoding commutes with translation") {
    auto h = hamming74_check();
    std::mt19937 gen(99);
    for (int trial = 0; trial < 60; ++trial) {
        auto v = from_mask(gen() & 0x7f, 7);
        auto w = from_mask(gen() & 0x7f, 7);
        auto a = from_mask(gen() & 0x7f, 7);
        auto xi = syndrome(h, a);
        auto lhs = syndrome_decode(xor_vec(v, w), xor_vec(xi, syndrome(h, w)), h);
        auto rhs = xor_vec(syndrome_decode(v, xi, h), w);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("coset-leader ties go to the lexicographically smallest pattern") {
    auto h = ParityCheckMatrix::from_rows(2, {0b11u});
    auto decoded = syndrome_decode(BitVec{0, 0}, BitVec{1}, h);
    CHECK(decoded == BitVec{1, 0});  // positions 0 and 1 tie at weight one
}

TEST_CASE("repetition code kernel is the all-zeros and all-ones pair") {
    auto r = repetition_check(7);
    CHECK(r.rows == 6);
    CHECK(r.cols == 7);
    CHECK(r.rank == 6);
    CHECK(weight(syndrome(r, BitVec(7, 1))) == 0);
    CHECK(weight(syndrome(r, BitVec(7, 0))) == 0);
    CHECK(weight(syndrome(r, from_mask(1, 7))) > 0);
    CHECK_THROWS_AS(repetition_check(1), std::invalid_argument);
    CHECK_THROWS_AS(repetition_check(25), std::invalid_argument);
}

TEST_CASE("bch [15,7] code has minimum distance five") {
    auto h = bch15_check();
    CHECK(h.rows == 8);
    CHECK(h.cols == 15);
    CHECK(h.rank == 8);
    int codewords = 0, min_weight = 15;
    for (std::uint32_t mask = 0; mask < (1u << 15); ++mask) {
        auto v = from_mask(mask, 15);
        if (weight(syndrome(h, v)) == 0) {
            ++codewords;
            if (mask != 0) min_weight = std::min(min_weight, weight(v));
        }
    }
    CHECK(codewords == 128);
    CHECK(min_weight == 5);
}

TEST_CASE("shipped pair nests the repetition code inside the hamming code") {
    auto pair = hamming74_pair();
    CHECK(pair.h2.rows == 6);
    CHECK(pair.h2.cols == 7);
    CHECK(weight(syndrome(pair.h2, BitVec(7, 1))) == 0);
    CHECK(verify_nested(pair));

    // the reverse containment is false: hamming words are not repetitions
    NestedCodePair reversed{repetition_check(7), hamming74_check()};
    CHECK_FALSE(verify_nested(reversed));

    auto by_name = code_pair_by_name("hamming74");
    CHECK(by_name.h1.rows == pair.h1.rows);
    CHECK_THROWS_AS(code_pair_by_name("turbo"), std::invalid_argument);
}

TEST_CASE("key compression is the parity map of the amplifier matrix") {
    auto h = ParityCheckMatrix::from_rows(3, {0b011u, 0b110u});
    auto out = privacy_amplify(h, BitVec{1, 0, 1});
    CHECK(out == BitVec{1, 1});
    CHECK_THROWS_AS(privacy_amplify(h, BitVec{1, 0}), std::invalid_argument);
}

TEST_CASE("matrix construction guards") {
    CHECK_THROWS_AS(ParityCheckMatrix::from_rows(25, {}), std::invalid_argument);
    CHECK_THROWS_AS(ParityCheckMatrix::from_rows(2, {1u, 2u, 3u}), std::invalid_argument);
    CHECK_THROWS_AS(ParityCheckMatrix::from_rows(2, {0b100u}), std::invalid_argument);
    auto h = hamming74_check();
    CHECK_THROWS_AS(syndrome(h, BitVec{1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(syndrome_decode(BitVec(7, 0), BitVec{1}, h), std::invalid_argument);
    // a rank-deficient matrix rejects syndromes outside its row space
    auto dup = ParityCheckMatrix::from_rows(3, {0b011u, 0b011u});
    CHECK_FALSE(dup.full_row_rank);
    CHECK_THROWS_AS(syndrome_decode(BitVec(3, 0), BitVec{1, 0}, dup), std::invalid_argument);
}

TEST_CASE("plain-text matrix loader") {
    const std::string path = "/tmp/cvqkd_test_matrix.txt";
    {
        std::ofstream out(path);
        out << "1 0 1\n011\n";
    }
    auto h = ParityCheckMatrix::from_text_file(path);
    CHECK(h.rows == 2);
    CHECK(h.cols == 3);
    CHECK(h.row_masks[0] == 0b101u);
    CHECK(h.row_masks[1] == 0b110u);

    {
        std::ofstream out(path);
        out << "10x\n";
    }
    CHECK_THROWS_AS(ParityCheckMatrix::from_text_file(path), std::runtime_error);
    {
        std::ofstream out(path);
        out << "101\n01\n";
    }
    CHECK_THROWS_AS(ParityCheckMatrix::from_text_file(path), std::runtime_error);
    {
        std::ofstream out(path);
        out << "";
    }
    CHECK_THROWS(ParityCheckMatrix::from_text_file(path));
    CHECK_THROWS_AS(ParityCheckMatrix::from_text_file("/nonexistent/file.txt"),
                    std::runtime_error);
    std::remove(path.c_str());
}
