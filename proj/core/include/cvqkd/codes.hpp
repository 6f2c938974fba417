#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace cvqkd {

using BitVec = std::vector<std::uint8_t>;

/// Binary parity-check matrix, at most 24 columns so exhaustive coset-leader
/// tables stay affordable. Bit j of row_masks[r] is entry (r, j); bit 0 is
/// the first code position.
struct ParityCheckMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint32_t> row_masks;
    int rank = 0;
    bool full_row_rank = false;

    static ParityCheckMatrix from_rows(int cols, std::vector<std::uint32_t> rows);
    /// Plain-text loader: one row per line, '0'/'1' characters, optional spaces.
    static ParityCheckMatrix from_text_file(const std::string& path);

    // lazily built coset-leader table indexed by syndrome (single-threaded use)
    mutable std::vector<std::uint32_t> coset_leaders;
};

/// H * v over GF(2).
BitVec syndrome(const ParityCheckMatrix& h, const BitVec& v);

/// Corrects v to the nearest vector with syndrome xi: adds the minimum-weight
/// pattern l with H*l = H*v + xi. Ties go to the lexicographically smallest
/// pattern (position 1 read as the least significant bit).
BitVec syndrome_decode(const BitVec& v, const BitVec& xi, const ParityCheckMatrix& h1);

/// H2 * k over GF(2): the reconciled string compressed to its final key bits.
BitVec privacy_amplify(const ParityCheckMatrix& h2, const BitVec& k);

/// Two parity checks of the same length; the code killed by h2 must lie
/// inside the code killed by h1.
struct NestedCodePair {
    ParityCheckMatrix h1, h2;
};

/// Constructive check of the nesting: every kernel basis vector of h2 has
/// zero syndrome under h1.
bool verify_nested(const NestedCodePair& p);

/// Shipped codes.
ParityCheckMatrix repetition_check(int n);    // (n-1) x n, kernel {0, 1^n}
ParityCheckMatrix hamming74_check();          // 3 x 7, column j+1 in binary
ParityCheckMatrix bch15_check();              // 8 x 15, minimum distance 5
/// Hamming [7,4] as the error-correcting code with the repetition code nested
/// inside it; h2 is the 6 x 7 amplifier whose kernel is {0, 1^7}.
NestedCodePair hamming74_pair();
NestedCodePair code_pair_by_name(const std::string& name);

}  // namespace cvqkd
