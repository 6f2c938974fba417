#include "cvqkd/codes.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

namespace cvqkd {

namespace {

int gf2_rank(std::vector<std::uint32_t> rows) {
    int rank = 0;
    for (int col = 0; col < 32 && rank < static_cast<int>(rows.size()); ++col) {
        const std::uint32_t bit = 1u << col;
        int pivot = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (rows[static_cast<size_t>(r)] & bit) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(rows[static_cast<size_t>(rank)], rows[static_cast<size_t>(pivot)]);
        for (int r = 0; r < static_cast<int>(rows.size()); ++r)
            if (r != rank && (rows[static_cast<size_t>(r)] & bit))
                rows[static_cast<size_t>(r)] ^= rows[static_cast<size_t>(rank)];
        ++rank;
    }
    return rank;
}

std::uint32_t pack(const BitVec& v) {
    std::uint32_t m = 0;
    for (size_t i = 0; i < v.size(); ++i)
        if (v[i]) m |= 1u << i;
    return m;
}

BitVec unpack(std::uint32_t m, int n) {
    BitVec v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = (m >> i) & 1u;
    return v;
}

std::uint32_t syndrome_mask(const ParityCheckMatrix& h, std::uint32_t v) {
    std::uint32_t s = 0;
    for (int r = 0; r < h.rows; ++r)
        if (std::popcount(h.row_masks[static_cast<size_t>(r)] & v) & 1) s |= 1u << r;
    return s;
}

// Coset leaders by increasing weight; within one weight, Gosper's hack visits
// masks in increasing numeric order, which is the documented tie-break.
void build_coset_table(const ParityCheckMatrix& h) {
    if (h.cols > 24) throw std::invalid_argument("syndrome_decode: exhaustive table needs cols <= 24");
    const std::uint32_t none = 0xffffffffu;
    h.coset_leaders.assign(size_t{1} << h.rows, none);
    size_t filled = 0;
    const size_t want = size_t{1} << h.rank;  // reachable syndromes
    for (int w = 0; w <= h.cols && filled < want; ++w) {
        if (w == 0) {
            h.coset_leaders[0] = 0;
            ++filled;
            continue;
        }
        std::uint32_t m = (1u << w) - 1;
        const std::uint32_t limit = 1u << h.cols;
        while (m < limit) {
            const std::uint32_t s = syndrome_mask(h, m);
            if (h.coset_leaders[s] == none) {
                h.coset_leaders[s] = m;
                if (++filled == want) break;
            }
            const std::uint32_t c = m & (~m + 1);
            const std::uint32_t r = m + c;
            m = (((r ^ m) >> 2) / c) | r;
        }
    }
}

}  // namespace

ParityCheckMatrix ParityCheckMatrix::from_rows(int cols, std::vector<std::uint32_t> rows) {
    if (cols < 1 || cols > 24) throw std::invalid_argument("ParityCheckMatrix: cols outside 1..24");
    if (rows.size() > static_cast<size_t>(cols))
        throw std::invalid_argument("ParityCheckMatrix: more rows than columns");
    for (std::uint32_t r : rows)
        if (r >> cols) throw std::invalid_argument("ParityCheckMatrix: row has bits beyond cols");
    ParityCheckMatrix h;
    h.cols = cols;
    h.rows = static_cast<int>(rows.size());
    h.row_masks = std::move(rows);
    h.rank = gf2_rank(h.row_masks);
    h.full_row_rank = h.rank == h.rows;
    return h;
}

ParityCheckMatrix ParityCheckMatrix::from_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bit-matrix file: " + path);
    std::vector<std::uint32_t> rows;
    int cols = -1;
    std::string line;
    while (std::getline(in, line)) {
        std::uint32_t mask = 0;
        int n = 0;
        for (char c : line) {
            if (c == ' ' || c == '\t' || c == '\r') continue;
            if (c != '0' && c != '1') throw std::runtime_error("bit-matrix file: bad character");
            if (c == '1') mask |= 1u << n;
            ++n;
        }
        if (n == 0) continue;
        if (cols < 0) cols = n;
        if (n != cols) throw std::runtime_error("bit-matrix file: ragged rows");
        rows.push_back(mask);
    }
    if (cols < 0) throw std::runtime_error("bit-matrix file: empty");
    return from_rows(cols, std::move(rows));
}

BitVec syndrome(const ParityCheckMatrix& h, const BitVec& v) {
    if (static_cast<int>(v.size()) != h.cols) throw std::invalid_argument("syndrome: length mismatch");
    return unpack(syndrome_mask(h, pack(v)), h.rows);
}

BitVec syndrome_decode(const BitVec& v, const BitVec& xi, const ParityCheckMatrix& h1) {
    if (static_cast<int>(v.size()) != h1.cols) throw std::invalid_argument("syndrome_decode: length mismatch");
    if (static_cast<int>(xi.size()) != h1.rows)
        throw std::invalid_argument("syndrome_decode: syndrome length mismatch");
    if (h1.coset_leaders.empty()) build_coset_table(h1);
    const std::uint32_t target = syndrome_mask(h1, pack(v)) ^ pack(xi);
    const std::uint32_t leader = h1.coset_leaders[target];
    if (leader == 0xffffffffu)
        throw std::invalid_argument("syndrome_decode: syndrome outside the row space");
    return unpack(pack(v) ^ leader, h1.cols);
}

BitVec privacy_amplify(const ParityCheckMatrix& h2, const BitVec& k) {
    if (static_cast<int>(k.size()) != h2.cols)
        throw std::invalid_argument("privacy_amplify: length mismatch");
    return syndrome(h2, k);
}

bool verify_nested(const NestedCodePair& p) {
    if (p.h1.cols != p.h2.cols) return false;
    const int n = p.h2.cols;
    // reduced row echelon form of h2, tracking pivot columns
    std::vector<std::uint32_t> rows = p.h2.row_masks;
    std::vector<int> pivot_col;
    int rank = 0;
    for (int col = 0; col < n && rank < static_cast<int>(rows.size()); ++col) {
        const std::uint32_t bit = 1u << col;
        int pivot = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (rows[static_cast<size_t>(r)] & bit) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(rows[static_cast<size_t>(rank)], rows[static_cast<size_t>(pivot)]);
        for (int r = 0; r < static_cast<int>(rows.size()); ++r)
            if (r != rank && (rows[static_cast<size_t>(r)] & bit))
                rows[static_cast<size_t>(r)] ^= rows[static_cast<size_t>(rank)];
        pivot_col.push_back(col);
        ++rank;
    }
    // kernel basis: one vector per free column
    for (int col = 0; col < n; ++col) {
        bool is_pivot = false;
        for (int pc : pivot_col)
            if (pc == col) {
                is_pivot = true;
                break;
            }
        if (is_pivot) continue;
        std::uint32_t vec = 1u << col;
        for (int r = 0; r < rank; ++r)
            if (rows[static_cast<size_t>(r)] & (1u << col)) vec |= 1u << pivot_col[static_cast<size_t>(r)];
        if (syndrome_mask(p.h1, vec) != 0) return false;
    }
    return true;
}

ParityCheckMatrix repetition_check(int n) {
    if (n < 2 || n > 24) throw std::invalid_argument("repetition_check: n outside 2..24");
    std::vector<std::uint32_t> rows;
    for (int i = 0; i + 1 < n; ++i) rows.push_back(3u << i);  // v_i + v_{i+1} = 0
    return ParityCheckMatrix::from_rows(n, std::move(rows));
}

ParityCheckMatrix hamming74_check() {
    // column for position j (1-based) is j in binary, row r = bit r
    std::vector<std::uint32_t> rows(3, 0);
    for (int j = 1; j <= 7; ++j)
        for (int r = 0; r < 3; ++r)
            if ((j >> r) & 1) rows[static_cast<size_t>(r)] |= 1u << (j - 1);
    return ParityCheckMatrix::from_rows(7, std::move(rows));
}

ParityCheckMatrix bch15_check() {
    // generator g(x) = x^8 + x^7 + x^6 + x^4 + 1 for the [15,7] code with
    // minimum distance 5; G rows are shifts of g, brought to systematic form
    // [I | P], whence H = [P^T | I].
    const std::uint32_t g = 0b111010001;
    std::vector<std::uint32_t> gen;
    for (int i = 0; i < 7; ++i) gen.push_back(g << i);
    for (int col = 0; col < 7; ++col) {
        const std::uint32_t bit = 1u << col;
        for (int r = 0; r < 7; ++r)
            if (r != col && (gen[static_cast<size_t>(r)] & bit)) gen[static_cast<size_t>(r)] ^= gen[static_cast<size_t>(col)];
    }
    std::vector<std::uint32_t> rows;
    for (int r = 0; r < 8; ++r) {
        std::uint32_t mask = 1u << (7 + r);  // identity part
        for (int j = 0; j < 7; ++j)
            if ((gen[static_cast<size_t>(j)] >> (7 + r)) & 1) mask |= 1u << j;  // P^T part
        rows.push_back(mask);
    }
    return ParityCheckMatrix::from_rows(15, std::move(rows));
}

NestedCodePair hamming74_pair() {
    return NestedCodePair{hamming74_check(), repetition_check(7)};
}

NestedCodePair code_pair_by_name(const std::string& name) {
    if (name == "hamming74") return hamming74_pair();
    throw std::invalid_argument("unknown code pair: " + name);
}

}  // namespace cvqkd
