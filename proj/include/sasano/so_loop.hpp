#pragma once

#include <vector>

#include "sasano/laurent.hpp"

namespace sasano {

// Orthogonal loop algebra so_{2N}[z, z^{-1}] with the anti-diagonal form:
// membership means J X + X^t J = 0 at every z-power.
template <class K>
struct SoAlgebra {
    int N = 0;
    Matrix<K> J;
    std::vector<ZMatrix<K>> e, f, h;  // e[0..N], f[0..N], h[1..N]; h[0] stays empty
};

namespace detail {

template <class K>
Matrix<K> so_unit(int two_n, int i, int j) {
    Matrix<K> m(two_n, two_n);
    m(i - 1, j - 1) = field<K>::one();
    m(two_n - j, two_n - i) = m(two_n - j, two_n - i) - field<K>::one();
    return m;
}

}  // namespace detail

// X_{i,j} = E_{i,j} - E_{2N+1-j,2N+1-i} as a constant loop element (1-based).
template <class K>
ZMatrix<K> so_x(int n_half, int i, int j) {
    const int two_n = 2 * n_half;
    require(i >= 1 && i <= two_n && j >= 1 && j <= two_n, "so_x: index out of range");
    return ZMatrix<K>(detail::so_unit<K>(two_n, i, j));
}

template <class K>
SoAlgebra<K> so_generators(int n_half) {
    require(n_half >= 3, "so_generators: need N >= 3");
    const int two_n = 2 * n_half;
    SoAlgebra<K> alg;
    alg.N = n_half;
    alg.J = Matrix<K>(two_n, two_n);
    for (int i = 1; i <= two_n; ++i) alg.J(i - 1, two_n - i) = field<K>::one();

    alg.e.assign(size_t(n_half) + 1, ZMatrix<K>(two_n, two_n));
    alg.f.assign(size_t(n_half) + 1, ZMatrix<K>(two_n, two_n));
    alg.h.assign(size_t(n_half) + 1, ZMatrix<K>(two_n, two_n));

    ZMatrix<K> e0(two_n, two_n), f0(two_n, two_n);
    e0.set_coeff(1, detail::so_unit<K>(two_n, two_n - 1, 1));
    f0.set_coeff(-1, detail::so_unit<K>(two_n, 1, two_n - 1));
    alg.e[0] = e0;
    alg.f[0] = f0;
    for (int i = 1; i < n_half; ++i) {
        alg.e[size_t(i)] = so_x<K>(n_half, i, i + 1);
        alg.f[size_t(i)] = so_x<K>(n_half, i + 1, i);
    }
    alg.e[size_t(n_half)] = so_x<K>(n_half, n_half - 1, n_half + 1);
    alg.f[size_t(n_half)] = so_x<K>(n_half, n_half + 1, n_half - 1);
    for (int i = 1; i <= n_half; ++i) alg.h[size_t(i)] = so_x<K>(n_half, i, i);
    return alg;
}

template <class K>
bool in_so_algebra(const ZMatrix<K>& m, const Matrix<K>& j, double tol = 0.0) {
    if (m.rows() != j.rows() || m.cols() != j.cols()) return false;
    for (const auto& [p, c] : m.coeffs())
        if (!Matrix<K>(j * c + c.transpose() * j).is_zero(tol)) return false;
    return true;
}

// e_{i_1,...,i_k} = ad e_{i_1} ... ad e_{i_{k-1}} (e_{i_k}).
template <class K>
ZMatrix<K> nested_ad(const SoAlgebra<K>& alg, const std::vector<int>& idx) {
    require(!idx.empty(), "nested_ad: empty index word");
    for (int i : idx) require(i >= 0 && i <= alg.N, "nested_ad: index out of range");
    ZMatrix<K> acc = alg.e[size_t(idx.back())];
    for (size_t k = idx.size() - 1; k-- > 0;)
        acc = zmat_commutator(alg.e[size_t(idx[k])], acc);
    return acc;
}

enum class FlipKind { FULL, E1E4 };

namespace detail {

// The affine flip e_i -> e_{N-i} acts on the vector representation as
// conjugation by z^D T with T v_a = (-1)^{a+1} v_{a+N mod 2N} and
// D = diag(-1/2 ... , +1/2 ...); entrywise that is a signed relabeling with
// an integer z-shift, and it sends h_i to -h_{N+1-i}.
template <class K>
ZMatrix<K> flip_full(const ZMatrix<K>& m, int n_half) {
    const int two_n = 2 * n_half;
    ZMatrix<K> out(two_n, two_n);
    for (const auto& [p, c] : m.coeffs())
        for (int a = 0; a < two_n; ++a)
            for (int b = 0; b < two_n; ++b) {
                if (field<K>::is_zero(c(a, b))) continue;
                int a2 = (a + n_half) % two_n, b2 = (b + n_half) % two_n;
                int shift = (b >= n_half ? 1 : 0) - (a >= n_half ? 1 : 0);
                K val = ((a + b) % 2 == 0) ? c(a, b) : K(-c(a, b));
                out.add_to_entry(a2, b2, ZPoly<K>::monomial(p + shift, val));
            }
    return out;
}

// Bracket words over the finite generators, enough to span so_8; the node
// swap 1 <-> 4 maps each word by relabeling its letters, which realizes the
// diagram automorphism even though it has no vector-representation matrix.
template <class K>
struct FlipWord {
    std::vector<int> idx;
    int kind;  // 0: nested e-word, 1: nested f-word, 2: [e_i, f_i]
};

template <class K>
ZMatrix<K> word_value(const SoAlgebra<K>& alg, const FlipWord<K>& w) {
    if (w.kind == 2) return zmat_commutator(alg.e[size_t(w.idx[0])], alg.f[size_t(w.idx[0])]);
    const auto& gen = w.kind == 0 ? alg.e : alg.f;
    ZMatrix<K> acc = gen[size_t(w.idx.back())];
    for (size_t k = w.idx.size() - 1; k-- > 0;)
        acc = zmat_commutator(gen[size_t(w.idx[k])], acc);
    return acc;
}

template <class K>
std::vector<int> flip_word_indices(const std::vector<int>& idx) {
    std::vector<int> out;
    for (int i : idx) out.push_back(i == 1 ? 4 : i == 4 ? 1 : i);
    return out;
}

template <class K>
ZMatrix<K> flip_e1e4(const ZMatrix<K>& m, const SoAlgebra<K>& alg) {
    require(alg.N == 4, "dynkin_flip: the node swap 1<->4 lives in so_8");
    const int two_n = 8, dim = 28;

    // grow a spanning word list: Cartan brackets, then nested e- and f-words
    std::vector<FlipWord<K>> words;
    std::vector<ZMatrix<K>> values;
    Matrix<K> span(two_n * two_n, dim);
    int found = 0;
    auto try_word = [&](const FlipWord<K>& w) {
        if (found == dim) return;
        ZMatrix<K> val = word_value(alg, w);
        if (val.is_zero()) return;
        Matrix<K> probe(two_n * two_n, found + 1);
        for (int c = 0; c < found; ++c)
            for (int r = 0; r < two_n * two_n; ++r) probe(r, c) = span(r, c);
        Matrix<K> flat = val.coeff(0);
        for (int i = 0; i < two_n; ++i)
            for (int j = 0; j < two_n; ++j) probe(i * two_n + j, found) = flat(i, j);
        if (rank(probe) != found + 1) return;
        for (int i = 0; i < two_n; ++i)
            for (int j = 0; j < two_n; ++j) span(i * two_n + j, found) = flat(i, j);
        words.push_back(w);
        values.push_back(val);
        ++found;
    };
    for (int i = 1; i <= 4; ++i) try_word({{i}, 2});
    std::vector<std::vector<int>> layer;
    for (int i = 1; i <= 4; ++i) layer.push_back({i});
    for (int depth = 1; depth <= 6 && found < dim; ++depth) {
        std::vector<std::vector<int>> next;
        for (const auto& w : layer)
            for (int j = 1; j <= 4; ++j) {
                std::vector<int> grown{j};
                grown.insert(grown.end(), w.begin(), w.end());
                if (!nested_ad(alg, grown).is_zero()) next.push_back(grown);
            }
        for (const auto& w : layer) {
            try_word({w, 0});
            try_word({w, 1});
        }
        layer = next;
    }
    require(found == dim, "dynkin_flip: word basis incomplete");

    // one reduction of the span matrix serves every z-power of m
    ZMatrix<K> out(two_n, two_n);
    for (const auto& [p, c] : m.coeffs()) {
        Matrix<K> sys(two_n * two_n, dim + 1);
        for (int r = 0; r < two_n * two_n; ++r)
            for (int cidx = 0; cidx < dim; ++cidx) sys(r, cidx) = span(r, cidx);
        for (int i = 0; i < two_n; ++i)
            for (int j = 0; j < two_n; ++j) sys(i * two_n + j, dim) = c(i, j);
        std::vector<int> pivots = rref(sys);
        require(pivots.empty() || pivots.back() < dim, "dynkin_flip: matrix not in algebra span");
        ZMatrix<K> acc(two_n, two_n);
        for (size_t r = 0; r < pivots.size(); ++r) {
            K coefv = sys(int(r), dim);
            if (field<K>::is_zero(coefv)) continue;
            FlipWord<K> fw = words[size_t(pivots[r])];
            fw.idx = flip_word_indices<K>(fw.idx);
            acc = acc + word_value(alg, fw) * coefv;
        }
        out = out + acc.shifted(p);
    }
    return out;
}

}  // namespace detail

// Diagram-automorphism relabeling of a loop-algebra element. FULL is the
// affine flip e_i -> e_{N-i}; E1E4 swaps the two outer nodes 1 and 4 of so_8.
template <class K>
ZMatrix<K> dynkin_flip(const ZMatrix<K>& m, const SoAlgebra<K>& alg, FlipKind kind) {
    require(m.rows() == 2 * alg.N && m.cols() == 2 * alg.N, "dynkin_flip: size mismatch");
    require(in_so_algebra(m, alg.J, field<K>::exact ? 0.0 : 1e-9 * (1.0 + m.max_mag())),
            "dynkin_flip: matrix not in algebra span");
    if (kind == FlipKind::FULL) return detail::flip_full(m, alg.N);
    return detail::flip_e1e4(m, alg);
}

}  // namespace sasano
