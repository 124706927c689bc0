#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace sasano {

struct Partition {
    std::vector<int> parts;  // weakly decreasing

    Partition() = default;
    explicit Partition(std::vector<int> p) : parts(std::move(p)) {
        std::sort(parts.begin(), parts.end(), std::greater<int>());
    }

    int sum() const { return std::accumulate(parts.begin(), parts.end(), 0); }

    std::string str() const {
        std::string s;
        for (int p : parts) s += std::to_string(p);
        return s;
    }

    bool operator==(const Partition& o) const { return parts == o.parts; }
    bool operator!=(const Partition& o) const { return !(*this == o); }
};

// Dense univariate polynomial with ascending coefficients; only the exact
// field ever goes through the gcd path.
template <class K>
struct Poly {
    std::vector<K> c;

    void trim() {
        while (!c.empty() && field<K>::is_zero(c.back())) c.pop_back();
    }
    int deg() const { return int(c.size()) - 1; }
    bool is_zero() const { return c.empty(); }

    Poly derivative() const {
        Poly d;
        for (size_t k = 1; k < c.size(); ++k) d.c.push_back(K(c[k] * field<K>::of(long(k))));
        d.trim();
        return d;
    }

    Poly monic() const {
        Poly r = *this;
        if (r.is_zero()) return r;
        K lead = r.c.back();
        for (K& x : r.c) x /= lead;
        return r;
    }
};

template <class K>
inline Poly<K> poly_rem(Poly<K> a, const Poly<K>& b) {
    require(!b.is_zero(), "poly_rem: division by zero polynomial");
    while (!a.is_zero() && a.deg() >= b.deg()) {
        K f = a.c.back() / b.c.back();
        int shift = a.deg() - b.deg();
        for (int k = 0; k <= b.deg(); ++k) a.c[k + shift] -= f * b.c[k];
        a.c.pop_back();
        a.trim();
    }
    return a;
}

template <class K>
inline Poly<K> poly_quot(Poly<K> a, const Poly<K>& b) {
    require(!b.is_zero(), "poly_quot: division by zero polynomial");
    Poly<K> q;
    if (a.deg() < b.deg()) return q;
    q.c.assign(size_t(a.deg() - b.deg()) + 1, field<K>::zero());
    while (!a.is_zero() && a.deg() >= b.deg()) {
        K f = a.c.back() / b.c.back();
        int shift = a.deg() - b.deg();
        q.c[shift] = f;
        for (int k = 0; k <= b.deg(); ++k) a.c[k + shift] -= f * b.c[k];
        a.c.pop_back();
        a.trim();
    }
    q.trim();
    return q;
}

template <class K>
inline Poly<K> poly_gcd(Poly<K> a, Poly<K> b) {
    a.trim();
    b.trim();
    while (!b.is_zero()) {
        Poly<K> r = poly_rem(a, b);
        a = b;
        b = r;
    }
    return a.monic();
}

// Characteristic polynomial det(xI - A) by the Faddeev-LeVerrier recursion;
// all divisions are by integers, so it is exact over the rationals.
template <class K>
inline Poly<K> char_poly(const Matrix<K>& a) {
    require(a.square(), "char_poly: not square");
    int n = a.rows();
    Poly<K> p;
    p.c.assign(size_t(n) + 1, field<K>::zero());
    p.c[n] = field<K>::one();
    Matrix<K> m = Matrix<K>::identity(n);
    for (int k = 1; k <= n; ++k) {
        m = a * m;
        K ck = -m.trace() / field<K>::of(k);
        p.c[n - k] = ck;
        for (int i = 0; i < n; ++i) m(i, i) += ck;
    }
    return p;
}

// Squarefree decomposition by Yun's algorithm: monic squarefree factors
// paired with their multiplicity, nontrivial factors only.
template <class K>
inline std::vector<std::pair<Poly<K>, int>> squarefree_factors(const Poly<K>& p_in) {
    static_assert(field<K>::exact, "squarefree_factors requires an exact field");
    Poly<K> p = p_in.monic();
    require(!p.is_zero(), "squarefree_factors: zero polynomial");
    std::vector<std::pair<Poly<K>, int>> out;
    Poly<K> dp = p.derivative();
    Poly<K> g = poly_gcd(p, dp);
    Poly<K> c = poly_quot(p, g);
    Poly<K> d;
    {
        Poly<K> t = poly_quot(dp, g);
        Poly<K> cd = c.derivative();
        d = t;
        d.c.resize(std::max(d.c.size(), cd.c.size()), field<K>::zero());
        for (size_t k = 0; k < cd.c.size(); ++k) d.c[k] -= cd.c[k];
        d.trim();
    }
    int mult = 1;
    while (c.deg() > 0) {
        Poly<K> f = poly_gcd(c, d);
        if (f.deg() > 0) out.emplace_back(f, mult);
        c = poly_quot(c, f);
        Poly<K> t = poly_quot(d, f);
        Poly<K> cd = c.derivative();
        d = t;
        d.c.resize(std::max(d.c.size(), cd.c.size()), field<K>::zero());
        for (size_t k = 0; k < cd.c.size(); ++k) d.c[k] -= cd.c[k];
        d.trim();
        ++mult;
    }
    return out;
}

// Multiplicity partition of the roots of a squarefree-decomposable monic
// polynomial: each squarefree factor of multiplicity m contributes deg-many
// parts equal to m.
template <class K>
inline Partition root_multiplicities(const Poly<K>& p_in) {
    std::vector<int> parts;
    for (const auto& fm : squarefree_factors(p_in))
        for (int k = 0; k < fm.first.deg(); ++k) parts.push_back(fm.second);
    return Partition(parts);
}

inline Eigen::MatrixXcd to_eigen(const Matrix<Cplx>& m) {
    Eigen::MatrixXcd e(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

inline Matrix<Cplx> from_eigen(const Eigen::MatrixXcd& e) {
    Matrix<Cplx> m(int(e.rows()), int(e.cols()));
    for (int i = 0; i < e.rows(); ++i)
        for (int j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
    return m;
}

// Eigenvalues sorted by (real, imag); deterministic for fixed input bits.
inline std::vector<Cplx> eigenvalues(const Matrix<Cplx>& m) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(to_eigen(m), false);
    require(es.info() == Eigen::Success, "eigenvalues: solver failed");
    std::vector<Cplx> ev(size_t(m.rows()));
    for (int i = 0; i < m.rows(); ++i) ev[size_t(i)] = es.eigenvalues()(i);
    std::sort(ev.begin(), ev.end(), [](const Cplx& a, const Cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

namespace detail {
struct UnionFind {
    std::vector<int> up;
    explicit UnionFind(int n) : up(n) {
        for (int i = 0; i < n; ++i) up[i] = i;
    }
    int find(int i) { return up[i] == i ? i : up[i] = find(up[i]); }
    void unite(int i, int j) { up[find(i)] = find(j); }
};
}  // namespace detail

// Partition of eigenvalue multiplicities. Floating mode clusters computed
// eigenvalues with a union-find at the given tolerance and refuses ambiguous
// inputs (distinct clusters closer than twice the merge tolerance). Exact
// mode reads multiplicities off the characteristic polynomial and needs no
// eigenvalues at all.
template <class K>
inline Partition spectral_type(const Matrix<K>& m, double tol = -1.0) {
    require(m.square(), "spectral_type: not square");
    if constexpr (field<K>::exact) {
        return root_multiplicities(char_poly(m));
    } else {
        if (tol < 0) tol = 1e-8 * (1.0 + m.max_mag());
        std::vector<Cplx> ev = eigenvalues(m);
        int n = int(ev.size());
        detail::UnionFind uf(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(ev[size_t(i)] - ev[size_t(j)]) <= tol) uf.unite(i, j);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (uf.find(i) != uf.find(j))
                    require(std::abs(ev[size_t(i)] - ev[size_t(j)]) > 2.0 * tol,
                            "spectral_type: ambiguous eigenvalue clustering");
        std::vector<int> count(size_t(n), 0);
        for (int i = 0; i < n; ++i) ++count[size_t(uf.find(i))];
        std::vector<int> parts;
        for (int c : count)
            if (c > 0) parts.push_back(c);
        return Partition(parts);
    }
}

template <class K>
inline K poly_eval(const Poly<K>& p, const K& x) {
    K v = field<K>::zero();
    for (size_t k = p.c.size(); k-- > 0;) v = K(v * x + p.c[k]);
    return v;
}

namespace detail {

inline bool rat_sqrt(const Rat& x, Rat& out) {
    if (sgn(x) < 0) return false;
    mpz_class n(sqrt(x.get_num()));
    mpz_class d(sqrt(x.get_den()));
    if (n * n != x.get_num() || d * d != x.get_den()) return false;
    out = Rat(n, d);
    return true;
}

// Continued-fraction convergents of x, fed to the acceptance predicate until
// one passes or the denominators outgrow the search window.
template <class F>
inline bool convergent_search(double x, F&& accept) {
    mpz_class h0(0), h1(1), k0(1), k1(0);
    double y = x;
    for (int it = 0; it < 64; ++it) {
        double fa = std::floor(y);
        if (std::fabs(fa) > 1e15) break;
        mpz_class a(static_cast<long>(fa));
        mpz_class h2(a * h1 + h0), k2(a * k1 + k0);
        if (k2 > 10000000) break;
        Rat cand(h2, k2);
        cand.canonicalize();
        if (accept(cand)) return true;
        double frac = y - fa;
        if (frac < 1e-13) break;
        y = 1.0 / frac;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    return false;
}

}  // namespace detail

// Every root of a polynomial that splits into rational linear factors,
// ascending (call on squarefree input; repeated roots would defeat the
// numeric seeding). Closed forms cover degree <= 2; beyond that each root is
// recovered from a numeric approximation by continued-fraction convergents,
// accepted only where the polynomial vanishes exactly, and divided out.
template <class K>
inline std::vector<K> rational_roots_complete(const Poly<K>& p_in) {
    static_assert(field<K>::exact, "rational_roots_complete requires an exact field");
    Poly<K> w = p_in.monic();
    require(!w.is_zero(), "rational_roots_complete: zero polynomial");
    std::vector<K> roots;
    while (w.deg() > 2) {
        int n = w.deg();
        Matrix<Cplx> comp(n, n);
        for (int i = 0; i + 1 < n; ++i) comp(i + 1, i) = field<Cplx>::one();
        for (int i = 0; i < n; ++i) comp(i, n - 1) = -field<K>::to_cplx(w.c[size_t(i)]);
        bool found = false;
        for (const Cplx& e : eigenvalues(comp)) {
            if (std::fabs(e.imag()) > 1e-6) continue;
            found = detail::convergent_search(e.real(), [&](const Rat& cand) {
                K r = K(cand);
                if (!field<K>::is_zero(poly_eval(w, r))) return false;
                Poly<K> lin;
                lin.c = {K(-r), field<K>::one()};
                w = poly_quot(w, lin);
                roots.push_back(r);
                return true;
            });
            if (found) break;
        }
        require(found, "rational_roots_complete: irrational root encountered");
    }
    if (w.deg() == 2) {
        K half_b = K(w.c[1] / field<K>::of(2));
        Rat disc;
        require(detail::rat_sqrt(Rat(K(half_b * half_b - w.c[0])), disc),
                "rational_roots_complete: irrational root encountered");
        roots.push_back(K(K(disc) - half_b));
        roots.push_back(K(K(-disc) - half_b));
    } else if (w.deg() == 1) {
        roots.push_back(K(-w.c[0]));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

// Exact eigenvector for a known rational eigenvalue; errors when kappa is not
// actually an eigenvalue or the eigenspace is not one-dimensional.
template <class K>
inline std::vector<K> exact_eigenvector(const Matrix<K>& a, const K& kappa) {
    Matrix<K> shifted = a;
    for (int i = 0; i < a.rows(); ++i) shifted(i, i) -= kappa;
    Matrix<K> ns = nullspace(shifted);
    require(ns.cols() == 1, "exact_eigenvector: eigenvalue not simple or not in spectrum");
    std::vector<K> v(size_t(a.rows()));
    for (int i = 0; i < a.rows(); ++i) v[size_t(i)] = ns(i, 0);
    return v;
}

}  // namespace sasano
