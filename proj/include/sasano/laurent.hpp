#pragma once

#include <map>
#include <vector>

#include "matrix.hpp"

namespace sasano {

// Laurent polynomial in one variable z over K, sparse in the exponent.
template <class K>
class ZPoly {
   public:
    ZPoly() = default;
    explicit ZPoly(const K& c) {
        if (!field<K>::is_zero(c)) c_[0] = c;
    }
    static ZPoly monomial(int power, const K& c) {
        ZPoly p;
        if (!field<K>::is_zero(c)) p.c_[power] = c;
        return p;
    }

    const std::map<int, K>& coeffs() const { return c_; }
    bool is_zero(double tol = 0.0) const {
        for (const auto& [p, c] : c_)
            if (!field<K>::is_zero(c, tol)) return false;
        return true;
    }
    int lo() const { return c_.empty() ? 0 : c_.begin()->first; }
    int hi() const { return c_.empty() ? 0 : c_.rbegin()->first; }

    K coeff(int power) const {
        auto it = c_.find(power);
        return it == c_.end() ? field<K>::zero() : it->second;
    }

    void set(int power, const K& c) {
        if (field<K>::is_zero(c))
            c_.erase(power);
        else
            c_[power] = c;
    }

    ZPoly operator+(const ZPoly& o) const {
        ZPoly r = *this;
        for (const auto& [p, c] : o.c_) r.set(p, K(r.coeff(p) + c));
        return r;
    }
    ZPoly operator-(const ZPoly& o) const {
        ZPoly r = *this;
        for (const auto& [p, c] : o.c_) r.set(p, K(r.coeff(p) - c));
        return r;
    }
    ZPoly operator*(const ZPoly& o) const {
        ZPoly r;
        for (const auto& [p, c] : c_)
            for (const auto& [q, d] : o.c_) r.set(p + q, K(r.coeff(p + q) + c * d));
        return r;
    }
    ZPoly operator*(const K& s) const {
        ZPoly r;
        for (const auto& [p, c] : c_) r.set(p, K(c * s));
        return r;
    }
    ZPoly operator-() const { return *this * K(-field<K>::one()); }

    bool operator==(const ZPoly& o) const { return (*this - o).is_zero(); }

    K eval(const K& z) const {
        K acc = field<K>::zero();
        K zn = field<K>::one();
        int at = 0;
        for (const auto& [p, c] : c_) {
            require(p >= 0, "ZPoly::eval: negative power; shift first");
            while (at < p) {
                zn = zn * z;
                ++at;
            }
            acc += c * zn;
        }
        return acc;
    }

   private:
    std::map<int, K> c_;
};

// Matrix whose entries are Laurent polynomials in z, stored as a sparse map
// from power to coefficient matrix.
template <class K>
class ZMatrix {
   public:
    ZMatrix() : rows_(0), cols_(0) {}
    ZMatrix(int rows, int cols) : rows_(rows), cols_(cols) {}
    explicit ZMatrix(const Matrix<K>& m0) : rows_(m0.rows()), cols_(m0.cols()) { set_coeff(0, m0); }

    static ZMatrix identity(int n) { return ZMatrix(Matrix<K>::identity(n)); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    const std::map<int, Matrix<K>>& coeffs() const { return c_; }
    int lo() const { return c_.empty() ? 0 : c_.begin()->first; }
    int hi() const { return c_.empty() ? 0 : c_.rbegin()->first; }

    Matrix<K> coeff(int power) const {
        auto it = c_.find(power);
        return it == c_.end() ? Matrix<K>(rows_, cols_) : it->second;
    }

    void set_coeff(int power, const Matrix<K>& m) {
        require(m.rows() == rows_ && m.cols() == cols_, "ZMatrix::set_coeff: shape mismatch");
        if (m.is_zero())
            c_.erase(power);
        else
            c_[power] = m;
    }

    ZPoly<K> entry(int i, int j) const {
        ZPoly<K> p;
        for (const auto& [q, m] : c_) p.set(q, m(i, j));
        return p;
    }

    void set_entry(int i, int j, const ZPoly<K>& p) {
        for (auto& [q, m] : c_) m(i, j) = field<K>::zero();
        for (const auto& [q, c] : p.coeffs()) {
            if (!c_.count(q)) c_[q] = Matrix<K>(rows_, cols_);
            c_[q](i, j) = c;
        }
        prune();
    }

    void add_to_entry(int i, int j, const ZPoly<K>& p) { set_entry(i, j, ZPoly<K>(entry(i, j) + p)); }

    ZMatrix operator+(const ZMatrix& o) const {
        require(rows_ == o.rows_ && cols_ == o.cols_, "ZMatrix+: shape mismatch");
        ZMatrix r = *this;
        for (const auto& [p, m] : o.c_) r.set_coeff(p, r.coeff(p) + m);
        return r;
    }
    ZMatrix operator-(const ZMatrix& o) const { return *this + (o * K(-field<K>::one())); }
    ZMatrix operator*(const K& s) const {
        ZMatrix r(rows_, cols_);
        for (const auto& [p, m] : c_) r.set_coeff(p, m * s);
        return r;
    }
    ZMatrix operator-() const { return *this * K(-field<K>::one()); }

    ZMatrix operator*(const ZMatrix& o) const {
        require(cols_ == o.rows_, "ZMatrix*: shape mismatch");
        ZMatrix r(rows_, o.cols_);
        for (const auto& [p, m] : c_)
            for (const auto& [q, w] : o.c_) r.set_coeff(p + q, r.coeff(p + q) + m * w);
        return r;
    }

    bool operator==(const ZMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) return false;
        ZMatrix d = *this - o;
        return d.c_.empty();
    }

    bool is_zero(double tol = 0.0) const {
        for (const auto& [p, m] : c_)
            if (!m.is_zero(tol)) return false;
        return true;
    }

    Matrix<K> eval(const K& z) const {
        Matrix<K> acc(rows_, cols_);
        for (const auto& [p, m] : c_) {
            require(p >= 0, "ZMatrix::eval: negative power; shift first");
            K zn = field<K>::one();
            for (int k = 0; k < p; ++k) zn = zn * z;
            acc = acc + m * zn;
        }
        return acc;
    }

    ZMatrix shifted(int dp) const {
        ZMatrix r(rows_, cols_);
        for (const auto& [p, m] : c_) r.set_coeff(p + dp, m);
        return r;
    }

    ZMatrix transpose() const {
        ZMatrix r(cols_, rows_);
        for (const auto& [p, m] : c_) r.set_coeff(p, m.transpose());
        return r;
    }

    ZMatrix drop_row_col(int i0, int j0) const {
        ZMatrix r(rows_ - 1, cols_ - 1);
        for (const auto& [p, m] : c_) r.set_coeff(p, m.drop_row_col(i0, j0));
        return r;
    }

    double max_mag() const {
        double b = 0.0;
        for (const auto& [p, m] : c_) b = std::max(b, m.max_mag());
        return b;
    }

    void prune() {
        for (auto it = c_.begin(); it != c_.end();)
            if (it->second.is_zero())
                it = c_.erase(it);
            else
                ++it;
    }

   private:
    int rows_, cols_;
    std::map<int, Matrix<K>> c_;
};

template <class K>
inline ZMatrix<K> zmat_mul(const ZMatrix<K>& a, const ZMatrix<K>& b) {
    return a * b;
}

template <class K>
inline ZMatrix<K> zmat_commutator(const ZMatrix<K>& a, const ZMatrix<K>& b) {
    return a * b - b * a;
}

// Determinant of a Laurent-polynomial matrix by multipoint evaluation and
// Lagrange interpolation. det(z^m B(z)) = z^{mn} det B for the polynomial
// part B, whose determinant has degree at most n * deg B.
template <class K>
inline ZPoly<K> zmat_det(const ZMatrix<K>& a) {
    require(a.square(), "zmat_det: not square");
    int n = a.rows();
    if (n == 0) return ZPoly<K>(field<K>::one());
    if (a.coeffs().empty()) return ZPoly<K>();
    int m = a.lo();
    ZMatrix<K> b = a.shifted(-m);
    int deg = b.hi() * n;
    int npts = deg + 1;
    std::vector<K> xs(npts), ys(npts);
    for (int k = 0; k < npts; ++k) {
        long x = (k % 2 == 0) ? (k / 2 + 1) : -(k / 2 + 1);
        xs[k] = field<K>::of(x);
        ys[k] = det(b.eval(xs[k]));
    }
    // Newton's divided differences, then expansion to the monomial basis.
    std::vector<K> dd = ys;
    for (int lvl = 1; lvl < npts; ++lvl)
        for (int k = npts - 1; k >= lvl; --k) {
            K num = dd[k] - dd[k - 1];
            K den = xs[k] - xs[k - lvl];
            dd[k] = num / den;
        }
    std::vector<K> poly(npts, field<K>::zero());
    std::vector<K> basis(npts, field<K>::zero());
    basis[0] = field<K>::one();
    int blen = 1;
    for (int k = 0; k < npts; ++k) {
        for (int j = 0; j < blen; ++j) poly[j] += dd[k] * basis[j];
        if (k + 1 < npts) {
            for (int j = blen; j >= 1; --j) {
                K shifted = basis[j - 1];
                K scaled = basis[j] * xs[k];
                basis[j] = shifted - scaled;
            }
            K head = basis[0] * xs[k];
            basis[0] = -head;
            ++blen;
        }
    }
    ZPoly<K> out;
    for (int j = 0; j < npts; ++j) {
        K c = poly[j];
        if constexpr (!field<K>::exact) {
            if (field<K>::is_zero(c, 1e-9 * (1.0 + a.max_mag()))) c = field<K>::zero();
        }
        out.set(j + m * n, c);
    }
    return out;
}

// Adjugate as the cofactor transpose, a * adj(a) = det(a) * I; each entry is
// one interpolated minor determinant.
template <class K>
inline ZMatrix<K> zmat_adjugate(const ZMatrix<K>& a) {
    require(a.square(), "zmat_adjugate: not square");
    int n = a.rows();
    ZMatrix<K> r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ZPoly<K> c = zmat_det(a.drop_row_col(j, i));
            r.set_entry(i, j, (i + j) % 2 == 0 ? c : ZPoly<K>(-c));
        }
    return r;
}

}  // namespace sasano
