#pragma once

#include <algorithm>
#include <initializer_list>
#include <utility>
#include <vector>

#include "field.hpp"

namespace sasano {

template <class K>
class Matrix {
   public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols, field<K>::zero()) {}
    Matrix(int rows, int cols, std::initializer_list<K> xs) : Matrix(rows, cols) {
        require(xs.size() == a_.size(), "Matrix: initializer size mismatch");
        std::copy(xs.begin(), xs.end(), a_.begin());
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = field<K>::one();
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    K& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
    const K& operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

    Matrix operator+(const Matrix& o) const {
        require(rows_ == o.rows_ && cols_ == o.cols_, "Matrix+: shape mismatch");
        Matrix r(rows_, cols_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
        return r;
    }
    Matrix operator-(const Matrix& o) const {
        require(rows_ == o.rows_ && cols_ == o.cols_, "Matrix-: shape mismatch");
        Matrix r(rows_, cols_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
        return r;
    }
    Matrix operator-() const {
        Matrix r(rows_, cols_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = -a_[k];
        return r;
    }
    Matrix operator*(const Matrix& o) const {
        require(cols_ == o.rows_, "Matrix*: shape mismatch");
        Matrix r(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const K& aik = (*this)(i, k);
                if (field<K>::exact && field<K>::is_zero(aik)) continue;
                for (int j = 0; j < o.cols_; ++j) r(i, j) += aik * o(k, j);
            }
        return r;
    }
    Matrix operator*(const K& c) const {
        Matrix r(rows_, cols_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] * c;
        return r;
    }
    friend Matrix operator*(const K& c, const Matrix& m) { return m * c; }

    bool operator==(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) return false;
        for (size_t k = 0; k < a_.size(); ++k)
            if (!(a_[k] == o.a_[k])) return false;
        return true;
    }

    Matrix transpose() const {
        Matrix r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    K trace() const {
        require(square(), "trace: not square");
        K t = field<K>::zero();
        for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    // Rows and columns are given as 0-based index lists.
    Matrix submatrix(const std::vector<int>& rows, const std::vector<int>& cols) const {
        Matrix r(int(rows.size()), int(cols.size()));
        for (size_t i = 0; i < rows.size(); ++i)
            for (size_t j = 0; j < cols.size(); ++j) r(int(i), int(j)) = (*this)(rows[i], cols[j]);
        return r;
    }

    Matrix block(int i0, int j0, int h, int w) const {
        Matrix r(h, w);
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) r(i, j) = (*this)(i0 + i, j0 + j);
        return r;
    }

    void set_block(int i0, int j0, const Matrix& m) {
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) (*this)(i0 + i, j0 + j) = m(i, j);
    }

    Matrix drop_row_col(int i0, int j0) const {
        std::vector<int> rs, cs;
        for (int i = 0; i < rows_; ++i)
            if (i != i0) rs.push_back(i);
        for (int j = 0; j < cols_; ++j)
            if (j != j0) cs.push_back(j);
        return submatrix(rs, cs);
    }

    double max_mag() const {
        double m = 0.0;
        for (const K& x : a_) m = std::max(m, field<K>::mag(x));
        return m;
    }

    bool is_zero(double tol = 0.0) const {
        for (const K& x : a_)
            if (!field<K>::is_zero(x, tol)) return false;
        return true;
    }

   private:
    int rows_, cols_;
    std::vector<K> a_;
};

template <class K>
inline Matrix<K> commutator(const Matrix<K>& a, const Matrix<K>& b) {
    return a * b - b * a;
}

// Fraction-free (Bareiss) elimination: every division is exact in the ring
// generated by the entries, so rational inputs give the determinant with no
// intermediate rounding and no denominator blowup beyond the minors'.
template <class K>
inline K det_bareiss(Matrix<K> m) {
    int n = m.rows();
    if (n == 0) return field<K>::one();
    K sign = field<K>::one();
    K prev = field<K>::one();
    for (int k = 0; k < n - 1; ++k) {
        if (field<K>::is_zero(m(k, k))) {
            int piv = -1;
            for (int i = k + 1; i < n; ++i)
                if (!field<K>::is_zero(m(i, k))) {
                    piv = i;
                    break;
                }
            if (piv < 0) return field<K>::zero();
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) {
                K num = m(i, j) * m(k, k) - m(i, k) * m(k, j);
                m(i, j) = num / prev;
            }
        prev = m(k, k);
    }
    K d = sign * m(n - 1, n - 1);
    return d;
}

template <class K>
inline K det_lu(Matrix<K> m) {
    int n = m.rows();
    if (n == 0) return field<K>::one();
    K d = field<K>::one();
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = field<K>::mag(m(k, k));
        for (int i = k + 1; i < n; ++i) {
            double c = field<K>::mag(m(i, k));
            if (c > best) {
                best = c;
                piv = i;
            }
        }
        if (best == 0.0) return field<K>::zero();
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            d = -d;
        }
        d = d * m(k, k);
        for (int i = k + 1; i < n; ++i) {
            K f = m(i, k) / m(k, k);
            for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
        }
    }
    return d;
}

template <class K>
inline K det(const Matrix<K>& m) {
    require(m.square(), "det: not square");
    if constexpr (field<K>::exact)
        return det_bareiss(m);
    else
        return det_lu(m);
}

// Minor determinant for 1-based, strictly increasing row/column index lists.
// Empty lists give the empty minor, which is 1 by convention.
template <class K>
inline K minor(const Matrix<K>& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    require(rows.size() == cols.size(), "minor: row/column counts differ");
    auto check = [](const std::vector<int>& ix, int limit, const char* side) {
        for (size_t k = 0; k < ix.size(); ++k) {
            require(ix[k] >= 1 && ix[k] <= limit, std::string("minor: ") + side + " index out of range");
            require(k == 0 || ix[k - 1] < ix[k], std::string("minor: ") + side + " indices not strictly increasing");
        }
    };
    check(rows, m.rows(), "row");
    check(cols, m.cols(), "column");
    if (rows.empty()) return field<K>::one();
    std::vector<int> r0(rows), c0(cols);
    for (int& i : r0) --i;
    for (int& j : c0) --j;
    return det(m.submatrix(r0, c0));
}

// For 1 <= j < i <= n and an n x n matrix C,
//   sum_{k=j}^{i} (-1)^{k-j} det C[{i..n}, {k} u {i+1..n}]
//                          * det C[{j+1..n}, {j..n} \ {k}]
// vanishes identically: both factors are maximal minors of the columns
// j..n of C restricted to rows i..n resp. j+1..n, and the sum is a Laplace
// expansion of a determinant with a repeated row block. This is the identity
// behind the triangular inversion of the coordinate matrix built from minors.
template <class K>
inline K minor_alternating_sum(const Matrix<K>& c, int i, int j) {
    const int n = c.rows();
    require(c.square(), "minor_alternating_sum: not square");
    require(1 <= j && j < i && i <= n, "minor_alternating_sum: need 1 <= j < i <= n");
    K acc = field<K>::zero();
    for (int k = j; k <= i; ++k) {
        std::vector<int> r1, c1, r2, c2;
        for (int l = i; l <= n; ++l) r1.push_back(l);
        c1.push_back(k);
        for (int l = i + 1; l <= n; ++l) c1.push_back(l);
        for (int l = j + 1; l <= n; ++l) r2.push_back(l);
        for (int l = j; l <= n; ++l)
            if (l != k) c2.push_back(l);
        K term = minor(c, r1, c1) * minor(c, r2, c2);
        acc = (k - j) % 2 == 0 ? K(acc + term) : K(acc - term);
    }
    return acc;
}

// Gauss-Jordan with pivoting: full magnitude pivoting for floating fields,
// first-nonzero pivoting for exact ones.
template <class K>
inline bool try_invert(Matrix<K> m, Matrix<K>& out) {
    int n = m.rows();
    Matrix<K> inv = Matrix<K>::identity(n);
    for (int k = 0; k < n; ++k) {
        int piv = -1;
        if constexpr (field<K>::exact) {
            for (int i = k; i < n; ++i)
                if (!field<K>::is_zero(m(i, k))) {
                    piv = i;
                    break;
                }
        } else {
            double best = 0.0;
            for (int i = k; i < n; ++i) {
                double c = field<K>::mag(m(i, k));
                if (c > best) {
                    best = c;
                    piv = i;
                }
            }
        }
        if (piv < 0 || (!field<K>::exact && field<K>::mag(m(piv, k)) == 0.0)) return false;
        if (piv != k)
            for (int j = 0; j < n; ++j) {
                std::swap(m(k, j), m(piv, j));
                std::swap(inv(k, j), inv(piv, j));
            }
        K d = m(k, k);
        for (int j = 0; j < n; ++j) {
            m(k, j) /= d;
            inv(k, j) /= d;
        }
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            K f = m(i, k);
            if (field<K>::is_zero(f)) continue;
            for (int j = 0; j < n; ++j) {
                m(i, j) -= f * m(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    out = inv;
    return true;
}

template <class K>
inline Matrix<K> inverse(const Matrix<K>& m) {
    require(m.square(), "inverse: not square");
    Matrix<K> out;
    require(try_invert(m, out), "inverse: singular matrix");
    return out;
}

template <class K>
inline Matrix<K> solve(const Matrix<K>& a, const Matrix<K>& rhs) {
    return inverse(a) * rhs;
}

// Reduced row echelon form; returns pivot columns. tol only matters for
// floating fields.
template <class K>
inline std::vector<int> rref(Matrix<K>& m, double tol = 1e-11) {
    std::vector<int> pivots;
    int r = 0;
    for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
        int piv = -1;
        double best = tol;
        for (int i = r; i < m.rows(); ++i) {
            if constexpr (field<K>::exact) {
                if (!field<K>::is_zero(m(i, c))) {
                    piv = i;
                    break;
                }
            } else {
                double q = field<K>::mag(m(i, c));
                if (q > best) {
                    best = q;
                    piv = i;
                }
            }
        }
        if (piv < 0) continue;
        if (piv != r)
            for (int j = 0; j < m.cols(); ++j) std::swap(m(r, j), m(piv, j));
        K d = m(r, c);
        for (int j = 0; j < m.cols(); ++j) m(r, j) /= d;
        for (int i = 0; i < m.rows(); ++i) {
            if (i == r) continue;
            K f = m(i, c);
            if (field<K>::is_zero(f)) continue;
            for (int j = 0; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

template <class K>
inline int rank(Matrix<K> m, double tol = 1e-11) {
    return int(rref(m, tol).size());
}

// Columns spanning the right nullspace.
template <class K>
inline Matrix<K> nullspace(Matrix<K> m, double tol = 1e-11) {
    int n = m.cols();
    std::vector<int> pivots = rref(m, tol);
    std::vector<bool> is_pivot(n, false);
    for (int c : pivots) is_pivot[c] = true;
    std::vector<int> free_cols;
    for (int c = 0; c < n; ++c)
        if (!is_pivot[c]) free_cols.push_back(c);
    Matrix<K> basis(n, int(free_cols.size()));
    for (size_t k = 0; k < free_cols.size(); ++k) {
        basis(free_cols[k], int(k)) = field<K>::one();
        for (size_t r = 0; r < pivots.size(); ++r) {
            K v = m(int(r), free_cols[k]);
            basis(pivots[r], int(k)) = -v;
        }
    }
    return basis;
}

}  // namespace sasano
