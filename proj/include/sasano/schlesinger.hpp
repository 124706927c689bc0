#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sasano/matrix.hpp"
#include "sasano/rk45.hpp"
#include "sasano/rng.hpp"
#include "sasano/spectral.hpp"

namespace sasano {

// Eigenvalue bookkeeping for a rank-structured residue tuple of size 2n:
// A_t and A_1 carry {theta (x n), 0 (x n)}, A_0 carries {theta_0, 0 (x 2n-1)},
// and A_inf = -(A_t + A_1 + A_0) carries kappa_1..kappa_{2n}.
template <class K>
struct SpectralData {
    int n = 0;
    K theta_t{};
    K theta_1{};
    K theta_0{};
    std::vector<K> kappa;
};

template <class K>
K fuchs_defect(const SpectralData<K>& sd) {
    K acc = field<K>::of(sd.n) * (sd.theta_t + sd.theta_1) + sd.theta_0;
    for (const K& k : sd.kappa) acc = acc + k;
    return acc;
}

template <class K>
bool check_fuchs_relation(const SpectralData<K>& sd, double tol = 1e-9) {
    return int(sd.kappa.size()) == 2 * sd.n && field<K>::is_zero(fuchs_defect(sd), tol);
}

template <class K>
bool kappa_distinct(const std::vector<K>& kappa, double tol = 1e-9) {
    for (size_t i = 0; i < kappa.size(); ++i)
        for (size_t j = i + 1; j < kappa.size(); ++j)
            if (field<K>::is_zero(K(kappa[i] - kappa[j]), tol)) return false;
    return true;
}

template <class K>
struct FuchsianSystem {
    Matrix<K> a_t, a_1, a_0;
    K time{};
    SpectralData<K> spec;
};

template <class K>
Matrix<K> residue_at_infinity(const FuchsianSystem<K>& f) {
    return -(f.a_t + f.a_1 + f.a_0);
}

namespace detail {

template <class K>
double inf_norm(const Matrix<K>& m) {
    double best = 0;
    for (int i = 0; i < m.rows(); ++i) {
        double row = 0;
        for (int j = 0; j < m.cols(); ++j) row += field<K>::mag(m(i, j));
        best = std::max(best, row);
    }
    return best;
}

template <class K>
void check_deformation_time(const K& t) {
    require(!field<K>::is_zero(t, 1e-12) && !field<K>::is_zero(K(t - field<K>::one()), 1e-12),
            "deformation time must avoid 0 and 1");
}

}  // namespace detail

// Random residue tuple with the prescribed theta's. The kappa list of the
// returned system is overwritten with the eigenvalues of A_inf, so the trace
// relation n*theta_t + n*theta_1 + theta_0 + sum(kappa) = 0 holds by
// construction. Eigenvalues of a random matrix have no exact representation,
// so this generator is floating-point only.
template <class K = Cplx>
FuchsianSystem<K> random_instance(const SpectralData<K>& sd, Rng& rng) {
    static_assert(!field<K>::exact,
                  "random_instance: eigenvalues of a sampled residue sum are irrational; "
                  "build exact systems from constrained B/C data instead");
    require(sd.n >= 1, "random_instance: need n >= 1");
    const int m = 2 * sd.n;

    auto rank_n_piece = [&](const K& theta) {
        for (int tries = 0; tries < 256; ++tries) {
            Matrix<K> u(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) u(i, j) = K(rng.real_in(-1, 1));
            Matrix<K> uinv;
            if (!try_invert(u, uinv)) continue;
            if (detail::inf_norm(u) * detail::inf_norm(uinv) > 1e4) continue;
            Matrix<K> d(m, m);
            for (int i = 0; i < sd.n; ++i) d(i, i) = theta;
            return u * d * uinv;
        }
        require(false, "random_instance: no well-conditioned similarity found");
        return Matrix<K>();
    };

    for (int attempt = 0; attempt < 64; ++attempt) {
        FuchsianSystem<K> f;
        f.a_t = rank_n_piece(sd.theta_t);
        f.a_1 = rank_n_piece(sd.theta_1);

        const size_t um = size_t(m);
        std::vector<K> u(um), v(um);
        K dot = field<K>::zero();
        for (int i = 0; i < m; ++i) {
            u[size_t(i)] = K(rng.real_in(-1, 1));
            v[size_t(i)] = K(rng.real_in(-1, 1));
            dot = dot + u[size_t(i)] * v[size_t(i)];
        }
        if (field<K>::is_zero(dot, 1e-3)) continue;
        K scale = sd.theta_0 / dot;
        f.a_0 = Matrix<K>(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) f.a_0(i, j) = scale * u[size_t(i)] * v[size_t(j)];

        std::vector<K> ev = eigenvalues(residue_at_infinity(f));
        double gap_tol = 1e-8;
        for (const K& e : ev) gap_tol = std::max(gap_tol, 1e-8 * field<K>::mag(e));
        if (!kappa_distinct(ev, gap_tol)) continue;

        f.time = K(rng.real_in(0.3, 0.7));
        f.spec = sd;
        f.spec.kappa = ev;
        return f;
    }
    require(false, "random_instance: repeated eigenvalue collisions at infinity");
    return FuchsianSystem<K>();
}

template <class K>
struct SchlesingerRhs {
    Matrix<K> d_a_t, d_a_1, d_a_0;
};

template <class K>
SchlesingerRhs<K> schlesinger_rhs(const FuchsianSystem<K>& f) {
    detail::check_deformation_time(f.time);
    const K one = field<K>::one();
    Matrix<K> c0 = commutator(f.a_t, f.a_0) * (one / f.time);
    Matrix<K> c1 = commutator(f.a_t, f.a_1) * (one / (f.time - one));
    return {-c0 - c1, c1, c0};
}

// Isomonodromic flow of (A_t, A_1, A_0) along a real time segment that keeps
// clear of the fixed singularities at 0 and 1.
inline FuchsianSystem<Cplx> integrate_schlesinger(const FuchsianSystem<Cplx>& f, double t_end,
                                                  double tol = 1e-10) {
    const double t0 = f.time.real();
    require(std::abs(f.time.imag()) <= 1e-12 * (1.0 + std::abs(t0)),
            "integrate_schlesinger: start time must be real");
    const double lo = std::min(t0, t_end), hi = std::max(t0, t_end);
    for (double sing : {0.0, 1.0})
        require(sing < lo - 0.05 || sing > hi + 0.05,
                "integrate_schlesinger: path passes within 0.05 of a fixed singularity");
    if (t_end == t0) return f;

    const int m = f.a_t.rows();
    const size_t blk = size_t(m) * size_t(m);
    auto pack = [&](const Matrix<Cplx>& a, OdeState& y, size_t off) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) y[off + size_t(i * m + j)] = a(i, j);
    };
    auto unpack = [&](const OdeState& y, size_t off) {
        Matrix<Cplx> a(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) a(i, j) = y[off + size_t(i * m + j)];
        return a;
    };

    OdeState y(3 * blk);
    pack(f.a_t, y, 0);
    pack(f.a_1, y, blk);
    pack(f.a_0, y, 2 * blk);

    OdeRhs rhs = [&, m, blk](double t, const OdeState& state, OdeState& dy) {
        FuchsianSystem<Cplx> cur;
        cur.a_t = unpack(state, 0);
        cur.a_1 = unpack(state, blk);
        cur.a_0 = unpack(state, 2 * blk);
        cur.time = Cplx(t, 0.0);
        SchlesingerRhs<Cplx> d = schlesinger_rhs(cur);
        dy.resize(state.size());
        pack(d.d_a_t, dy, 0);
        pack(d.d_a_1, dy, blk);
        pack(d.d_a_0, dy, 2 * blk);
    };

    std::vector<double> samples;
    for (int k = 1; k <= 16; ++k) samples.push_back(t0 + (t_end - t0) * k / 16.0);
    FuchsianSystem<Cplx> out = f;
    double last_good = t0;
    OdeOptions opts;
    opts.rtol = tol;
    opts.atol = tol * 1e-2;
    try {
        Dopri5(rhs, opts).integrate(t0, y, samples, [&](double t, const OdeState& state) {
            last_good = t;
            out.a_t = unpack(state, 0);
            out.a_1 = unpack(state, blk);
            out.a_0 = unpack(state, 2 * blk);
            out.time = Cplx(t, 0.0);
        });
    } catch (const math_error& e) {
        require(false, std::string(e.what()) + " (last good state at t = " +
                           std::to_string(last_good) + ")");
    }
    return out;
}

template <class K>
K hamiltonian_K(const FuchsianSystem<K>& f) {
    detail::check_deformation_time(f.time);
    const K one = field<K>::one();
    return (f.a_t * f.a_1).trace() / (f.time - one) + (f.a_t * f.a_0).trace() / f.time;
}

// Gauge-normalized shapes: A~_0 supported on its first row with (1,1) entry
// theta_0, A~_inf diagonal kappa plus extra entries in its first column.
template <class K>
struct NormalizedSystem {
    Matrix<K> a_t, a_1, a_0, a_inf;
    Matrix<K> gauge;
    std::vector<K> kappa;
};

namespace detail {

// Deterministic eigenvector scaling: unit entry at the position of largest
// magnitude (lowest index on ties).
template <class K>
void scale_column(Matrix<K>& m, int j) {
    int best = 0;
    double best_mag = -1;
    for (int i = 0; i < m.rows(); ++i) {
        double mag = field<K>::mag(m(i, j));
        if (mag > best_mag + 1e-15 * best_mag) {
            best_mag = mag;
            best = i;
        }
    }
    require(best_mag > 0, "gauge: zero eigenvector column");
    K d = m(best, j);
    for (int i = 0; i < m.rows(); ++i) m(i, j) = m(i, j) / d;
}

template <class K>
std::pair<std::vector<K>, Matrix<K>> eigen_pairs(const Matrix<K>& a_inf,
                                                 const std::vector<K>& kappa_hint) {
    const int m = a_inf.rows();
    if constexpr (field<K>::exact) {
        require(int(kappa_hint.size()) == m,
                "gauge: exact mode needs the kappa list supplied with the system");
        require(kappa_distinct(kappa_hint), "gauge: repeated kappa");
        std::vector<K> kappa = kappa_hint;
        std::sort(kappa.begin(), kappa.end());
        Matrix<K> g1(m, m);
        for (int j = 0; j < m; ++j) {
            std::vector<K> v = exact_eigenvector(a_inf, kappa[size_t(j)]);
            for (int i = 0; i < m; ++i) g1(i, j) = v[size_t(i)];
            scale_column(g1, j);
        }
        return {kappa, g1};
    } else {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(to_eigen(a_inf), true);
        require(es.info() == Eigen::Success, "gauge: eigensolver failed");
        std::vector<int> order(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) order[size_t(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            Cplx ea = es.eigenvalues()(a), eb = es.eigenvalues()(b);
            if (ea.real() != eb.real()) return ea.real() < eb.real();
            return ea.imag() < eb.imag();
        });
        std::vector<K> kappa;
        Matrix<K> g1(m, m);
        for (int j = 0; j < m; ++j) {
            kappa.push_back(es.eigenvalues()(order[size_t(j)]));
            for (int i = 0; i < m; ++i) g1(i, j) = es.eigenvectors()(i, order[size_t(j)]);
            scale_column(g1, j);
        }
        require(kappa_distinct(kappa, 1e-9 * (1.0 + a_inf.max_mag())),
                "gauge: eigenvalues at infinity are not distinct");
        return {kappa, g1};
    }
}

// Reorder the freshly computed eigenbasis to follow a previous gauge frame,
// greedily matching columns by maximal normalized overlap.
template <class K>
void match_to_previous(std::vector<K>& kappa, Matrix<K>& g1, const Matrix<K>& prev) {
    const int m = g1.rows();
    require(prev.rows() == m && prev.cols() == m, "gauge: bad previous frame");
    std::vector<int> pick(size_t(m), -1);
    std::vector<bool> used(size_t(m), false);
    for (int a = 0; a < m; ++a) {
        double best = -1;
        for (int b = 0; b < m; ++b) {
            if (used[size_t(b)]) continue;
            double num = 0, da = 0, db = 0;
            for (int i = 0; i < m; ++i) {
                num += field<K>::mag(K(prev(i, a) * g1(i, b)));
                da += field<K>::mag(prev(i, a)) * field<K>::mag(prev(i, a));
                db += field<K>::mag(g1(i, b)) * field<K>::mag(g1(i, b));
            }
            double score = num / std::sqrt(da * db);
            if (score > best) {
                best = score;
                pick[size_t(a)] = b;
            }
        }
        used[size_t(pick[size_t(a)])] = true;
    }
    Matrix<K> g2(m, m);
    std::vector<K> k2(static_cast<size_t>(m));
    for (int a = 0; a < m; ++a) {
        k2[size_t(a)] = kappa[size_t(pick[size_t(a)])];
        for (int i = 0; i < m; ++i) g2(i, a) = g1(i, pick[size_t(a)]);
    }
    kappa = std::move(k2);
    g1 = std::move(g2);
}

}  // namespace detail

template <class K>
NormalizedSystem<K> normalize_gauge(const FuchsianSystem<K>& f,
                                    const Matrix<K>* previous_frame = nullptr) {
    const int m = f.a_t.rows();
    Matrix<K> a_inf = residue_at_infinity(f);
    auto [kappa, g1] = detail::eigen_pairs(a_inf, f.spec.kappa);
    if (previous_frame != nullptr) detail::match_to_previous(kappa, g1, *previous_frame);

    // image direction of the rank-one residue at 0
    int ucol = 0;
    double best = -1;
    for (int j = 0; j < m; ++j) {
        double s = 0;
        for (int i = 0; i < m; ++i) s += field<K>::mag(f.a_0(i, j));
        if (s > best) {
            best = s;
            ucol = j;
        }
    }
    Matrix<K> u(m, 1);
    for (int i = 0; i < m; ++i) u(i, 0) = f.a_0(i, ucol);

    Matrix<K> g1_inv = inverse(g1);
    Matrix<K> w = g1_inv * u;
    const double wtol = field<K>::exact ? 0.0 : 1e-10 * (1.0 + w.max_mag());
    if (field<K>::is_zero(w(0, 0), wtol)) {
        require(previous_frame == nullptr,
                "gauge: first coordinate vanished while following a previous frame");
        int lead = -1;
        for (int i = 0; i < m; ++i)
            if (!field<K>::is_zero(w(i, 0), wtol)) {
                lead = i;
                break;
            }
        require(lead >= 0, "gauge: residue at 0 is zero");
        std::rotate(kappa.begin(), kappa.begin() + lead, kappa.begin() + lead + 1);
        std::vector<int> cols;
        cols.push_back(lead);
        for (int j = 0; j < m; ++j)
            if (j != lead) cols.push_back(j);
        Matrix<K> g1p(m, m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) g1p(i, j) = g1(i, cols[size_t(j)]);
        g1 = g1p;
        g1_inv = inverse(g1);
        w = g1_inv * u;
    }

    Matrix<K> g2 = Matrix<K>::identity(m);
    for (int i = 1; i < m; ++i) g2(i, 0) = w(i, 0) / w(0, 0);

    NormalizedSystem<K> out;
    out.gauge = g1 * g2;
    Matrix<K> ginv = inverse(out.gauge);
    out.a_t = ginv * f.a_t * out.gauge;
    out.a_1 = ginv * f.a_1 * out.gauge;
    out.a_0 = ginv * f.a_0 * out.gauge;
    out.a_inf = -(out.a_t + out.a_1 + out.a_0);
    out.kappa = kappa;
    return out;
}

template <class K>
struct BCData {
    Matrix<K> b_t, c_t, b_1, c_1;
};

// [I; B] [theta I - C B, C]: the rank-n residue determined by an (B, C) pair.
template <class K>
Matrix<K> bc_recompose(const Matrix<K>& b, const Matrix<K>& c, const K& theta) {
    require(b.square() && c.square() && b.rows() == c.rows(), "bc_recompose: shape mismatch");
    const int n = b.rows();
    Matrix<K> tl = Matrix<K>::identity(n) * theta - c * b;
    Matrix<K> out(2 * n, 2 * n);
    out.set_block(0, 0, tl);
    out.set_block(0, n, c);
    out.set_block(n, 0, b * tl);
    out.set_block(n, n, b * c);
    return out;
}

// Inverse of bc_recompose on its image: C is read off the top-right block and
// B solves bottom rows = B * (top rows) across all 2n columns.
template <class K>
std::pair<Matrix<K>, Matrix<K>> bc_decompose(const Matrix<K>& a, const K& theta) {
    require(a.square() && a.rows() % 2 == 0, "bc_decompose: need even size");
    const int n = a.rows() / 2;
    Matrix<K> top = a.block(0, 0, n, 2 * n);
    Matrix<K> bottom = a.block(n, 0, n, 2 * n);
    Matrix<K> c = a.block(0, n, n, n);

    Matrix<K> b(n, n);
    if constexpr (field<K>::exact) {
        Matrix<K> aug(2 * n, 2 * n);
        aug.set_block(0, 0, top.transpose());
        aug.set_block(0, n, bottom.transpose());
        std::vector<int> pivots = rref(aug);
        require(int(pivots.size()) >= n && pivots[size_t(n) - 1] < n,
                "bc_decompose: top rows do not span the row space");
        for (int r = 0; r < 2 * n; ++r) {
            bool lead_in_b = r < n && pivots.size() > size_t(r) && pivots[size_t(r)] < n;
            if (lead_in_b) {
                for (int j = 0; j < n; ++j) b(j, pivots[size_t(r)]) = aug(r, n + j);
            } else {
                for (int j = 0; j < n; ++j)
                    require(field<K>::is_zero(aug(r, n + j)),
                            "bc_decompose: top rows do not span the row space");
            }
        }
    } else {
        Eigen::MatrixXcd tt = to_eigen(top).transpose();
        Eigen::MatrixXcd lt = to_eigen(bottom).transpose();
        Eigen::MatrixXcd sol = tt.colPivHouseholderQr().solve(lt);
        double resid = (tt * sol - lt).cwiseAbs().maxCoeff();
        require(resid <= 1e-10 * (1.0 + a.max_mag()),
                "bc_decompose: top rows do not span the row space");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b(i, j) = sol(j, i);
    }

    Matrix<K> tl = a.block(0, 0, n, n);
    Matrix<K> expect = Matrix<K>::identity(n) * theta - c * b;
    const double tol = field<K>::exact ? 0.0 : 1e-10 * (1.0 + a.max_mag());
    require((tl - expect).is_zero(tol), "bc_decompose: top-left block is not theta I - C B");
    return {b, c};
}

// A functional of (B_t, C_t, B_1, C_1) with partial derivatives arranged in
// the same four-matrix shape.
template <class K>
struct BCFunctional {
    std::function<K(const BCData<K>&)> value;
    std::function<BCData<K>(const BCData<K>&)> grad;
};

template <class K>
BCData<K> bc_gradient_fd(const std::function<K(const BCData<K>&)>& value, const BCData<K>& at,
                         double step = 1e-6) {
    static_assert(!field<K>::exact, "bc_gradient_fd: exact functionals must supply derivatives");
    const int n = at.b_t.rows();
    BCData<K> g{Matrix<K>(n, n), Matrix<K>(n, n), Matrix<K>(n, n), Matrix<K>(n, n)};
    auto slot = [&](Matrix<K> BCData<K>::* part) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                BCData<K> up = at, dn = at;
                (up.*part)(i, j) += K(step);
                (dn.*part)(i, j) -= K(step);
                (g.*part)(i, j) = (value(up) - value(dn)) / K(2 * step);
            }
    };
    slot(&BCData<K>::b_t);
    slot(&BCData<K>::c_t);
    slot(&BCData<K>::b_1);
    slot(&BCData<K>::c_1);
    return g;
}

// Canonical bracket with {b_(i,j), c_(j,i)} = -1 within each of the t and 1
// families and zero across them.
template <class K>
K poisson_bracket_bc(const BCFunctional<K>& f, const BCFunctional<K>& g, const BCData<K>& at) {
    auto grad_of = [&](const BCFunctional<K>& fn) {
        if (fn.grad) return fn.grad(at);
        if constexpr (field<K>::exact) {
            require(false, "poisson_bracket_bc: exact functional without derivatives");
            return BCData<K>();
        } else {
            return bc_gradient_fd<K>(fn.value, at);
        }
    };
    BCData<K> df = grad_of(f);
    BCData<K> dg = grad_of(g);
    const int n = at.b_t.rows();
    K acc = field<K>::zero();
    auto add_family = [&](const Matrix<K>& df_b, const Matrix<K>& df_c, const Matrix<K>& dg_b,
                          const Matrix<K>& dg_c) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                acc = acc + df_c(j, i) * dg_b(i, j) - df_b(i, j) * dg_c(j, i);
    };
    add_family(df.b_t, df.c_t, dg.b_t, dg.c_t);
    add_family(df.b_1, df.c_1, dg.b_1, dg.c_1);
    return acc;
}

}  // namespace sasano
