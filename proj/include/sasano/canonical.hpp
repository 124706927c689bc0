#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sasano/hamiltonian.hpp"
#include "sasano/schlesinger.hpp"

namespace sasano {

template <class K>
struct CanonicalPoint {
    std::vector<K> lambda, mu;
    K time{};
    int n() const { return int(lambda.size()); }
};

template <class K>
struct BetaParams {
    std::vector<K> beta;
};

struct CheckReport {
    bool ok = true;
    double max_residual = 0;
    std::vector<std::string> violations;

    void note(const std::string& what, double residual) {
        max_residual = std::max(max_residual, residual);
        if (residual > 0) {
            ok = false;
            violations.push_back(what);
        }
    }
};

namespace detail {

inline std::vector<int> span_list(int lo, int hi) {
    std::vector<int> out;
    for (int k = lo; k <= hi; ++k) out.push_back(k);
    return out;
}

inline std::vector<int> with_front(int head, std::vector<int> rest) {
    rest.insert(rest.begin(), head);
    return rest;
}

inline std::vector<int> without(std::vector<int> xs, int drop) {
    std::vector<int> out;
    for (int x : xs)
        if (x != drop) out.push_back(x);
    return out;
}

template <class K>
K checked_minor(const Matrix<K>& m, const std::vector<int>& rows, const std::vector<int>& cols,
                const std::string& name, bool deny_zero) {
    K val = minor(m, rows, cols);
    if (deny_zero)
        require(!field<K>::is_zero(val, 1e-13 * (1.0 + m.max_mag())),
                "canonical map: vanishing minor " + name);
    return val;
}

// Partials of minor(c, rows, cols) with respect to every entry of c: the
// signed complementary minors, zero outside the selected rows and columns.
template <class K>
Matrix<K> minor_grad(const Matrix<K>& c, const std::vector<int>& rows,
                     const std::vector<int>& cols) {
    Matrix<K> g(c.rows(), c.cols());
    for (size_t a = 0; a < rows.size(); ++a)
        for (size_t b = 0; b < cols.size(); ++b) {
            K sub = minor(c, without(rows, rows[a]), without(cols, cols[b]));
            g(rows[a] - 1, cols[b] - 1) = ((a + b) % 2 == 0) ? sub : -sub;
        }
    return g;
}

template <class K>
K sign_pow(int k) {
    return (k % 2 == 0) ? field<K>::one() : -field<K>::one();
}

}  // namespace detail

// Minor-determinant canonical coordinates of a B/C configuration. Row and
// column index lists follow the convention that an empty list has minor 1.
template <class K>
CanonicalPoint<K> lambda_mu_from_bc(const BCData<K>& bc, const K& t) {
    const int n = bc.c_t.rows();
    require(!field<K>::is_zero(t, 1e-13), "canonical map: t must be nonzero");
    CanonicalPoint<K> cp;
    cp.time = t;
    for (int i = 1; i <= n; ++i) {
        std::vector<int> tail = detail::span_list(i + 1, n);
        std::vector<int> rows_1tail = detail::with_front(1, tail);
        std::vector<int> rows_itail = detail::with_front(i, tail);
        K d1 = detail::checked_minor(bc.c_t, tail, tail, "C_t[i+1..n, i+1..n]", true);
        K d2 = detail::checked_minor(bc.c_t, rows_itail, rows_itail, "C_t[i..n, i..n]", true);
        K n1 = detail::checked_minor(bc.c_1, rows_1tail, rows_itail, "C_1[{1,i+1..n}, i..n]", true);
        K nt = minor(bc.c_t, rows_1tail, rows_itail);

        K ssum = field<K>::zero();
        for (int k = 1; k <= i; ++k) {
            K n2 = minor(bc.c_t, rows_itail, detail::with_front(k, tail));
            ssum = ssum + (n2 / d2) * bc.b_t(k - 1, 0);
        }
        K sgn = detail::sign_pow<K>(n - i);
        cp.mu.push_back(sgn / t * (n1 / d1) * ssum);
        cp.lambda.push_back(-sgn * t * nt / n1);
    }
    return cp;
}

// Lower-triangular factor P with mu = P b^(t)-column and its closed-form
// inverse; lambda appears as minus (first row of C_t) times P^{-1}.
template <class K>
std::pair<Matrix<K>, Matrix<K>> p_matrix(const BCData<K>& bc, const K& t) {
    const int n = bc.c_t.rows();
    require(!field<K>::is_zero(t, 1e-13), "canonical map: t must be nonzero");
    Matrix<K> p(n, n), p_inv(n, n);
    for (int i = 1; i <= n; ++i) {
        std::vector<int> tail = detail::span_list(i + 1, n);
        std::vector<int> rows_itail = detail::with_front(i, tail);
        std::vector<int> full = detail::span_list(i, n);
        K d1 = detail::checked_minor(bc.c_t, tail, tail, "C_t[i+1..n, i+1..n]", true);
        K d2 = detail::checked_minor(bc.c_t, rows_itail, rows_itail, "C_t[i..n, i..n]", true);
        K n1 = detail::checked_minor(bc.c_1, detail::with_front(1, tail), rows_itail,
                                     "C_1[{1,i+1..n}, i..n]", true);
        K sgn_i = detail::sign_pow<K>(n - i);
        for (int k = 1; k <= i; ++k) {
            K n2 = minor(bc.c_t, rows_itail, detail::with_front(k, tail));
            p(i - 1, k - 1) = sgn_i / t * n1 * n2 / (d1 * d2);
        }
        for (int k = i; k <= n; ++k) {
            K comp = minor(bc.c_t, tail, detail::without(full, k));
            p_inv(k - 1, i - 1) = detail::sign_pow<K>(n - k) * t * comp / n1;
        }
    }
    return {p, p_inv};
}

namespace detail {

// Exact-derivative functionals for the canonical coordinates, built from the
// cofactor rule d det = tr(adj dC).
template <class K>
BCFunctional<K> mu_functional(int i, int n, const K& t) {
    std::vector<int> tail = span_list(i + 1, n);
    std::vector<int> rows_1tail = with_front(1, tail);
    std::vector<int> rows_itail = with_front(i, tail);
    K sgn = sign_pow<K>(n - i);

    BCFunctional<K> f;
    f.value = [=](const BCData<K>& bc) {
        K d1 = minor(bc.c_t, tail, tail);
        K d2 = minor(bc.c_t, rows_itail, rows_itail);
        K n1 = minor(bc.c_1, rows_1tail, rows_itail);
        K ssum = field<K>::zero();
        for (int k = 1; k <= i; ++k)
            ssum = ssum + minor(bc.c_t, rows_itail, with_front(k, tail)) * bc.b_t(k - 1, 0);
        return K(sgn / t * n1 * ssum / (d1 * d2));
    };
    f.grad = [=](const BCData<K>& bc) {
        const K d1 = minor(bc.c_t, tail, tail);
        const K d2 = minor(bc.c_t, rows_itail, rows_itail);
        const K n1 = minor(bc.c_1, rows_1tail, rows_itail);
        K ssum = field<K>::zero();
        for (int k = 1; k <= i; ++k)
            ssum = ssum + minor(bc.c_t, rows_itail, with_front(k, tail)) * bc.b_t(k - 1, 0);

        BCData<K> g{Matrix<K>(n, n), Matrix<K>(n, n), Matrix<K>(n, n), Matrix<K>(n, n)};
        K front = sgn / (t * d1 * d2);
        for (int k = 1; k <= i; ++k)
            g.b_t(k - 1, 0) = front * n1 * minor(bc.c_t, rows_itail, with_front(k, tail));
        g.c_1 = minor_grad(bc.c_1, rows_1tail, rows_itail) * K(front * ssum);

        // quotient rule over the C_t-dependent factors ssum / (d1 d2)
        Matrix<K> dsum(n, n);
        for (int k = 1; k <= i; ++k)
            dsum = dsum + minor_grad(bc.c_t, rows_itail, with_front(k, tail)) * bc.b_t(k - 1, 0);
        Matrix<K> dd = minor_grad(bc.c_t, tail, tail) * d2 + minor_grad(bc.c_t, rows_itail, rows_itail) * d1;
        g.c_t = (dsum * (d1 * d2) - dd * ssum) * K(sgn * n1 / (t * d1 * d2 * d1 * d2));
        return g;
    };
    return f;
}

template <class K>
BCFunctional<K> lambda_functional(int i, int n, const K& t) {
    std::vector<int> tail = span_list(i + 1, n);
    std::vector<int> rows_1tail = with_front(1, tail);
    std::vector<int> rows_itail = with_front(i, tail);
    K sgn = sign_pow<K>(n - i);

    BCFunctional<K> f;
    f.value = [=](const BCData<K>& bc) {
        K nt = minor(bc.c_t, rows_1tail, rows_itail);
        K n1 = minor(bc.c_1, rows_1tail, rows_itail);
        return K(-sgn * t * nt / n1);
    };
    f.grad = [=](const BCData<K>& bc) {
        K nt = minor(bc.c_t, rows_1tail, rows_itail);
        K n1 = minor(bc.c_1, rows_1tail, rows_itail);
        BCData<K> g{Matrix<K>(n, n), Matrix<K>(n, n), Matrix<K>(n, n), Matrix<K>(n, n)};
        g.c_t = minor_grad(bc.c_t, rows_1tail, rows_itail) * K(-sgn * t / n1);
        g.c_1 = minor_grad(bc.c_1, rows_1tail, rows_itail) * K(sgn * t * nt / (n1 * n1));
        return g;
    };
    return f;
}

}  // namespace detail

// Mechanical verification that the minor-determinant coordinates satisfy
// {mu_i, lambda_j} = delta_ij and {mu_i, mu_j} = {lambda_i, lambda_j} = 0.
template <class K>
CheckReport verify_canonical_brackets(const BCData<K>& bc, const K& t, double tol = 1e-9) {
    const int n = bc.c_t.rows();
    const double bar = field<K>::exact ? 0.0 : tol;
    CheckReport report;
    std::vector<BCFunctional<K>> mu, lam;
    for (int i = 1; i <= n; ++i) {
        mu.push_back(detail::mu_functional<K>(i, n, t));
        lam.push_back(detail::lambda_functional<K>(i, n, t));
    }
    auto check = [&](const std::string& what, const K& got, const K& want) {
        double r = field<K>::mag(K(got - want));
        report.note(what, r > bar ? r : 0.0);
        report.max_residual = std::max(report.max_residual, r);
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            K want = i == j ? field<K>::one() : field<K>::zero();
            check("{mu_" + std::to_string(i + 1) + ", lambda_" + std::to_string(j + 1) + "}",
                  poisson_bracket_bc(mu[size_t(i)], lam[size_t(j)], bc), want);
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            check("{mu_" + std::to_string(i + 1) + ", mu_" + std::to_string(j + 1) + "}",
                  poisson_bracket_bc(mu[size_t(i)], mu[size_t(j)], bc), field<K>::zero());
            check("{lambda_" + std::to_string(i + 1) + ", lambda_" + std::to_string(j + 1) + "}",
                  poisson_bracket_bc(lam[size_t(i)], lam[size_t(j)], bc), field<K>::zero());
        }
    return report;
}

// theta/kappa -> alpha dictionary; alpha_0 is fixed by the weight-sum
// normalization, which the source display leaves implicit.
template <class K>
AlphaParams<K> alpha_from_spectral(const SpectralData<K>& sd) {
    const int n = sd.n;
    require(n >= 1 && int(sd.kappa.size()) == 2 * n, "alpha_from_spectral: bad spectral data");
    auto kap = [&](int i) { return sd.kappa[size_t(i - 1)]; };
    std::vector<K> a(size_t(2 * n + 3), field<K>::zero());
    a[1] = -sd.theta_t;
    a[2] = -kap(n + 1);
    for (int i = 2; i <= n; ++i) {
        a[size_t(2 * i - 1)] = sd.theta_t + sd.theta_1 + kap(i) + kap(n + i - 1);
        a[size_t(2 * i)] = -sd.theta_t - sd.theta_1 - kap(i) - kap(n + i);
    }
    a[size_t(2 * n + 1)] = sd.theta_t + sd.theta_1 + kap(1) + kap(2 * n);
    a[size_t(2 * n + 2)] = -kap(1) + kap(2 * n) + field<K>::one();
    K rest = a[1];
    for (int j = 2; j <= 2 * n; ++j) rest = rest + field<K>::of(2) * a[size_t(j)];
    rest = rest + a[size_t(2 * n + 1)] + a[size_t(2 * n + 2)];
    a[0] = field<K>::one() - rest;
    return AlphaParams<K>::unchecked(n, a);
}

template <class K>
BetaParams<K> beta_from_spectral(const SpectralData<K>& sd) {
    const int n = sd.n;
    require(n >= 1 && int(sd.kappa.size()) == 2 * n, "beta_from_spectral: bad spectral data");
    BetaParams<K> b;
    b.beta.push_back(-sd.kappa[size_t(n)]);
    for (int i = 2; i <= n; ++i)
        b.beta.push_back(-sd.theta_t - sd.theta_1 - sd.kappa[size_t(i - 1)] -
                         sd.kappa[size_t(n + i - 1)]);
    return b;
}

namespace detail {

// tr E_1 X for the n x n product X, i.e. its (1,1) entry.
template <class K>
K trace_e1(const Matrix<K>& x) {
    return x(0, 0);
}

template <class K>
Matrix<K> project_tail(const Matrix<K>& x) {
    Matrix<K> y = x;
    for (int j = 0; j < y.cols(); ++j) y(0, j) = field<K>::zero();
    return y;
}

template <class K>
struct TraceAtoms {
    K t1, t2, t3, t4, t5;
};

template <class K>
TraceAtoms<K> trace_atoms_from_bc(const BCData<K>& bc) {
    Matrix<K> diff = bc.b_t - bc.b_1;
    return {trace_e1(Matrix<K>(bc.c_t * bc.b_t)), trace_e1(Matrix<K>(bc.c_1 * bc.b_t)),
            trace_e1(Matrix<K>(bc.c_t * bc.b_1)),
            trace_e1(Matrix<K>(bc.c_1 * (diff * project_tail(Matrix<K>(bc.c_t * bc.b_t))))),
            trace_e1(Matrix<K>(bc.c_t * (diff * project_tail(Matrix<K>(bc.c_t * bc.b_1)))))};
}

template <class K>
TraceAtoms<K> trace_atoms_from_point(const CanonicalPoint<K>& cp, const SpectralData<K>& sd) {
    const int n = cp.n();
    const K t = cp.time;
    std::vector<K> beta = beta_from_spectral(sd).beta;
    auto lm = [&](int j) { return K(cp.lambda[size_t(j)] * cp.mu[size_t(j)]); };
    TraceAtoms<K> a{field<K>::zero(), field<K>::zero(), field<K>::zero(), field<K>::zero(),
                    field<K>::zero()};
    for (int i = 0; i < n; ++i) {
        a.t1 = a.t1 - lm(i);
        a.t2 = a.t2 + t * cp.mu[size_t(i)];
        a.t3 = a.t3 - cp.lambda[size_t(i)] * (lm(i) + beta[size_t(i)]) / t;
        K brace4 = -beta[size_t(i)] - sd.kappa[size_t(n + i)];
        K brace5 = -beta[size_t(i)] - sd.kappa[size_t(n + i)];
        for (int j = 0; j < i; ++j) {
            brace4 = brace4 - (lm(j) + beta[size_t(j)]);
            brace5 = brace5 + lm(j);
        }
        for (int j = i + 1; j < n; ++j) {
            brace4 = brace4 + lm(j);
            brace5 = brace5 - (lm(j) + beta[size_t(j)]);
        }
        a.t4 = a.t4 + t * cp.mu[size_t(i)] * brace4;
        a.t5 = a.t5 - cp.lambda[size_t(i)] * (lm(i) + beta[size_t(i)]) * brace5 / t;
    }
    return a;
}

// The two residue-product traces written in the atoms plus theta/kappa
// constants, as used to assemble the corrected Hamiltonian.
template <class K>
std::pair<K, K> trace_products(const TraceAtoms<K>& a, const SpectralData<K>& sd) {
    const int n = sd.n;
    const K th_t = sd.theta_t, th_1 = sd.theta_1, th_0 = sd.theta_0;
    auto kap = [&](int i) { return sd.kappa[size_t(i - 1)]; };
    const K half = field<K>::ratio(1, 2);
    K sig = th_t + th_1 + th_0 + kap(1);

    K tt1 = a.t1 * a.t3 - a.t1 * a.t2 - field<K>::of(2) * a.t1 * a.t1 - a.t4 - a.t5 +
            (field<K>::of(3) * th_t + th_1 + field<K>::of(2) * th_0 + field<K>::of(2) * kap(1)) *
                a.t1 -
            (th_t + th_0 + kap(1)) * a.t3 + th_t * a.t2 + field<K>::of(n) * th_t * th_1;
    for (int i = 2; i <= n; ++i)
        tt1 = tt1 - half * (th_t + th_1 - kap(i)) * (th_t + th_1 + kap(i));
    for (int i = 1; i <= n; ++i) tt1 = tt1 + half * kap(n + i) * kap(n + i);
    tt1 = tt1 - half * sig * sig - th_t * sig;

    K tt0 = a.t1 * a.t2 + a.t1 * a.t1 + a.t4 - (th_t + th_0) * a.t1 - th_t * a.t2 + th_t * th_0;
    return {tt1, tt0};
}

}  // namespace detail

// Five identities tying the (1,1)-entry traces of B/C products to symmetric
// functions of the canonical coordinates; valid on the constrained locus.
template <class K>
CheckReport trace_identities_check(const BCData<K>& bc, const K& t, const SpectralData<K>& sd,
                                   double tol = 1e-9) {
    CheckReport report;
    const double bar = field<K>::exact ? 0.0 : tol;
    const int n = sd.n;

    // the four block constraints; identities are only expected on this locus
    Matrix<K> csum = bc.c_t + bc.c_1;
    double cres = 0;
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < n; ++j) cres = std::max(cres, field<K>::mag(csum(i, j)));
    Matrix<K> bc_sum = bc.b_t * bc.c_t + bc.b_1 * bc.c_1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            K want = i == j ? K(-sd.kappa[size_t(n + i)]) : field<K>::zero();
            cres = std::max(cres, field<K>::mag(K(bc_sum(i, j) - want)));
        }
    Matrix<K> cb_sum = bc.c_t * bc.b_t + bc.c_1 * bc.b_1;
    cres = std::max(cres, field<K>::mag(K(cb_sum(0, 0) - (sd.theta_t + sd.theta_1 + sd.theta_0 +
                                                          sd.kappa[0]))));
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) {
            K want = i == j ? K(sd.theta_t + sd.theta_1 + sd.kappa[size_t(i)]) : field<K>::zero();
            cres = std::max(cres, field<K>::mag(K(cb_sum(i, j) - want)));
        }
    report.note("block constraints", cres > bar ? cres : 0.0);
    report.max_residual = std::max(report.max_residual, cres);

    CanonicalPoint<K> cp = lambda_mu_from_bc(bc, t);
    detail::TraceAtoms<K> lhs = detail::trace_atoms_from_bc(bc);
    detail::TraceAtoms<K> rhs = detail::trace_atoms_from_point(cp, sd);
    auto check = [&](const char* what, const K& a, const K& b) {
        double r = field<K>::mag(K(a - b));
        report.note(what, r > bar ? r : 0.0);
        report.max_residual = std::max(report.max_residual, r);
    };
    check("tr E1 Ct Bt", lhs.t1, rhs.t1);
    check("tr E1 C1 Bt", lhs.t2, rhs.t2);
    check("tr E1 Ct B1", lhs.t3, rhs.t3);
    check("tr E1 C1 (Bt-B1) E2n Ct Bt", lhs.t4, rhs.t4);
    check("tr E1 Ct (Bt-B1) E2n Ct B1", lhs.t5, rhs.t5);
    return report;
}

// Corrected deformation Hamiltonian evaluated on normalized residue shapes.
template <class K>
K k_tilde(const Matrix<K>& a_t, const Matrix<K>& a_1, const Matrix<K>& a_0,
          const CanonicalPoint<K>& cp) {
    const K t = cp.time;
    detail::check_deformation_time(t);
    K corr = field<K>::zero();
    for (int i = 0; i < cp.n(); ++i) corr = corr + cp.mu[size_t(i)] * cp.lambda[size_t(i)];
    return (a_t * a_1).trace() / (t - field<K>::one()) + (a_t * a_0).trace() / t + corr / t;
}

// The same Hamiltonian written purely in canonical coordinates through the
// trace identities; agrees with the coupled Hamiltonian of the flow up to a
// coordinate-independent constant.
template <class K>
K k_tilde_explicit(const CanonicalPoint<K>& cp, const SpectralData<K>& sd) {
    const K t = cp.time;
    detail::check_deformation_time(t);
    auto [tt1, tt0] = detail::trace_products(detail::trace_atoms_from_point(cp, sd), sd);
    K corr = field<K>::zero();
    for (int i = 0; i < cp.n(); ++i) corr = corr + cp.mu[size_t(i)] * cp.lambda[size_t(i)];
    return tt1 / (t - field<K>::one()) + tt0 / t + corr / t;
}

// Gauge-normalize a Fuchsian system and decompose its residues at t and 1,
// checking the block constraints that the decomposition must satisfy.
template <class K>
std::pair<BCData<K>, SpectralData<K>> constrained_bc_from_flow(
    const FuchsianSystem<K>& f, double tol = 1e-8, const Matrix<K>* previous_frame = nullptr) {
    NormalizedSystem<K> ns = normalize_gauge(f, previous_frame);
    auto [b_t, c_t] = bc_decompose(ns.a_t, f.spec.theta_t);
    auto [b_1, c_1] = bc_decompose(ns.a_1, f.spec.theta_1);
    BCData<K> bc{b_t, c_t, b_1, c_1};
    SpectralData<K> sd = f.spec;
    sd.kappa = ns.kappa;

    const int n = sd.n;
    double scale = 1.0 + std::max(ns.a_t.max_mag(), ns.a_1.max_mag());
    Matrix<K> csum = bc.c_t + bc.c_1;
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < n; ++j)
            require(field<K>::mag(csum(i, j)) <= tol * scale,
                    "constrained_bc_from_flow: C-row constraint violated");
    Matrix<K> bc_sum = bc.b_t * bc.c_t + bc.b_1 * bc.c_1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            K want = i == j ? K(-sd.kappa[size_t(n + i)]) : field<K>::zero();
            require(field<K>::mag(K(bc_sum(i, j) - want)) <= tol * scale,
                    "constrained_bc_from_flow: BC-diagonal constraint violated");
        }
    return {bc, sd};
}

// Random exact spectral data: distinct kappa, theta_0 fixed by the trace
// relation.
template <class K>
SpectralData<K> random_spectral_data(Rng& rng, int n, long bound = 5) {
    SpectralData<K> sd;
    sd.n = n;
    sd.theta_t = rng.scalar<K>(bound);
    sd.theta_1 = rng.scalar<K>(bound);
    do {
        sd.kappa.clear();
        for (int i = 0; i < 2 * n; ++i) sd.kappa.push_back(rng.scalar<K>(bound));
    } while (!kappa_distinct(sd.kappa));
    K ksum = field<K>::zero();
    for (const K& k : sd.kappa) ksum = ksum + k;
    sd.theta_0 = -field<K>::of(n) * (sd.theta_t + sd.theta_1) - ksum;
    return sd;
}

// Random B/C data on the constrained locus: C_t free, C_1 follows the row
// constraint, and the B's solve the linear block constraints with the
// leftover degrees of freedom drawn at random. For n >= 3 a generic C admits
// no solution (eliminating B leaves (n-1)^2 conditions on n parameters), so
// sampling is limited to n <= 2; larger systems reach the locus through
// gauge-normalized flow data instead.
template <class K>
BCData<K> random_constrained_bc(Rng& rng, const SpectralData<K>& sd, long bound = 4) {
    static_assert(field<K>::exact, "random_constrained_bc: exact scalars only");
    const int n = sd.n;
    require(n <= 2, "random_constrained_bc: generic sampling only exists for n <= 2");
    for (int attempt = 0; attempt < 256; ++attempt) {
        BCData<K> bc{Matrix<K>(n, n), Matrix<K>(n, n), Matrix<K>(n, n), Matrix<K>(n, n)};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                bc.c_t(i, j) = rng.scalar<K>(bound);
                bc.c_1(i, j) = i == 0 ? rng.scalar<K>(bound) : K(-bc.c_t(i, j));
            }

        // unknowns: vec(B_t) then vec(B_1), row-major
        const int nn = n * n;
        const int rows = nn + 1 + (n - 1) * (n - 1);
        Matrix<K> sys(rows, 2 * nn + 1);
        int r = 0;
        auto bt_col = [n](int i, int k) { return i * n + k; };
        auto b1_col = [n, nn](int i, int k) { return nn + i * n + k; };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j, ++r) {
                for (int k = 0; k < n; ++k) {
                    sys(r, bt_col(i, k)) = bc.c_t(k, j);
                    sys(r, b1_col(i, k)) = bc.c_1(k, j);
                }
                sys(r, 2 * nn) = i == j ? K(-sd.kappa[size_t(n + i)]) : field<K>::zero();
            }
        for (int k = 0; k < n; ++k) {
            sys(r, bt_col(k, 0)) = bc.c_t(0, k);
            sys(r, b1_col(k, 0)) = bc.c_1(0, k);
        }
        sys(r, 2 * nn) = sd.theta_t + sd.theta_1 + sd.theta_0 + sd.kappa[0];
        ++r;
        for (int i = 1; i < n; ++i)
            for (int j = 1; j < n; ++j, ++r) {
                for (int k = 0; k < n; ++k) {
                    sys(r, bt_col(k, j)) = bc.c_t(i, k);
                    sys(r, b1_col(k, j)) = bc.c_1(i, k);
                }
                sys(r, 2 * nn) =
                    i == j ? K(sd.theta_t + sd.theta_1 + sd.kappa[size_t(i)]) : field<K>::zero();
            }

        std::vector<int> pivots = rref(sys);
        if (!pivots.empty() && pivots.back() == 2 * nn) continue;  // inconsistent sample

        std::vector<K> x(size_t(2 * nn), field<K>::zero());
        std::vector<bool> is_pivot(size_t(2 * nn), false);
        for (int pc : pivots) is_pivot[size_t(pc)] = true;
        for (int c = 0; c < 2 * nn; ++c)
            if (!is_pivot[size_t(c)]) x[size_t(c)] = rng.scalar<K>(bound);
        for (size_t pr = 0; pr < pivots.size(); ++pr) {
            K v = sys(int(pr), 2 * nn);
            for (int c = 0; c < 2 * nn; ++c)
                if (!is_pivot[size_t(c)]) v = v - sys(int(pr), c) * x[size_t(c)];
            x[size_t(pivots[pr])] = v;
        }
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                bc.b_t(i, k) = x[size_t(bt_col(i, k))];
                bc.b_1(i, k) = x[size_t(b1_col(i, k))];
            }

        // reject samples on a degenerate stratum of the canonical map
        bool good = true;
        for (int i = 1; i <= n && good; ++i) {
            std::vector<int> tail = detail::span_list(i + 1, n);
            std::vector<int> rows_itail = detail::with_front(i, tail);
            if (field<K>::is_zero(minor(bc.c_t, tail, tail)) ||
                field<K>::is_zero(minor(bc.c_t, rows_itail, rows_itail)) ||
                field<K>::is_zero(minor(bc.c_1, detail::with_front(1, tail), rows_itail)))
                good = false;
        }
        if (good) return bc;
    }
    require(false, "random_constrained_bc: no generic sample found");
    return BCData<K>();
}

}  // namespace sasano
