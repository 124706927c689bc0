#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sasano/rng.hpp"
#include "sasano/schlesinger.hpp"

using namespace sasano;

namespace {

template <class K>
Matrix<K> random_matrix(Rng& rng, int rows, int cols, long bound = 4) {
    Matrix<K> m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.scalar<K>(bound);
    return m;
}

Rat random_time(Rng& rng) {
    for (;;) {
        Rat s = rng.rat(4);
        if (sgn(s) != 0 && s != 1) return s;
    }
}

template <class K>
Matrix<K> random_invertible(Rng& rng, int n, long bound = 4) {
    for (;;) {
        Matrix<K> m = random_matrix<K>(rng, n, n, bound);
        Matrix<K> out;
        if (try_invert(m, out)) return m;
    }
}

SpectralData<Cplx> float_thetas(int n) {
    SpectralData<Cplx> sd;
    sd.n = n;
    sd.theta_t = Cplx(0.9, 0.0);
    sd.theta_1 = Cplx(-0.7, 0.0);
    sd.theta_0 = Cplx(0.8, 0.0);
    return sd;
}

// Normalized-shape system of size 2 built directly from scalar B/C data; the
// single linear constraint b_t c_t + b_1 c_1 = -kappa_2 makes the residue at 0
// land on its first row.
FuchsianSystem<Rat> exact_normalized_pair(Rng& rng, const Rat& k1, const Rat& k2) {
    Rat bt = rng.rat_nonzero(), ct = rng.rat_nonzero(), c1 = rng.rat_nonzero();
    Rat b1 = (-k2 - bt * ct) / c1;
    Rat tt = rng.rat_nonzero(), t1 = rng.rat_nonzero();
    FuchsianSystem<Rat> f;
    f.a_t = bc_recompose(Matrix<Rat>(1, 1, {bt}), Matrix<Rat>(1, 1, {ct}), tt);
    f.a_1 = bc_recompose(Matrix<Rat>(1, 1, {b1}), Matrix<Rat>(1, 1, {c1}), t1);
    Matrix<Rat> a_inf(2, 2);
    a_inf(0, 0) = k1;
    a_inf(1, 1) = k2;
    a_inf(1, 0) = -(bt * (tt - ct * bt) + b1 * (t1 - c1 * b1));
    f.a_0 = -(f.a_t + f.a_1 + a_inf);
    f.time = random_time(rng);
    f.spec.n = 1;
    f.spec.theta_t = tt;
    f.spec.theta_1 = t1;
    f.spec.theta_0 = -tt - t1 - k1 - k2;
    f.spec.kappa = {k1, k2};
    return f;
}

}  // namespace

TEST_CASE("trace relation bookkeeping") {
    SpectralData<Rat> sd;
    sd.n = 2;
    sd.theta_t = Rat(1, 2);
    sd.theta_1 = Rat(1, 3);
    sd.theta_0 = Rat(1, 6);
    sd.kappa = {Rat(-1), Rat(-1, 2), Rat(-1, 3), Rat(0)};
    CHECK(fuchs_defect(sd) == Rat(0));
    CHECK(check_fuchs_relation(sd));
    CHECK(kappa_distinct(sd.kappa));

    sd.kappa[3] = Rat(1);
    CHECK(fuchs_defect(sd) == Rat(1));
    CHECK(!check_fuchs_relation(sd));
    sd.kappa[3] = sd.kappa[0];
    CHECK(!kappa_distinct(sd.kappa));
}

TEST_CASE("random residue tuples satisfy their eigenvalue contracts") {
    Rng rng(1010);
    for (int n : {1, 2}) {
        FuchsianSystem<Cplx> f = random_instance(float_thetas(n), rng);
        const int m = 2 * n;
        REQUIRE(f.a_t.rows() == m);

        CHECK(spectral_type(f.a_t) == Partition({n, n}));
        CHECK(spectral_type(f.a_1) == Partition({n, n}));
        CHECK(spectral_type(f.a_0) == Partition({2 * n - 1, 1}));

        Cplx tr = residue_at_infinity(f).trace();
        Cplx want = -(Cplx(double(n)) * (f.spec.theta_t + f.spec.theta_1) + f.spec.theta_0);
        CHECK(std::abs(tr - want) <= 1e-10);

        REQUIRE(int(f.spec.kappa.size()) == m);
        CHECK(check_fuchs_relation(f.spec, 1e-9));
        CHECK(kappa_distinct(f.spec.kappa, 1e-9));

        std::vector<Cplx> ev = eigenvalues(residue_at_infinity(f));
        for (int i = 0; i < m; ++i) CHECK(std::abs(ev[size_t(i)] - f.spec.kappa[size_t(i)]) <= 1e-9);
    }

    // rank-one-plus-scalar structure at n = 1: char poly of A_t is z^2 - theta_t z
    FuchsianSystem<Cplx> f1 = random_instance(float_thetas(1), rng);
    Poly<Cplx> p = char_poly(f1.a_t);
    REQUIRE(p.deg() == 2);
    CHECK(std::abs(p.c[2] - Cplx(1.0)) <= 1e-12);
    CHECK(std::abs(p.c[1] + f1.spec.theta_t) <= 1e-10);
    CHECK(std::abs(p.c[0]) <= 1e-10);
}

TEST_CASE("deformation equations: commutator structure") {
    Rng rng(2020);

    // diagonal residues commute
    FuchsianSystem<Rat> d;
    d.a_t = Matrix<Rat>(2, 2, {Rat(3), Rat(0), Rat(0), Rat(1)});
    d.a_1 = Matrix<Rat>(2, 2, {Rat(-2), Rat(0), Rat(0), Rat(5)});
    d.a_0 = Matrix<Rat>(2, 2, {Rat(7), Rat(0), Rat(0), Rat(-4)});
    d.time = Rat(1, 3);
    SchlesingerRhs<Rat> rd = schlesinger_rhs(d);
    CHECK(rd.d_a_t.is_zero());
    CHECK(rd.d_a_1.is_zero());
    CHECK(rd.d_a_0.is_zero());

    // the three right-hand sides telescope to zero
    for (int trial = 0; trial < 10; ++trial) {
        FuchsianSystem<Rat> f;
        f.a_t = random_matrix<Rat>(rng, 4, 4);
        f.a_1 = random_matrix<Rat>(rng, 4, 4);
        f.a_0 = random_matrix<Rat>(rng, 4, 4);
        f.time = random_time(rng);
        SchlesingerRhs<Rat> r = schlesinger_rhs(f);
        CHECK((r.d_a_t + r.d_a_1 + r.d_a_0).is_zero());
    }

    // entrywise oracle at size 2, written out from the commutator definition
    for (int trial = 0; trial < 10; ++trial) {
        FuchsianSystem<Rat> f;
        f.a_t = random_matrix<Rat>(rng, 2, 2);
        f.a_1 = random_matrix<Rat>(rng, 2, 2);
        f.a_0 = random_matrix<Rat>(rng, 2, 2);
        f.time = random_time(rng);
        const Rat t = f.time;

        auto comm = [](const Matrix<Rat>& a, const Matrix<Rat>& b) {
            return Matrix<Rat>(
                2, 2,
                {a(0, 1) * b(1, 0) - b(0, 1) * a(1, 0),
                 a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1) - b(0, 0) * a(0, 1) - b(0, 1) * a(1, 1),
                 a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0) - b(1, 0) * a(0, 0) - b(1, 1) * a(1, 0),
                 a(1, 0) * b(0, 1) - b(1, 0) * a(0, 1)});
        };
        Matrix<Rat> ct0 = comm(f.a_t, f.a_0);
        Matrix<Rat> ct1 = comm(f.a_t, f.a_1);
        SchlesingerRhs<Rat> r = schlesinger_rhs(f);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CHECK(r.d_a_t(i, j) == -ct0(i, j) / t - ct1(i, j) / (t - 1));
                CHECK(r.d_a_1(i, j) == ct1(i, j) / (t - 1));
                CHECK(r.d_a_0(i, j) == ct0(i, j) / t);
            }
    }

    FuchsianSystem<Rat> sing;
    sing.a_t = Matrix<Rat>(2, 2);
    sing.a_1 = Matrix<Rat>(2, 2);
    sing.a_0 = Matrix<Rat>(2, 2);
    sing.time = Rat(1);
    CHECK_THROWS_AS(schlesinger_rhs(sing), math_error);
}

TEST_CASE("isomonodromic flow preserves eigenvalue data") {
    Rng rng(3030);
    for (int n : {1, 2}) {
        FuchsianSystem<Cplx> f = random_instance(float_thetas(n), rng);
        f.time = Cplx(0.35, 0.0);

        FuchsianSystem<Cplx> same = integrate_schlesinger(f, 0.35);
        CHECK((same.a_t - f.a_t).is_zero());

        FuchsianSystem<Cplx> g = integrate_schlesinger(f, 0.60, 1e-11);
        CHECK(std::abs(g.time - Cplx(0.60, 0.0)) <= 1e-12);

        auto ev_close = [](const Matrix<Cplx>& a, const Matrix<Cplx>& b, double tol) {
            std::vector<Cplx> ea = eigenvalues(a), eb = eigenvalues(b);
            REQUIRE(ea.size() == eb.size());
            for (size_t i = 0; i < ea.size(); ++i)
                if (std::abs(ea[i] - eb[i]) > tol) return false;
            return true;
        };
        CHECK(ev_close(g.a_t, f.a_t, 1e-8));
        CHECK(ev_close(g.a_1, f.a_1, 1e-8));
        CHECK(ev_close(g.a_0, f.a_0, 1e-8));

        Matrix<Cplx> drift = residue_at_infinity(g) - residue_at_infinity(f);
        CHECK(drift.max_mag() <= 1e-9);

        CHECK_THROWS_AS(integrate_schlesinger(f, 1.2), math_error);
        f.time = Cplx(0.35, 0.2);
        CHECK_THROWS_AS(integrate_schlesinger(f, 0.6), math_error);
    }
}

TEST_CASE("trace Hamiltonian of the deformation") {
    Rng rng(4040);

    FuchsianSystem<Rat> d;
    Rat a = rng.rat_nonzero(), b = rng.rat_nonzero(), c = rng.rat_nonzero();
    d.a_t = Matrix<Rat>(2, 2, {a, Rat(0), Rat(0), Rat(0)});
    d.a_1 = Matrix<Rat>(2, 2, {b, Rat(0), Rat(0), Rat(0)});
    d.a_0 = Matrix<Rat>(2, 2, {c, Rat(0), Rat(0), Rat(0)});
    d.time = Rat(2);
    CHECK(hamiltonian_K(d) == a * b + a * c / 2);

    d.a_t = Matrix<Rat>(2, 2);
    CHECK(hamiltonian_K(d) == Rat(0));

    for (int trial = 0; trial < 10; ++trial) {
        FuchsianSystem<Rat> f;
        f.a_t = random_matrix<Rat>(rng, 3, 3);
        f.a_1 = random_matrix<Rat>(rng, 3, 3);
        f.a_0 = random_matrix<Rat>(rng, 3, 3);
        f.time = random_time(rng);
        Matrix<Rat> g = random_invertible<Rat>(rng, 3);
        Matrix<Rat> gi = inverse(g);
        FuchsianSystem<Rat> h = f;
        h.a_t = gi * f.a_t * g;
        h.a_1 = gi * f.a_1 * g;
        h.a_0 = gi * f.a_0 * g;
        CHECK(hamiltonian_K(h) == hamiltonian_K(f));
    }
}

TEST_CASE("gauge normalization shapes the residues at 0 and infinity") {
    Rng rng(5050);

    // floating path on random instances
    for (int n : {1, 2}) {
        FuchsianSystem<Cplx> f = random_instance(float_thetas(n), rng);
        const int m = 2 * n;
        NormalizedSystem<Cplx> ns = normalize_gauge(f);
        const double tol = 1e-8 * (1.0 + f.a_0.max_mag());

        for (int i = 1; i < m; ++i)
            for (int j = 0; j < m; ++j) CHECK(std::abs(ns.a_0(i, j)) <= tol);
        CHECK(std::abs(ns.a_0(0, 0) - f.spec.theta_0) <= tol);

        for (int i = 0; i < m; ++i)
            for (int j = 1; j < m; ++j)
                if (i != j) CHECK(std::abs(ns.a_inf(i, j)) <= tol);
        for (int i = 0; i < m; ++i)
            CHECK(std::abs(ns.a_inf(i, i) - ns.kappa[size_t(i)]) <= tol);
        for (size_t i = 0; i + 1 < ns.kappa.size(); ++i)
            CHECK(ns.kappa[i].real() <= ns.kappa[i + 1].real());

        CHECK((ns.a_t + ns.a_1 + ns.a_0 + ns.a_inf).is_zero(1e-12));
        CHECK(spectral_type(ns.a_t) == spectral_type(f.a_t));
        CHECK(spectral_type(ns.a_1) == spectral_type(f.a_1));

        Matrix<Cplx> gi = inverse(ns.gauge);
        CHECK((gi * f.a_t * ns.gauge - ns.a_t).is_zero(tol));
    }

    // exact path: an already-normalized system is fixed up to column scaling
    for (int trial = 0; trial < 5; ++trial) {
        FuchsianSystem<Rat> f = exact_normalized_pair(rng, Rat(-3, 2), Rat(5, 7));
        CHECK(f.a_0(1, 0) == Rat(0));
        CHECK(f.a_0(1, 1) == Rat(0));
        CHECK(f.a_0(0, 0) == f.spec.theta_0);

        NormalizedSystem<Rat> ns = normalize_gauge(f);
        CHECK(ns.gauge(0, 1) == Rat(0));
        CHECK(ns.gauge(1, 0) == Rat(0));
        CHECK(ns.kappa == f.spec.kappa);
        CHECK(ns.a_0(1, 0) == Rat(0));
        CHECK(ns.a_0(1, 1) == Rat(0));
        CHECK(ns.a_0(0, 0) == f.spec.theta_0);
        CHECK(ns.a_inf(0, 1) == Rat(0));
        CHECK(ns.a_inf(0, 0) == Rat(-3, 2));
        CHECK(ns.a_inf(1, 1) == Rat(5, 7));
        CHECK((ns.a_t + ns.a_1 + ns.a_0 + ns.a_inf).is_zero());
    }

    // frame continuity keeps a chosen non-sorted order
    FuchsianSystem<Cplx> f = random_instance(float_thetas(2), rng);
    NormalizedSystem<Cplx> base = normalize_gauge(f);
    Matrix<Cplx> swapped(4, 4);
    std::vector<int> perm = {1, 0, 2, 3};
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) swapped(i, j) = base.gauge(i, perm[size_t(j)]);
    NormalizedSystem<Cplx> follow = normalize_gauge(f, &swapped);
    CHECK(std::abs(follow.kappa[0] - base.kappa[1]) <= 1e-12);
    CHECK(std::abs(follow.kappa[1] - base.kappa[0]) <= 1e-12);
}

TEST_CASE("B/C decomposition of rank-structured residues") {
    Rng rng(6060);

    // closed form at size 2
    Rat b = Rat(3, 2), c = Rat(-5, 3), th = Rat(7, 4);
    Matrix<Rat> a(2, 2,
                  {th - c * b, c, b * (th - c * b), b * c});
    auto [bb, cc] = bc_decompose(a, th);
    CHECK(bb(0, 0) == b);
    CHECK(cc(0, 0) == c);

    for (int n = 1; n <= 3; ++n) {
        for (int trial = 0; trial < 8; ++trial) {
            Matrix<Rat> bm = random_matrix<Rat>(rng, n, n);
            Matrix<Rat> cm = random_matrix<Rat>(rng, n, n);
            Rat theta = rng.rat_nonzero();
            Matrix<Rat> rec = bc_recompose(bm, cm, theta);
            CHECK(rec.trace() == Rat(n) * theta);

            auto [b2, c2] = bc_decompose(rec, theta);
            CHECK(b2 == bm);
            CHECK(c2 == cm);
        }
    }

    // eigenvalue split {theta (x n), 0 (x n)} for a generic exact sample
    Matrix<Rat> bm = random_matrix<Rat>(rng, 2, 2);
    Matrix<Rat> cm = random_matrix<Rat>(rng, 2, 2);
    Matrix<Rat> rec = bc_recompose(bm, cm, Rat(5, 3));
    CHECK(spectral_type(rec) == Partition({2, 2}));

    // floating roundtrip
    Matrix<Cplx> bf = random_matrix<Cplx>(rng, 2, 2);
    Matrix<Cplx> cf = random_matrix<Cplx>(rng, 2, 2);
    Cplx thf(0.75, 0.0);
    auto [b3, c3] = bc_decompose(bc_recompose(bf, cf, thf), thf);
    CHECK((b3 - bf).is_zero(1e-10));
    CHECK((c3 - cf).is_zero(1e-10));

    // top rows must span the row space
    Matrix<Rat> badm(2, 2, {Rat(0), Rat(0), Rat(1), Rat(0)});
    CHECK_THROWS_AS(bc_decompose(badm, Rat(1)), math_error);
}

TEST_CASE("canonical bracket on B/C functionals") {
    Rng rng(7070);
    const int n = 2;
    BCData<Rat> at{random_matrix<Rat>(rng, n, n), random_matrix<Rat>(rng, n, n),
                   random_matrix<Rat>(rng, n, n), random_matrix<Rat>(rng, n, n)};

    auto entry = [n](Matrix<Rat> BCData<Rat>::* part, int i, int j) {
        BCFunctional<Rat> f;
        f.value = [part, i, j](const BCData<Rat>& x) { return (x.*part)(i, j); };
        f.grad = [part, i, j, n](const BCData<Rat>&) {
            BCData<Rat> g{Matrix<Rat>(n, n), Matrix<Rat>(n, n), Matrix<Rat>(n, n),
                          Matrix<Rat>(n, n)};
            (g.*part)(i, j) = Rat(1);
            return g;
        };
        return f;
    };

    CHECK(poisson_bracket_bc(entry(&BCData<Rat>::b_t, 0, 0), entry(&BCData<Rat>::c_t, 0, 0), at) ==
          Rat(-1));
    CHECK(poisson_bracket_bc(entry(&BCData<Rat>::c_t, 0, 0), entry(&BCData<Rat>::b_t, 0, 0), at) ==
          Rat(1));
    CHECK(poisson_bracket_bc(entry(&BCData<Rat>::b_1, 0, 1), entry(&BCData<Rat>::c_1, 1, 0), at) ==
          Rat(-1));
    CHECK(poisson_bracket_bc(entry(&BCData<Rat>::b_t, 0, 0), entry(&BCData<Rat>::b_1, 1, 1), at) ==
          Rat(0));
    CHECK(poisson_bracket_bc(entry(&BCData<Rat>::b_t, 0, 1), entry(&BCData<Rat>::c_1, 1, 0), at) ==
          Rat(0));
    CHECK(poisson_bracket_bc(entry(&BCData<Rat>::b_t, 0, 1), entry(&BCData<Rat>::c_t, 0, 1), at) ==
          Rat(0));

    // determinant functional with cofactor derivatives
    BCFunctional<Rat> det_ct;
    det_ct.value = [](const BCData<Rat>& x) { return det(x.c_t); };
    det_ct.grad = [n](const BCData<Rat>& x) {
        BCData<Rat> g{Matrix<Rat>(n, n), Matrix<Rat>(n, n), Matrix<Rat>(n, n), Matrix<Rat>(n, n)};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Rat cof = det(x.c_t.drop_row_col(i, j));
                g.c_t(i, j) = ((i + j) % 2 == 0) ? cof : -cof;
            }
        return g;
    };
    Rat got = poisson_bracket_bc(det_ct, entry(&BCData<Rat>::b_t, 0, 0), at);
    CHECK(got == det(at.c_t.drop_row_col(0, 0)));

    // antisymmetry over random linear functionals
    for (int trial = 0; trial < 10; ++trial) {
        auto linear = [&]() {
            BCData<Rat> coef{random_matrix<Rat>(rng, n, n), random_matrix<Rat>(rng, n, n),
                             random_matrix<Rat>(rng, n, n), random_matrix<Rat>(rng, n, n)};
            BCFunctional<Rat> f;
            f.value = [coef, n](const BCData<Rat>& x) {
                Rat acc(0);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        acc += coef.b_t(i, j) * x.b_t(i, j) + coef.c_t(i, j) * x.c_t(i, j) +
                               coef.b_1(i, j) * x.b_1(i, j) + coef.c_1(i, j) * x.c_1(i, j);
                return acc;
            };
            f.grad = [coef](const BCData<Rat>&) { return coef; };
            return f;
        };
        BCFunctional<Rat> f = linear(), g = linear();
        CHECK(poisson_bracket_bc(f, g, at) + poisson_bracket_bc(g, f, at) == Rat(0));
    }

    // floating path exercises the finite-difference fallback
    BCData<Cplx> atf{random_matrix<Cplx>(rng, n, n), random_matrix<Cplx>(rng, n, n),
                     random_matrix<Cplx>(rng, n, n), random_matrix<Cplx>(rng, n, n)};
    BCFunctional<Cplx> fb, fc;
    fb.value = [](const BCData<Cplx>& x) { return x.b_t(0, 0); };
    fc.value = [](const BCData<Cplx>& x) { return x.c_t(0, 0); };
    CHECK(std::abs(poisson_bracket_bc(fb, fc, atf) - Cplx(-1.0)) <= 1e-9);
}
