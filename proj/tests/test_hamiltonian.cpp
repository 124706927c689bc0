#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sasano/hamiltonian.hpp"
#include "sasano/rng.hpp"

using namespace sasano;

namespace {

template <class K>
AlphaParams<K> random_alpha(Rng& rng, int n, long bound = 5) {
    std::vector<K> a(size_t(2 * n + 3));
    for (size_t k = 1; k < a.size(); ++k) a[k] = rng.scalar<K>(bound);
    K rest = a[1];
    for (int j = 2; j <= 2 * n; ++j) rest = rest + field<K>::of(2) * a[size_t(j)];
    rest = rest + a[size_t(2 * n + 1)] + a[size_t(2 * n + 2)];
    a[0] = field<K>::one() - rest;
    return AlphaParams<K>::checked(n, a);
}

Rat random_time(Rng& rng) {
    for (;;) {
        Rat s = rng.rat(4);
        if (sgn(s) != 0 && s != 1) return s;
    }
}

template <class K>
PhasePoint<K> random_phase(Rng& rng, Chart chart, int n, const K& time) {
    const size_t m = size_t(n);
    std::vector<K> pos(m), mom(m);
    for (int i = 0; i < n; ++i) {
        pos[size_t(i)] = rng.scalar<K>(4);
        mom[size_t(i)] = rng.scalar<K>(4);
    }
    return phase_point(chart, std::move(pos), std::move(mom), time);
}

}  // namespace

TEST_CASE("parameter dictionary: four linear forms per index") {
    Rng rng(111);

    // n = 1: all interior sums are empty
    AlphaParams<Rat> a1 = random_alpha<Rat>(rng, 1);
    PviKappas<Rat> k1 = kappa_of_alpha(a1, 1);
    CHECK(k1.kappa_s == a1.alpha[1]);
    CHECK(k1.kappa_1 == a1.alpha[3]);
    CHECK(k1.kappa_0 == a1.alpha[4]);
    CHECK(k1.kappa_inf == a1.alpha[0]);

    // n = 2 worked example with exact rational values
    AlphaParams<Rat> a2 = AlphaParams<Rat>::checked(
        2, {Rat(1, 8), Rat(1, 8), Rat(1, 12), Rat(1, 12), Rat(1, 12), Rat(1, 8), Rat(1, 8)});
    PviKappas<Rat> k21 = kappa_of_alpha(a2, 1);
    CHECK(k21.kappa_s == Rat(1, 8));
    CHECK(k21.kappa_1 == Rat(3, 8));
    CHECK(k21.kappa_0 == Rat(5, 24));
    CHECK(k21.kappa_inf == Rat(1, 8));
    PviKappas<Rat> k22 = kappa_of_alpha(a2, 2);
    CHECK(k22.kappa_s == Rat(5, 24));
    CHECK(k22.kappa_1 == Rat(1, 8));
    CHECK(k22.kappa_0 == Rat(1, 8));
    CHECK(k22.kappa_inf == Rat(3, 8));

    // generic n = 2 forms, frozen by hand
    AlphaParams<Rat> g = random_alpha<Rat>(rng, 2);
    const auto& al = g.alpha;
    PviKappas<Rat> kg1 = kappa_of_alpha(g, 1);
    CHECK(kg1.kappa_s == al[1]);
    CHECK(kg1.kappa_1 == al[3] + 2 * al[4] + al[5]);
    CHECK(kg1.kappa_0 == al[3] + al[6]);
    CHECK(kg1.kappa_inf == al[0]);
    PviKappas<Rat> kg2 = kappa_of_alpha(g, 2);
    CHECK(kg2.kappa_s == al[1] + al[3]);
    CHECK(kg2.kappa_1 == al[5]);
    CHECK(kg2.kappa_0 == al[6]);
    CHECK(kg2.kappa_inf == al[0] + 2 * al[2] + al[3]);

    // all-zero parameters (normalization overridden)
    AlphaParams<Rat> z = AlphaParams<Rat>::unchecked(2, std::vector<Rat>(7, Rat(0)));
    PviKappas<Rat> kz = kappa_of_alpha(z, 2);
    CHECK(kz.kappa_s == Rat(0));
    CHECK(kz.kappa_1 == Rat(0));
    CHECK(kz.kappa_0 == Rat(0));
    CHECK(kz.kappa_inf == Rat(0));

    CHECK_THROWS_AS(kappa_of_alpha(g, 0), math_error);
    CHECK_THROWS_AS(kappa_of_alpha(g, 3), math_error);
}

TEST_CASE("single Painleve block: values and closed-form partials") {
    Rng rng(222);

    PviKappas<Rat> kany{rng.rat(), rng.rat(), rng.rat(), rng.rat()};
    Rat s0 = random_time(rng);
    CHECK(pvi_hamiltonian(Rat(0), Rat(0), kany, rng.rat(), s0) == Rat(0));

    PviKappas<Rat> k2{Rat(0), Rat(0), Rat(0), Rat(2)};
    CHECK(pvi_hamiltonian(Rat(1), Rat(0), k2, Rat(1), s0) == Rat(3));

    PviKappas<Rat> kz{Rat(0), Rat(0), Rat(0), Rat(0)};
    CHECK(pvi_hamiltonian(Rat(1), Rat(1), kz, Rat(0), Rat(2)) == Rat(0));

    for (int trial = 0; trial < 50; ++trial) {
        Rat q = rng.rat(), p = rng.rat(), s = random_time(rng), a = rng.rat();
        PviKappas<Rat> k{rng.rat(), rng.rat(), rng.rat(), rng.rat()};

        // straight-line monomial expansion, written independently
        Rat h_expanded = (q * q * q - (1 + s) * q * q + s * q) * p * p -
                         (k.kappa_s - 1) * (q * q - q) * p - k.kappa_1 * (q * q - s * q) * p -
                         k.kappa_0 * (q * q - (1 + s) * q + s) * p + (a * a + a * k.kappa_inf) * q;
        CHECK(pvi_hamiltonian(q, p, k, a, s) == h_expanded);

        Rat dp_expanded = 2 * q * q * q * p - 2 * (1 + s) * q * q * p + 2 * s * q * p -
                          (k.kappa_s - 1) * (q * q - q) - k.kappa_1 * (q * q - s * q) -
                          k.kappa_0 * (q * q - (1 + s) * q + s);
        CHECK(pvi_dh_dp(q, p, k, a, s) == dp_expanded);

        Rat dq_expanded = 3 * q * q * p * p - 2 * (1 + s) * q * p * p + s * p * p -
                          (k.kappa_s - 1) * (2 * q * p - p) - k.kappa_1 * (2 * q * p - s * p) -
                          k.kappa_0 * (2 * q * p - (1 + s) * p) + a * a + a * k.kappa_inf;
        CHECK(pvi_dh_dq(q, p, k, a, s) == dq_expanded);
    }
}

TEST_CASE("coupled Hamiltonian in the s-chart") {
    Rng rng(333);

    // n = 1: no coupling pairs
    AlphaParams<Rat> a1 = random_alpha<Rat>(rng, 1);
    PhasePoint<Rat> x1 = random_phase<Rat>(rng, Chart::S_CHART, 1, random_time(rng));
    CHECK(hamiltonian_s(x1, a1) ==
          pvi_hamiltonian(x1.pos[0], x1.mom[0], kappa_of_alpha(a1, 1), a1.alpha[2], x1.time));

    // n = 2 with zero momenta and zero parameters
    AlphaParams<Rat> z = AlphaParams<Rat>::unchecked(2, std::vector<Rat>(7, Rat(0)));
    PhasePoint<Rat> xz = phase_point(Chart::S_CHART, {rng.rat(), rng.rat()}, {Rat(0), Rat(0)},
                                     random_time(rng));
    CHECK(hamiltonian_s(xz, z) == Rat(0));

    // n = 2 against a fully written-out evaluator
    for (int trial = 0; trial < 25; ++trial) {
        AlphaParams<Rat> P = random_alpha<Rat>(rng, 2);
        const auto& al = P.alpha;
        Rat s = random_time(rng);
        PhasePoint<Rat> x = random_phase<Rat>(rng, Chart::S_CHART, 2, s);
        const Rat q1 = x.pos[0], q2 = x.pos[1], p1 = x.mom[0], p2 = x.mom[1];

        Rat k1s = al[1], k11 = al[3] + 2 * al[4] + al[5], k10 = al[3] + al[6], k1i = al[0];
        Rat k2s = al[1] + al[3], k21 = al[5], k20 = al[6], k2i = al[0] + 2 * al[2] + al[3];
        Rat h1 = q1 * (q1 - 1) * (q1 - s) * p1 * p1 - (k1s - 1) * q1 * (q1 - 1) * p1 -
                 k11 * q1 * (q1 - s) * p1 - k10 * (q1 - 1) * (q1 - s) * p1 +
                 al[2] * (al[2] + k1i) * q1;
        Rat h2 = q2 * (q2 - 1) * (q2 - s) * p2 * p2 - (k2s - 1) * q2 * (q2 - 1) * p2 -
                 k21 * q2 * (q2 - s) * p2 - k20 * (q2 - 1) * (q2 - s) * p2 +
                 al[4] * (al[4] + k2i) * q2;
        Rat cross = 2 * (q1 - s) * p1 * q2 * ((q2 - 1) * p2 + al[4]);
        CHECK(hamiltonian_s(x, P) == h1 + h2 + cross);
    }

    PhasePoint<Rat> bad = random_phase<Rat>(rng, Chart::T_CHART, 1, random_time(rng));
    CHECK_THROWS_AS(hamiltonian_s(bad, a1), math_error);
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(444);
    const double h = 1e-6, tol = 1e-7;
    int points = 0;
    for (int n = 1; n <= 3; ++n) {
        AlphaParams<Cplx> P = random_alpha<Cplx>(rng, n, 1);
        for (int trial = 0; trial < 17; ++trial) {
            for (Chart chart : {Chart::S_CHART, Chart::T_CHART}) {
                Cplx time(rng.real_in(1.43, 1.67), 0.0);
                if (chart == Chart::T_CHART) time = Cplx(rng.real_in(0.30, 0.40), 0.0);
                PhasePoint<Cplx> x;
                x.chart = chart;
                x.time = time;
                for (int i = 0; i < n; ++i) {
                    x.pos.push_back(Cplx(rng.real_in(-1, 1), 0.0));
                    x.mom.push_back(Cplx(rng.real_in(-1, 1), 0.0));
                }
                auto ham = [&](const PhasePoint<Cplx>& y) {
                    return chart == Chart::S_CHART ? hamiltonian_s(y, P) : hamiltonian_t(y, P);
                };
                PhasePair<Cplx> g = chart == Chart::S_CHART ? grad_s(x, P) : grad_t(x, P);
                for (int i = 0; i < n; ++i) {
                    PhasePoint<Cplx> up = x, dn = x;
                    up.pos[size_t(i)] += h;
                    dn.pos[size_t(i)] -= h;
                    Cplx fd = (ham(up) - ham(dn)) / (2 * h);
                    CHECK(std::abs(g.pos[size_t(i)] - fd) <=
                          tol * (1.0 + std::abs(g.pos[size_t(i)])));
                    up = x;
                    dn = x;
                    up.mom[size_t(i)] += h;
                    dn.mom[size_t(i)] -= h;
                    fd = (ham(up) - ham(dn)) / (2 * h);
                    CHECK(std::abs(g.mom[size_t(i)] - fd) <=
                          tol * (1.0 + std::abs(g.mom[size_t(i)])));
                }
                ++points;
            }
        }
    }
    CHECK(points >= 100);
}

TEST_CASE("stationary point of the n=1 flow at the origin with zero parameters") {
    AlphaParams<Rat> z = AlphaParams<Rat>::unchecked(1, std::vector<Rat>(5, Rat(0)));
    PhasePoint<Rat> x = phase_point(Chart::S_CHART, {Rat(0)}, {Rat(0)}, Rat(3));
    PhasePair<Rat> v = vfield_s(x, z);
    CHECK(v.pos[0] == Rat(0));
    CHECK(v.mom[0] == Rat(0));

    PhasePoint<Rat> sing = phase_point(Chart::S_CHART, {Rat(0)}, {Rat(0)}, Rat(1));
    CHECK_THROWS_AS(vfield_s(sing, z), math_error);
}

TEST_CASE("chart transport and its inverse") {
    // frozen example
    PhasePoint<Rat> x = phase_point(Chart::S_CHART, {Rat(1)}, {Rat(3)}, Rat(2));
    PhasePoint<Rat> y = to_mpd(x);
    CHECK(y.chart == Chart::T_CHART);
    CHECK(y.time == Rat(1, 2));
    CHECK(y.pos[0] == Rat(1, 2));
    CHECK(y.mom[0] == Rat(-6));

    Rng rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        PhasePoint<Rat> a = random_phase<Rat>(rng, Chart::S_CHART, 3, random_time(rng));
        PhasePoint<Rat> b = from_mpd(to_mpd(a));
        CHECK(b.time == a.time);
        for (int i = 0; i < 3; ++i) {
            CHECK(b.pos[size_t(i)] == a.pos[size_t(i)]);
            CHECK(b.mom[size_t(i)] == a.mom[size_t(i)]);
        }
    }

    // a position equal to the time lands on zero
    Rat s = Rat(5, 3);
    PhasePoint<Rat> edge = phase_point(Chart::S_CHART, {s}, {Rat(7)}, s);
    CHECK(to_mpd(edge).pos[0] == Rat(0));

    CHECK_THROWS_AS(to_mpd(phase_point(Chart::S_CHART, {Rat(0)}, {Rat(0)}, Rat(1))), math_error);
    CHECK_THROWS_AS(from_mpd(x), math_error);
}

TEST_CASE("s-chart flow pushes forward to the t-chart flow") {
    Rng rng(666);
    for (int n = 1; n <= 3; ++n) {
        for (int trial = 0; trial < 10; ++trial) {
            AlphaParams<Rat> P = random_alpha<Rat>(rng, n);
            Rat s = random_time(rng);
            PhasePoint<Rat> x = random_phase<Rat>(rng, Chart::S_CHART, n, s);
            PhasePair<Rat> v = vfield_s(x, P);
            PhasePoint<Rat> y = to_mpd(x);
            PhasePair<Rat> w = vfield_t(y, P);
            for (int i = 0; i < n; ++i) {
                // d(lambda_i)/dt = q_i - s dq_i/ds, d(mu_i)/dt = s^2(-p_i - s dp_i/ds)
                CHECK(w.pos[size_t(i)] == x.pos[size_t(i)] - s * v.pos[size_t(i)]);
                CHECK(w.mom[size_t(i)] == s * s * (-x.mom[size_t(i)] - s * v.mom[size_t(i)]));
            }
        }
    }
}

TEST_CASE("t-chart Hamiltonian structure") {
    Rng rng(777);

    // n = 1 is a single block with rotated finite-point parameters
    AlphaParams<Rat> a1 = random_alpha<Rat>(rng, 1);
    Rat t = random_time(rng);
    PhasePoint<Rat> y1 = random_phase<Rat>(rng, Chart::T_CHART, 1, t);
    PviKappas<Rat> k = kappa_of_alpha(a1, 1);
    PviKappas<Rat> rot{k.kappa_1, k.kappa_0, k.kappa_s, k.kappa_inf};
    CHECK(hamiltonian_t(y1, a1) ==
          pvi_hamiltonian(y1.pos[0], y1.mom[0], rot, a1.alpha[2], y1.time));

    // zero momenta and zero even-index parameters kill every term
    std::vector<Rat> al(7, Rat(0));
    al[1] = rng.rat();
    al[3] = rng.rat();
    al[5] = rng.rat();
    AlphaParams<Rat> odd = AlphaParams<Rat>::unchecked(2, al);
    PhasePoint<Rat> y0 = phase_point(Chart::T_CHART, {rng.rat(), rng.rat()}, {Rat(0), Rat(0)}, t);
    CHECK(hamiltonian_t(y0, odd) == Rat(0));
}

TEST_CASE("parameter reflection at the alpha_5 wall") {
    Rng rng(888);

    // alpha_5 = 0 fixes everything
    std::vector<Rat> a0 = {rng.rat(), rng.rat(), rng.rat(), rng.rat(), rng.rat(), Rat(0), rng.rat()};
    AlphaParams<Rat> P0 = AlphaParams<Rat>::unchecked(2, a0);
    PhasePoint<Rat> x = random_phase<Rat>(rng, Chart::S_CHART, 2, random_time(rng));
    auto [x0b, P0b] = backlund_s5(x, P0);
    CHECK(x0b.mom[1] == x.mom[1]);
    CHECK(P0b.alpha == P0.alpha);

    // frozen example
    AlphaParams<Rat> P1 = AlphaParams<Rat>::unchecked(
        2, {Rat(10), Rat(20), Rat(30), Rat(40), Rat(50), Rat(2), Rat(60)});
    PhasePoint<Rat> x1 = phase_point(Chart::S_CHART, {Rat(5), Rat(0)}, {Rat(7), Rat(1)}, Rat(3));
    auto [x1b, P1b] = backlund_s5(x1, P1);
    CHECK(x1b.mom[1] == Rat(3));
    CHECK(x1b.mom[0] == Rat(7));
    CHECK(x1b.pos == x1.pos);
    CHECK(P1b.alpha[4] == Rat(52));
    CHECK(P1b.alpha[5] == Rat(-2));
    CHECK(P1b.alpha[0] == Rat(10));
    CHECK(P1b.alpha[1] == Rat(20));

    // involution, exact
    for (int trial = 0; trial < 20; ++trial) {
        AlphaParams<Rat> P = random_alpha<Rat>(rng, 2);
        PhasePoint<Rat> z = random_phase<Rat>(rng, Chart::S_CHART, 2, random_time(rng));
        if (z.pos[1] == Rat(1)) continue;
        auto [z1, Q1] = backlund_s5(z, P);
        auto [z2, Q2] = backlund_s5(z1, Q1);
        CHECK(z2.pos == z.pos);
        CHECK(z2.mom == z.mom);
        CHECK(Q2.alpha == P.alpha);
        CHECK(alpha_weighted_sum(Q1) == alpha_weighted_sum(P));
    }

    // on the normalized surface the Hamiltonian moves by a (q,p)-independent
    // constant, -s*alpha_5*alpha_6, so the flow is preserved
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Rat> av = {Rat(0),    rng.rat(), rng.rat(), rng.rat(),
                               rng.rat(), rng.rat(), rng.rat()};
        av[0] = Rat(1) - av[1] - Rat(2) * (av[2] + av[3] + av[4]) - av[5] - av[6];
        AlphaParams<Rat> P = AlphaParams<Rat>::checked(2, av);
        Rat s = random_time(rng);
        PhasePoint<Rat> z = random_phase<Rat>(rng, Chart::S_CHART, 2, s);
        if (z.pos[1] == Rat(1)) continue;
        auto [zb, Q] = backlund_s5(z, P);
        CHECK(hamiltonian_s(zb, Q) - hamiltonian_s(z, P) == -s * P.alpha[5] * P.alpha[6]);
    }

    // pole at q_2 = 1
    PhasePoint<Rat> pole = phase_point(Chart::S_CHART, {Rat(0), Rat(1)}, {Rat(0), Rat(0)}, Rat(2));
    CHECK_THROWS_AS(backlund_s5(pole, P1), math_error);
}

TEST_CASE("normalization bookkeeping") {
    AlphaParams<Rat> ok = AlphaParams<Rat>::checked(
        1, {Rat(1, 4), Rat(1, 4), Rat(1, 8), Rat(1, 8), Rat(1, 8)});
    CHECK(check_alpha_normalization(ok));

    AlphaParams<Rat> zero = AlphaParams<Rat>::unchecked(1, std::vector<Rat>(5, Rat(0)));
    CHECK(!check_alpha_normalization(zero));
    CHECK_THROWS_AS(AlphaParams<Rat>::checked(1, std::vector<Rat>(5, Rat(0))), math_error);

    AlphaParams<Rat> ex = AlphaParams<Rat>::checked(
        2, {Rat(1, 8), Rat(1, 8), Rat(1, 12), Rat(1, 12), Rat(1, 12), Rat(1, 8), Rat(1, 8)});
    CHECK(check_alpha_normalization(ex));

    CHECK_THROWS_AS(AlphaParams<Rat>::unchecked(1, std::vector<Rat>(4, Rat(0))), math_error);
    CHECK_THROWS_AS(AlphaParams<Rat>::unchecked(0, std::vector<Rat>(3, Rat(0))), math_error);
}

TEST_CASE("flow state packing round-trips") {
    Rng rng(999);
    AlphaParams<Cplx> P = random_alpha<Cplx>(rng, 2, 1);
    PhasePoint<Cplx> x;
    x.chart = Chart::T_CHART;
    x.time = Cplx(0.35, 0.0);
    for (int i = 0; i < 2; ++i) {
        x.pos.push_back(rng.cplx_in(-1, 1));
        x.mom.push_back(rng.cplx_in(-1, 1));
    }
    OdeState y = phase_state(x);
    REQUIRE(y.size() == 4);
    PhasePoint<Cplx> back = phase_of_state(Chart::T_CHART, y, 0.35);
    CHECK(back.pos == x.pos);
    CHECK(back.mom == x.mom);

    OdeRhs rhs = sasano_ode_rhs(P, Chart::T_CHART);
    OdeState dy;
    rhs(0.35, y, dy);
    PhasePair<Cplx> v = vfield_t(x, P);
    REQUIRE(dy.size() == 4);
    CHECK(dy[0] == v.pos[0]);
    CHECK(dy[3] == v.mom[1]);
}
