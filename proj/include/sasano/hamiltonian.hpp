#pragma once

#include <utility>
#include <vector>

#include "sasano/field.hpp"
#include "sasano/rk45.hpp"

namespace sasano {

enum class Chart { S_CHART, T_CHART };

// Root-type parameters alpha_0..alpha_{2n+2}.  The weighted sum
// alpha_0 + alpha_1 + sum_{j=2}^{2n} 2*alpha_j + alpha_{2n+1} + alpha_{2n+2}
// must equal 1 for a genuine parameter point; `checked` enforces that,
// `unchecked` admits intermediate values (parameter-shifted stages).
template <typename K>
struct AlphaParams {
    int n = 0;
    std::vector<K> alpha;

    static AlphaParams checked(int n, std::vector<K> a) {
        AlphaParams P = unchecked(n, std::move(a));
        require(check_alpha_normalization(P), "AlphaParams: normalization sum != 1");
        return P;
    }

    static AlphaParams unchecked(int n, std::vector<K> a) {
        require(n >= 1, "AlphaParams: n must be positive");
        require(int(a.size()) == 2 * n + 3, "AlphaParams: need 2n+3 entries");
        AlphaParams P;
        P.n = n;
        P.alpha = std::move(a);
        return P;
    }
};

template <typename K>
K alpha_weighted_sum(const AlphaParams<K>& P) {
    const K two = field<K>::of(2);
    K s = P.alpha[0] + P.alpha[1];
    for (int j = 2; j <= 2 * P.n; ++j) s = s + two * P.alpha[j];
    s = s + P.alpha[2 * P.n + 1] + P.alpha[2 * P.n + 2];
    return s;
}

template <typename K>
bool check_alpha_normalization(const AlphaParams<K>& P, double tol = 1e-12) {
    return field<K>::is_zero(alpha_weighted_sum(P) - field<K>::one(), tol);
}

// Phase-space point of the order-2n system.  In the s-chart pos/mom hold
// (q_1..q_n, p_1..p_n) and time = s; in the t-chart (lambda, mu) and time = t.
template <typename K>
struct PhasePoint {
    Chart chart = Chart::S_CHART;
    std::vector<K> pos;
    std::vector<K> mom;
    K time = field<K>::zero();

    int n() const { return int(pos.size()); }
};

template <typename K>
PhasePoint<K> phase_point(Chart chart, std::vector<K> pos, std::vector<K> mom, K time) {
    require(pos.size() == mom.size(), "phase_point: pos/mom size mismatch");
    PhasePoint<K> x;
    x.chart = chart;
    x.pos = std::move(pos);
    x.mom = std::move(mom);
    x.time = std::move(time);
    return x;
}

// Gradient (d/dpos, d/dmom) or velocity (dpos/dtime, dmom/dtime), by context.
template <typename K>
struct PhasePair {
    std::vector<K> pos;
    std::vector<K> mom;
};

// The four sixth-Painleve parameters attached to index i.
template <typename K>
struct PviKappas {
    K kappa_s, kappa_1, kappa_0, kappa_inf;
};

template <typename K>
PviKappas<K> kappa_of_alpha(const AlphaParams<K>& P, int i) {
    require(1 <= i && i <= P.n, "kappa_of_alpha: index out of range");
    const auto& a = P.alpha;
    const int n = P.n;
    const K two = field<K>::of(2);
    K ks = a[1];
    for (int j = 1; j <= i - 1; ++j) ks = ks + a[2 * j + 1];
    K k1 = a[2 * n + 1];
    for (int j = i; j <= n - 1; ++j) k1 = k1 + a[2 * j + 1];
    for (int j = i + 1; j <= n; ++j) k1 = k1 + two * a[2 * j];
    K k0 = a[2 * n + 2];
    for (int j = i; j <= n - 1; ++j) k0 = k0 + a[2 * j + 1];
    K ki = a[0];
    for (int j = 1; j <= i - 1; ++j) ki = ki + two * a[2 * j] + a[2 * j + 1];
    return {ks, k1, k0, ki};
}

// Slot order for the t-chart blocks: the singular points (0,1,s) of the
// s-chart become (1,t,0), so the three finite-point parameters rotate.
template <typename K>
PviKappas<K> t_chart_kappas(const PviKappas<K>& k) {
    return {k.kappa_1, k.kappa_0, k.kappa_s, k.kappa_inf};
}

// One sixth-Painleve block.  Slots follow the s-chart reading: kappa_s rides
// q(q-1)p (shifted by 1), kappa_1 rides q(q-s)p, kappa_0 rides (q-1)(q-s)p.
template <typename K>
K pvi_hamiltonian(const K& q, const K& p, const PviKappas<K>& k, const K& a, const K& s) {
    const K one = field<K>::one();
    return q * (q - one) * (q - s) * p * p - (k.kappa_s - one) * q * (q - one) * p -
           k.kappa_1 * q * (q - s) * p - k.kappa_0 * (q - one) * (q - s) * p +
           a * (a + k.kappa_inf) * q;
}

template <typename K>
K pvi_dh_dp(const K& q, const K& p, const PviKappas<K>& k, const K&, const K& s) {
    const K one = field<K>::one();
    return field<K>::of(2) * q * (q - one) * (q - s) * p - (k.kappa_s - one) * q * (q - one) -
           k.kappa_1 * q * (q - s) - k.kappa_0 * (q - one) * (q - s);
}

template <typename K>
K pvi_dh_dq(const K& q, const K& p, const PviKappas<K>& k, const K& a, const K& s) {
    const K one = field<K>::one();
    const K two = field<K>::of(2);
    const K three = field<K>::of(3);
    return (three * q * q - two * (one + s) * q + s) * p * p -
           (k.kappa_s - one) * (two * q - one) * p - k.kappa_1 * (two * q - s) * p -
           k.kappa_0 * (two * q - s - one) * p + a * (a + k.kappa_inf);
}

namespace detail {

template <typename K>
void check_chart(const PhasePoint<K>& x, const AlphaParams<K>& P, Chart expect, const char* who) {
    require(x.chart == expect, std::string(who) + ": wrong chart");
    require(x.n() == P.n && int(x.mom.size()) == P.n, std::string(who) + ": size mismatch");
    require(!(x.time == field<K>::zero()) && !(x.time == field<K>::one()),
            std::string(who) + ": singular time");
}

}  // namespace detail

template <typename K>
K hamiltonian_s(const PhasePoint<K>& x, const AlphaParams<K>& P) {
    detail::check_chart(x, P, Chart::S_CHART, "hamiltonian_s");
    const K one = field<K>::one();
    const K two = field<K>::of(2);
    const K& s = x.time;
    K h = field<K>::zero();
    for (int i = 1; i <= P.n; ++i)
        h = h + pvi_hamiltonian(x.pos[i - 1], x.mom[i - 1], kappa_of_alpha(P, i), P.alpha[2 * i], s);
    for (int i = 1; i <= P.n; ++i)
        for (int j = i + 1; j <= P.n; ++j)
            h = h + two * (x.pos[i - 1] - s) * x.mom[i - 1] * x.pos[j - 1] *
                        ((x.pos[j - 1] - one) * x.mom[j - 1] + P.alpha[2 * j]);
    return h;
}

template <typename K>
PhasePair<K> grad_s(const PhasePoint<K>& x, const AlphaParams<K>& P) {
    detail::check_chart(x, P, Chart::S_CHART, "grad_s");
    const K one = field<K>::one();
    const K two = field<K>::of(2);
    const K& s = x.time;
    const int n = P.n;
    PhasePair<K> g{std::vector<K>(n, field<K>::zero()), std::vector<K>(n, field<K>::zero())};
    for (int i = 1; i <= n; ++i) {
        const auto k = kappa_of_alpha(P, i);
        g.pos[i - 1] = g.pos[i - 1] + pvi_dh_dq(x.pos[i - 1], x.mom[i - 1], k, P.alpha[2 * i], s);
        g.mom[i - 1] = g.mom[i - 1] + pvi_dh_dp(x.pos[i - 1], x.mom[i - 1], k, P.alpha[2 * i], s);
    }
    for (int i = 1; i <= n; ++i) {
        const K& qi = x.pos[i - 1];
        const K& pi = x.mom[i - 1];
        for (int j = i + 1; j <= n; ++j) {
            const K& qj = x.pos[j - 1];
            const K& pj = x.mom[j - 1];
            const K w = (qj - one) * pj + P.alpha[2 * j];
            g.pos[i - 1] = g.pos[i - 1] + two * pi * qj * w;
            g.mom[i - 1] = g.mom[i - 1] + two * (qi - s) * qj * w;
            g.pos[j - 1] = g.pos[j - 1] + two * (qi - s) * pi * ((two * qj - one) * pj + P.alpha[2 * j]);
            g.mom[j - 1] = g.mom[j - 1] + two * (qi - s) * pi * qj * (qj - one);
        }
    }
    return g;
}

template <typename K>
PhasePair<K> vfield_s(const PhasePoint<K>& x, const AlphaParams<K>& P) {
    const PhasePair<K> g = grad_s(x, P);
    const K denom = x.time * (x.time - field<K>::one());
    PhasePair<K> v{std::vector<K>(P.n), std::vector<K>(P.n)};
    for (int i = 0; i < P.n; ++i) {
        v.pos[i] = g.mom[i] / denom;
        v.mom[i] = -g.pos[i] / denom;
    }
    return v;
}

template <typename K>
K hamiltonian_t(const PhasePoint<K>& y, const AlphaParams<K>& P) {
    detail::check_chart(y, P, Chart::T_CHART, "hamiltonian_t");
    const K one = field<K>::one();
    const K two = field<K>::of(2);
    const K& t = y.time;
    K h = field<K>::zero();
    for (int i = 1; i <= P.n; ++i)
        h = h + pvi_hamiltonian(y.pos[i - 1], y.mom[i - 1], t_chart_kappas(kappa_of_alpha(P, i)),
                                P.alpha[2 * i], t);
    for (int i = 1; i <= P.n; ++i)
        for (int j = i + 1; j <= P.n; ++j)
            h = h + two * y.pos[i - 1] * y.mom[i - 1] * (y.pos[j - 1] - one) *
                        ((y.pos[j - 1] - t) * y.mom[j - 1] + P.alpha[2 * j]);
    return h;
}

template <typename K>
PhasePair<K> grad_t(const PhasePoint<K>& y, const AlphaParams<K>& P) {
    detail::check_chart(y, P, Chart::T_CHART, "grad_t");
    const K one = field<K>::one();
    const K two = field<K>::of(2);
    const K& t = y.time;
    const int n = P.n;
    PhasePair<K> g{std::vector<K>(n, field<K>::zero()), std::vector<K>(n, field<K>::zero())};
    for (int i = 1; i <= n; ++i) {
        const auto k = t_chart_kappas(kappa_of_alpha(P, i));
        g.pos[i - 1] = g.pos[i - 1] + pvi_dh_dq(y.pos[i - 1], y.mom[i - 1], k, P.alpha[2 * i], t);
        g.mom[i - 1] = g.mom[i - 1] + pvi_dh_dp(y.pos[i - 1], y.mom[i - 1], k, P.alpha[2 * i], t);
    }
    for (int i = 1; i <= n; ++i) {
        const K& li = y.pos[i - 1];
        const K& mi = y.mom[i - 1];
        for (int j = i + 1; j <= n; ++j) {
            const K& lj = y.pos[j - 1];
            const K& mj = y.mom[j - 1];
            const K w = (lj - t) * mj + P.alpha[2 * j];
            g.pos[i - 1] = g.pos[i - 1] + two * mi * (lj - one) * w;
            g.mom[i - 1] = g.mom[i - 1] + two * li * (lj - one) * w;
            g.pos[j - 1] = g.pos[j - 1] + two * li * mi * ((two * lj - t - one) * mj + P.alpha[2 * j]);
            g.mom[j - 1] = g.mom[j - 1] + two * li * mi * (lj - one) * (lj - t);
        }
    }
    return g;
}

template <typename K>
PhasePair<K> vfield_t(const PhasePoint<K>& y, const AlphaParams<K>& P) {
    const PhasePair<K> g = grad_t(y, P);
    const K denom = y.time * (y.time - field<K>::one());
    PhasePair<K> v{std::vector<K>(P.n), std::vector<K>(P.n)};
    for (int i = 0; i < P.n; ++i) {
        v.pos[i] = g.mom[i] / denom;
        v.mom[i] = -g.pos[i] / denom;
    }
    return v;
}

// Chart transport: t = 1 - 1/s, lambda_i = 1 - q_i/s, mu_i = -s*p_i.
template <typename K>
PhasePoint<K> to_mpd(const PhasePoint<K>& x) {
    require(x.chart == Chart::S_CHART, "to_mpd: expected s-chart point");
    const K one = field<K>::one();
    require(!(x.time == field<K>::zero()) && !(x.time == one), "to_mpd: singular time");
    const K& s = x.time;
    PhasePoint<K> y;
    y.chart = Chart::T_CHART;
    y.time = one - one / s;
    y.pos.reserve(x.pos.size());
    y.mom.reserve(x.mom.size());
    for (size_t i = 0; i < x.pos.size(); ++i) {
        y.pos.push_back(one - x.pos[i] / s);
        y.mom.push_back(-s * x.mom[i]);
    }
    return y;
}

template <typename K>
PhasePoint<K> from_mpd(const PhasePoint<K>& y) {
    require(y.chart == Chart::T_CHART, "from_mpd: expected t-chart point");
    const K one = field<K>::one();
    require(!(y.time == field<K>::zero()) && !(y.time == one), "from_mpd: singular time");
    const K s = one / (one - y.time);
    PhasePoint<K> x;
    x.chart = Chart::S_CHART;
    x.time = s;
    x.pos.reserve(y.pos.size());
    x.mom.reserve(y.mom.size());
    for (size_t i = 0; i < y.pos.size(); ++i) {
        x.pos.push_back(s * (one - y.pos[i]));
        x.mom.push_back(-y.mom[i] / s);
    }
    return x;
}

// Reflection at the alpha_5 wall (n = 2 only): p_2 += alpha_5/(1-q_2),
// alpha_4 += alpha_5, alpha_5 -> -alpha_5.  Node 5 neighbours only node 4,
// so no other parameter moves and the weighted sum is preserved.  On the
// normalized surface the s-chart Hamiltonian shifts by -s*alpha_5*alpha_6,
// which is constant in (q, p) and so leaves the flow unchanged.
template <typename K>
std::pair<PhasePoint<K>, AlphaParams<K>> backlund_s5(const PhasePoint<K>& x,
                                                     const AlphaParams<K>& P) {
    require(P.n == 2, "backlund_s5: defined for n = 2");
    require(x.chart == Chart::S_CHART && x.n() == 2, "backlund_s5: expected n=2 s-chart point");
    const K one = field<K>::one();
    require(!(x.pos[1] == one), "backlund_s5: pole at q_2 = 1");
    const K a5 = P.alpha[5];
    PhasePoint<K> x2 = x;
    x2.mom[1] = x.mom[1] + a5 / (one - x.pos[1]);
    std::vector<K> a = P.alpha;
    a[4] = a[4] + a5;
    a[5] = -a5;
    return {std::move(x2), AlphaParams<K>::unchecked(2, std::move(a))};
}

// Pack (pos, mom) as a flat ODE state and build the flow RHS for rk45.
inline OdeState phase_state(const PhasePoint<Cplx>& x) {
    OdeState y(x.pos.begin(), x.pos.end());
    y.insert(y.end(), x.mom.begin(), x.mom.end());
    return y;
}

inline PhasePoint<Cplx> phase_of_state(Chart chart, const OdeState& y, double time) {
    require(y.size() % 2 == 0, "phase_of_state: odd state size");
    const size_t n = y.size() / 2;
    PhasePoint<Cplx> x;
    x.chart = chart;
    x.pos.assign(y.begin(), y.begin() + n);
    x.mom.assign(y.begin() + n, y.end());
    x.time = Cplx(time, 0);
    return x;
}

inline OdeRhs sasano_ode_rhs(const AlphaParams<Cplx>& P, Chart chart) {
    return [P, chart](double time, const OdeState& y, OdeState& dy) {
        const PhasePoint<Cplx> x = phase_of_state(chart, y, time);
        const PhasePair<Cplx> v = chart == Chart::S_CHART ? vfield_s(x, P) : vfield_t(x, P);
        dy.resize(y.size());
        const size_t n = v.pos.size();
        for (size_t i = 0; i < n; ++i) {
            dy[i] = v.pos[i];
            dy[n + i] = v.mom[i];
        }
    };
}

}  // namespace sasano
