#pragma once

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sasano {

using Rat = mpq_class;
using Cplx = std::complex<double>;

// Field-level dispatch: exact fields compare against literal zero, floating
// fields carry a tolerance. Generic code below never branches on the type
// directly, only through these traits.
template <class K>
struct field;

template <>
struct field<Rat> {
    static constexpr bool exact = true;
    static Rat zero() { return Rat(0); }
    static Rat one() { return Rat(1); }
    static Rat of(long n) { return Rat(n); }
    static Rat ratio(long num, long den) {
        Rat r(num, den);
        r.canonicalize();
        return r;
    }
    static bool is_zero(const Rat& x, double = 0.0) { return sgn(x) == 0; }
    static double mag(const Rat& x) { return std::fabs(x.get_d()); }
    static Cplx to_cplx(const Rat& x) { return Cplx(x.get_d(), 0.0); }
    static std::string str(const Rat& x) { return x.get_str(); }
};

template <>
struct field<Cplx> {
    static constexpr bool exact = false;
    static Cplx zero() { return Cplx(0.0, 0.0); }
    static Cplx one() { return Cplx(1.0, 0.0); }
    static Cplx of(long n) { return Cplx(double(n), 0.0); }
    static Cplx ratio(long num, long den) { return Cplx(double(num) / double(den), 0.0); }
    static bool is_zero(const Cplx& x, double tol = 1e-12) { return std::abs(x) <= tol; }
    static double mag(const Cplx& x) { return std::abs(x); }
    static Cplx to_cplx(const Cplx& x) { return x; }
    static std::string str(const Cplx& x) {
        std::ostringstream os;
        os.precision(17);
        os << x.real();
        if (x.imag() != 0.0) os << (x.imag() > 0 ? "+" : "") << x.imag() << "i";
        return os.str();
    }
};

template <class K>
inline bool near(const K& a, const K& b, double tol = 1e-12) {
    K d = a - b;
    return field<K>::is_zero(d, tol);
}

struct math_error : std::runtime_error {
    explicit math_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw math_error(what);
}

}  // namespace sasano
