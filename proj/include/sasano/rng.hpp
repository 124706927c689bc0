#pragma once

#include <cstdint>
#include <random>

#include "field.hpp"

namespace sasano {

// Deterministic random source. mt19937_64 has standard-mandated output, and
// all derived draws below avoid std::*_distribution (whose streams are
// implementation-defined), so identical seeds give identical values on every
// platform.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t u64() { return gen_(); }

    // Uniform on {lo, ..., hi} by rejection.
    long int_in(long lo, long hi) {
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return lo + static_cast<long>(x % span);
    }

    double real01() { return double(gen_() >> 11) * 0x1.0p-53; }

    double real_in(double lo, double hi) { return lo + (hi - lo) * real01(); }

    // Small rational with numerator in [-bound, bound] and denominator in
    // [1, bound]; never returns a value with |x| > bound.
    Rat rat(long bound = 9) {
        Rat r(int_in(-bound, bound), int_in(1, bound));
        r.canonicalize();
        return r;
    }

    Rat rat_nonzero(long bound = 9) {
        Rat r = rat(bound);
        while (sgn(r) == 0) r = rat(bound);
        return r;
    }

    Cplx cplx_in(double lo, double hi) { return Cplx(real_in(lo, hi), real_in(lo, hi)); }

    template <class K>
    K scalar(long bound = 9);

   private:
    std::mt19937_64 gen_;
};

template <>
inline Rat Rng::scalar<Rat>(long bound) {
    return rat(bound);
}

template <>
inline Cplx Rng::scalar<Cplx>(long bound) {
    double b = double(bound);
    return Cplx(real_in(-b, b), real_in(-b, b));
}

}  // namespace sasano
