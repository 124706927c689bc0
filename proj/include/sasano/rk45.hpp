#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "field.hpp"

namespace sasano {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-13;
    long max_steps = 2000000;
};

using OdeState = std::vector<Cplx>;
using OdeRhs = std::function<void(double, const OdeState&, OdeState&)>;

// Dormand-Prince 5(4) embedded pair with a standard proportional step
// controller. Requested sample times are hit exactly by clamping the step.
class Dopri5 {
   public:
    Dopri5(OdeRhs rhs, OdeOptions opts = {}) : f_(std::move(rhs)), o_(opts) {}

    // Integrates from t0 through the (strictly monotone) sample times,
    // invoking on_sample at each; the initial point is not reported.
    void integrate(double t0, OdeState y, const std::vector<double>& samples,
                   const std::function<void(double, const OdeState&)>& on_sample) {
        double t = t0;
        double h = o_.h_init;
        long steps = 0;
        size_t n = y.size();
        OdeState k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n), err(n);
        for (double target : samples) {
            double dir = target > t ? 1.0 : -1.0;
            if (std::fabs(h) < o_.h_min || (h > 0) != (dir > 0)) h = dir * std::max(std::fabs(h), 1e-6);
            while (dir * (target - t) > 0) {
                require(++steps <= o_.max_steps, "ode: step limit exceeded");
                if (dir * (t + h - target) > 0) h = target - t;
                f_(t, y, k1);
                stage(y, ytmp, h, {{1.0 / 5, &k1}});
                f_(t + h / 5, ytmp, k2);
                stage(y, ytmp, h, {{3.0 / 40, &k1}, {9.0 / 40, &k2}});
                f_(t + 3 * h / 10, ytmp, k3);
                stage(y, ytmp, h, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}});
                f_(t + 4 * h / 5, ytmp, k4);
                stage(y, ytmp, h,
                      {{19372.0 / 6561, &k1}, {-25360.0 / 2187, &k2}, {64448.0 / 6561, &k3}, {-212.0 / 729, &k4}});
                f_(t + 8 * h / 9, ytmp, k5);
                stage(y, ytmp, h,
                      {{9017.0 / 3168, &k1},
                       {-355.0 / 33, &k2},
                       {46732.0 / 5247, &k3},
                       {49.0 / 176, &k4},
                       {-5103.0 / 18656, &k5}});
                f_(t + h, ytmp, k6);
                stage(y, y1, h,
                      {{35.0 / 384, &k1},
                       {500.0 / 1113, &k3},
                       {125.0 / 192, &k4},
                       {-2187.0 / 6784, &k5},
                       {11.0 / 84, &k6}});
                f_(t + h, y1, k7);
                double enorm = 0.0;
                for (size_t i = 0; i < n; ++i) {
                    Cplx e = h * (71.0 / 57600 * k1[i] - 71.0 / 16695 * k3[i] + 71.0 / 1920 * k4[i] -
                                  17253.0 / 339200 * k5[i] + 22.0 / 525 * k6[i] - 1.0 / 40 * k7[i]);
                    double sc = o_.atol + o_.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
                    double q = std::abs(e) / sc;
                    enorm += q * q;
                }
                enorm = std::sqrt(enorm / double(n));
                if (enorm <= 1.0) {
                    t = t + h;
                    y.swap(y1);
                }
                double fac = enorm > 0 ? 0.9 * std::pow(enorm, -0.2) : 5.0;
                fac = std::min(5.0, std::max(0.2, fac));
                h *= fac;
                require(std::fabs(h) >= o_.h_min, "ode: step size underflow");
            }
            on_sample(t, y);
        }
    }

   private:
    static void stage(const OdeState& y, OdeState& out, double h,
                      std::initializer_list<std::pair<double, const OdeState*>> terms) {
        out = y;
        for (const auto& [c, k] : terms)
            for (size_t i = 0; i < y.size(); ++i) out[i] += h * c * (*k)[i];
    }

    OdeRhs f_;
    OdeOptions o_;
};

}  // namespace sasano
