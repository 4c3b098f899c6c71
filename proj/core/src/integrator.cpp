#include "ssc/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "ssc/errors.hpp"

namespace ssc {

namespace {

// Dormand-Prince tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

template <class T>
int sign(T v) {
    return (v > 0) - (v < 0);
}

struct EventState {
    bool armed = false;
    int ref_sign = 0;
};

}  // namespace

template <class T>
Vec3T<T> dp45_step(const BasicRhs<T>& f, const Vec3T<T>& u, const Vec3T<T>& k1, T h, const IntegratorOptions& opt,
                   T& err, Vec3T<T>* k_last) {
    using V = Vec3T<T>;
    const auto c = [](double v) { return static_cast<T>(v); };
    const V k2 = f(u + h * (c(a21) * k1));
    const V k3 = f(u + h * (c(a31) * k1 + c(a32) * k2));
    const V k4 = f(u + h * (c(a41) * k1 + c(a42) * k2 + c(a43) * k3));
    const V k5 = f(u + h * (c(a51) * k1 + c(a52) * k2 + c(a53) * k3 + c(a54) * k4));
    const V k6 = f(u + h * (c(a61) * k1 + c(a62) * k2 + c(a63) * k3 + c(a64) * k4 + c(a65) * k5));
    const V un = u + h * (c(b1) * k1 + c(b3) * k3 + c(b4) * k4 + c(b5) * k5 + c(b6) * k6);
    const V k7 = f(un);
    const V e = h * (c(e1) * k1 + c(e3) * k3 + c(e4) * k4 + c(e5) * k5 + c(e6) * k6 + c(e7) * k7);
    T acc = 0;
    for (int i = 0; i < 3; ++i) {
        using std::abs;
        const T sc = c(opt.atol) + c(opt.rtol) * std::max(abs(u[i]), abs(un[i]));
        acc += (e[i] / sc) * (e[i] / sc);
    }
    using std::sqrt;
    err = sqrt(acc / 3);
    if (k_last) *k_last = k7;
    return un;
}

template <class T>
BasicFlowResult<T> integrate(const BasicRhs<T>& f, const Vec3T<T>& u0, T t_max, std::span<const BasicEvent<T>> events,
                             const IntegratorOptions& opt, const Box& domain,
                             const std::function<Vec3T<T>(const Vec3T<T>&)>& project) {
    using V = Vec3T<T>;
    using std::abs;
    const T tol_event = static_cast<T>(opt.tol_event);
    BasicFlowResult<T> res;
    res.t.push_back(0);
    res.u.push_back(u0);
    if (!all_finite(u0)) throw Error(ErrorCode::NonFinite, "initial point is not finite");

    std::vector<EventState> st(events.size());
    std::vector<T> gvals(events.size(), T(0));
    for (std::size_t i = 0; i < events.size(); ++i) {
        const T g0 = events[i].fn(u0);
        if (!events[i].require_departure || abs(g0) > tol_event) {
            st[i].armed = true;
            st[i].ref_sign = sign(g0);
        }
    }

    V u = u0;
    T t = 0;
    V k1 = f(u);
    T h = static_cast<T>(opt.h_init);
    const T h_max = static_cast<T>(opt.h_max);
    const T h_min = static_cast<T>(opt.h_min);
    if (h <= 0) {
        const T fu = norm(k1);
        h = fu > 0 ? T(1e-3) * std::max(norm(u), T(1e-2)) / fu : h_max;
        h = std::clamp(h, T(1e-8), h_max);
    }

    auto push = [&](T tt, const V& uu) {
        if (opt.record || res.t.size() < 2) {
            res.t.push_back(tt);
            res.u.push_back(uu);
        } else {
            res.t.back() = tt;
            res.u.back() = uu;
        }
    };

    // substep of length tau from (u, k1), projected
    auto sub = [&](T tau) {
        T e = 0;
        V v = dp45_step(f, u, k1, tau, opt, e);
        if (project) v = project(v);
        return v;
    };

    while (t < t_max) {
        if (res.steps >= opt.max_steps) throw Error(ErrorCode::StepFailure, "step budget exhausted");
        bool last = false;
        if (t + h >= t_max) {
            h = t_max - t;
            last = true;
        }
        T err = 0;
        V k7;
        V un = dp45_step(f, u, k1, h, opt, err, &k7);
        if (!all_finite(un) || !std::isfinite(err)) {
            h *= T(0.25);
            if (h < h_min) throw Error(ErrorCode::NonFinite, "state overflowed");
            continue;
        }
        if (err > 1) {
            h *= std::max(T(0.2), T(0.9) * std::pow(err, T(-0.2)));
            if (h < h_min) throw Error(ErrorCode::StepFailure, "step size underflow");
            continue;
        }
        ++res.steps;
        if (project) {
            un = project(un);
            k7 = f(un);
        }

        // events: earliest localized root inside the step wins
        int hit = -1;
        T hit_tau = h;
        V hit_u = un;
        for (std::size_t i = 0; i < events.size(); ++i) {
            const T gn = events[i].fn(un);
            gvals[i] = gn;
            if (!st[i].armed) continue;
            const bool at_end = abs(gn) < tol_event;
            if (!at_end && sign(gn) == st[i].ref_sign) continue;
            T lo = 0;
            T hi = h;
            T tau = h;
            V ut = un;
            if (!at_end) {
                for (int it = 0; it < 200; ++it) {
                    tau = (lo + hi) / 2;
                    ut = sub(tau);
                    const T gt = events[i].fn(ut);
                    if (abs(gt) < tol_event) break;
                    if (sign(gt) == st[i].ref_sign) {
                        lo = tau;
                    } else {
                        hi = tau;
                    }
                    if (hi - lo <= 4 * std::numeric_limits<T>::epsilon() * std::max(T(1), t + hi)) {
                        tau = hi;
                        ut = sub(hi);
                        break;
                    }
                }
            }
            if (tau < hit_tau || hit < 0) {
                hit = static_cast<int>(i);
                hit_tau = tau;
                hit_u = ut;
            }
        }
        if (hit >= 0) {
            push(t + hit_tau, hit_u);
            res.stop = StopReason::Event;
            res.event = hit;
            return res;
        }

        t = last ? t_max : t + h;
        u = un;
        k1 = k7;
        push(t, u);
        if (!domain.contains(u)) {
            res.stop = StopReason::DomainExit;
            return res;
        }
        for (std::size_t i = 0; i < events.size(); ++i) {
            const T g = gvals[i];
            if (!st[i].armed && abs(g) > tol_event) st[i].armed = true;
            if (st[i].armed && g != 0) st[i].ref_sign = sign(g);
        }
        const T fac = err > 0 ? std::min(T(5), T(0.9) * std::pow(err, T(-0.2))) : T(5);
        h = std::min(h * fac, h_max);
    }
    res.stop = StopReason::TimeOut;
    return res;
}

#define SSC_INSTANTIATE(T)                                                                                    \
    template Vec3T<T> dp45_step<T>(const BasicRhs<T>&, const Vec3T<T>&, const Vec3T<T>&, T,                    \
                                   const IntegratorOptions&, T&, Vec3T<T>*);                                    \
    template BasicFlowResult<T> integrate<T>(const BasicRhs<T>&, const Vec3T<T>&, T,                           \
                                             std::span<const BasicEvent<T>>, const IntegratorOptions&,          \
                                             const Box&, const std::function<Vec3T<T>(const Vec3T<T>&)>&);

SSC_INSTANTIATE(double)
SSC_INSTANTIATE(long double)
#undef SSC_INSTANTIATE

}  // namespace ssc
