#pragma once

// Dormand-Prince 5(4) for autonomous fields on R^3 with sign-change events.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "ssc/vec3.hpp"

namespace ssc {

template <class T>
using BasicRhs = std::function<Vec3T<T>(const Vec3T<T>&)>;
template <class T>
using BasicScalarFn = std::function<T(const Vec3T<T>&)>;

using Rhs = BasicRhs<double>;
using ScalarFn = BasicScalarFn<double>;
/// Optional post-step correction (e.g. projection back onto a manifold).
using Projector = std::function<Vec3(const Vec3&)>;

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;  // 0 selects a starting step automatically
    double h_min = 1e-14;
    double h_max = 0.25;
    std::size_t max_steps = 5'000'000;
    double tol_event = 1e-12;
    bool record = true;  // false keeps only the first and last sample
};

/// Terminal event on a scalar function. With `require_departure` the event
/// is armed only after |fn| has exceeded tol_event once, which excludes a
/// root sitting at the initial point.
template <class T>
struct BasicEvent {
    BasicScalarFn<T> fn;
    bool require_departure = true;
};
using Event = BasicEvent<double>;

enum class StopReason { Event, TimeOut, DomainExit };

template <class T>
struct BasicFlowResult {
    std::vector<T> t;
    std::vector<Vec3T<T>> u;
    StopReason stop = StopReason::TimeOut;
    int event = -1;  // index into the event list when stop == Event
    std::size_t steps = 0;

    [[nodiscard]] const Vec3T<T>& end() const { return u.back(); }
    [[nodiscard]] T end_time() const { return t.back(); }
};
using FlowResult = BasicFlowResult<double>;

/// One embedded step; returns the 5th order solution and writes the scaled
/// error norm into `err`.
template <class T>
Vec3T<T> dp45_step(const BasicRhs<T>& f, const Vec3T<T>& u, const Vec3T<T>& k1, T h, const IntegratorOptions& opt,
                   T& err, Vec3T<T>* k_last = nullptr);

/// Integrate u' = f(u) from u0 for at most t_max (elapsed time). Throws
/// StepFailure when the step size underflows or the step budget is spent,
/// NonFinite on overflow.
/// Instantiated for double and long double; the latter serves flights whose
/// endpoint must be resolved below double rounding of the path.
template <class T>
BasicFlowResult<T> integrate(const BasicRhs<T>& f, const Vec3T<T>& u0, T t_max, std::span<const BasicEvent<T>> events,
                             const IntegratorOptions& opt, const Box& domain,
                             const std::function<Vec3T<T>(const Vec3T<T>&)>& project = {});

inline FlowResult integrate(const Rhs& f, const Vec3& u0, double t_max, std::span<const Event> events,
                            const IntegratorOptions& opt, const Box& domain, const Projector& project = {}) {
    return integrate<double>(f, u0, t_max, events, opt, domain, project);
}

}  // namespace ssc
