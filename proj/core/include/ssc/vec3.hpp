#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace ssc {

template <class T>
using Vec3T = std::array<T, 3>;
using Vec3 = Vec3T<double>;

template <class T>
constexpr Vec3T<T> operator+(const Vec3T<T>& a, const Vec3T<T>& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
template <class T>
constexpr Vec3T<T> operator-(const Vec3T<T>& a, const Vec3T<T>& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
template <class T>
constexpr Vec3T<T> operator*(std::type_identity_t<T> s, const Vec3T<T>& a) {
    return {s * a[0], s * a[1], s * a[2]};
}
template <class T>
constexpr Vec3T<T> operator*(const Vec3T<T>& a, std::type_identity_t<T> s) {
    return s * a;
}
template <class T>
constexpr Vec3T<T> operator/(const Vec3T<T>& a, std::type_identity_t<T> s) {
    return {a[0] / s, a[1] / s, a[2] / s};
}

template <class T>
constexpr T dot(const Vec3T<T>& a, const Vec3T<T>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class T>
T norm(const Vec3T<T>& a) {
    using std::sqrt;
    return sqrt(dot(a, a));
}

template <class T>
bool all_finite(const Vec3T<T>& a) {
    using std::isfinite;
    return isfinite(a[0]) && isfinite(a[1]) && isfinite(a[2]);
}

template <class T, class U>
Vec3T<T> convert(const Vec3T<U>& a) {
    return {static_cast<T>(a[0]), static_cast<T>(a[1]), static_cast<T>(a[2])};
}

/// Orthonormal pair spanning the plane orthogonal to `n` (n need not be unit).
struct TangentFrame {
    Vec3 e1;
    Vec3 e2;
    Vec3 normal;  // unit
};

inline TangentFrame tangent_frame(const Vec3& n) {
    const Vec3 nu = n / norm(n);
    // pick the coordinate axis least aligned with n
    Vec3 seed{0.0, 0.0, 0.0};
    int k = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(nu[i]) < std::abs(nu[k])) k = i;
    }
    seed[k] = 1.0;
    Vec3 e1 = seed - dot(seed, nu) * nu;
    e1 = e1 / norm(e1);
    Vec3 e2 = cross(nu, e1);
    return {e1, e2, nu};
}

/// Axis-aligned domain box for dynamics and classification grids.
struct Box {
    Vec3 lo{-10.0, -10.0, -10.0};
    Vec3 hi{10.0, 10.0, 10.0};

    template <class T>
    [[nodiscard]] bool contains(const Vec3T<T>& u) const {
        for (int i = 0; i < 3; ++i) {
            if (!(u[i] >= static_cast<T>(lo[i]) && u[i] <= static_cast<T>(hi[i]))) return false;
        }
        return true;
    }
};

}  // namespace ssc
