#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace ssc {

/// Chebyshev interpolant on [a, b] through n first-kind nodes.
class Chebyshev {
public:
    Chebyshev() = default;

    Chebyshev(const std::function<double(double)>& f, double a, double b, int n) : a_(a), b_(b) {
        std::vector<double> fx(n);
        for (int k = 0; k < n; ++k) fx[k] = f(node(k, n));
        fit(fx);
    }

    /// Nodes in [a, b], k = 0..n-1, in decreasing order.
    [[nodiscard]] static double node(double a, double b, int k, int n) {
        const double t = std::cos(std::numbers::pi * (k + 0.5) / n);
        return 0.5 * (a + b) + 0.5 * (b - a) * t;
    }
    [[nodiscard]] double node(int k, int n) const { return node(a_, b_, k, n); }

    static Chebyshev from_values(const std::vector<double>& fx, double a, double b) {
        Chebyshev c;
        c.a_ = a;
        c.b_ = b;
        c.fit(fx);
        return c;
    }

    [[nodiscard]] double operator()(double x) const { return clenshaw(coef_, to_unit(x)); }

    [[nodiscard]] double derivative(double x) const { return clenshaw(dcoef_, to_unit(x)) * 2.0 / (b_ - a_); }

    [[nodiscard]] double lo() const { return a_; }
    [[nodiscard]] double hi() const { return b_; }
    [[nodiscard]] const std::vector<double>& coefficients() const { return coef_; }

private:
    [[nodiscard]] double to_unit(double x) const { return (2.0 * x - a_ - b_) / (b_ - a_); }

    static double clenshaw(const std::vector<double>& c, double t) {
        double b1 = 0.0;
        double b2 = 0.0;
        for (std::size_t j = c.size(); j-- > 1;) {
            const double tmp = 2.0 * t * b1 - b2 + c[j];
            b2 = b1;
            b1 = tmp;
        }
        return t * b1 - b2 + (c.empty() ? 0.0 : c[0]);
    }

    void fit(const std::vector<double>& fx) {
        const int n = static_cast<int>(fx.size());
        coef_.assign(n, 0.0);
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += fx[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
            coef_[j] = (j == 0 ? 1.0 : 2.0) * s / n;
        }
        // derivative series: c'_{j-1} = c'_{j+1} + 2 j c_j
        dcoef_.assign(std::max(n - 1, 1), 0.0);
        if (n >= 2) {
            std::vector<double> d(n + 1, 0.0);
            for (int j = n - 1; j >= 1; --j) d[j - 1] = d[j + 1] + 2.0 * j * coef_[j];
            d[0] *= 0.5;
            dcoef_.assign(d.begin(), d.begin() + (n - 1));
        }
    }

    double a_ = -1.0;
    double b_ = 1.0;
    std::vector<double> coef_;
    std::vector<double> dcoef_;
};

}  // namespace ssc
