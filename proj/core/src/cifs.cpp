#include "ssc/cifs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "ssc/errors.hpp"

namespace ssc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Absolute coordinates are trusted while an interval spans many ulps of its midpoint.
bool resolved(double mid, double half) { return half > 1e-6 * std::abs(mid); }

ContractionMap affine(double slope, double offset, Interval K, std::string tag, int side, int index) {
    ContractionMap f;
    f.eval = [slope, offset](double x) { return slope * x + offset; };
    f.deriv = [slope](double) { return slope; };
    const double a = slope * K.lo + offset;
    const double b = slope * K.hi + offset;
    f.image = {std::min(a, b), std::max(a, b)};
    f.b = f.c = std::abs(slope);
    f.increasing = slope > 0.0;
    f.tag = std::move(tag);
    f.side = side;
    f.index = index;
    return f;
}

bool indexed(const IfsSystem& sys) {
    return std::any_of(sys.maps.begin(), sys.maps.end(), [](const ContractionMap& f) { return f.index > 0; });
}

int first_index(const IfsSystem& sys) {
    int i = std::numeric_limits<int>::max();
    for (const auto& f : sys.maps)
        if (f.index > 0) i = std::min(i, f.index);
    return i;
}

int index_count(const IfsSystem& sys) {
    if (!indexed(sys)) return static_cast<int>(sys.maps.size());
    int lo = std::numeric_limits<int>::max(), hi = 0;
    for (const auto& f : sys.maps) {
        if (f.index <= 0) continue;
        lo = std::min(lo, f.index);
        hi = std::max(hi, f.index);
    }
    return hi - lo + 1;
}

std::uint64_t ipow(std::uint64_t m, int e) {
    std::uint64_t r = 1;
    for (int i = 0; i < e; ++i) r *= m;
    return r;
}

}  // namespace

// fixtures

IfsSystem make_middle_thirds(Interval K) {
    if (!(K.hi > K.lo)) throw Error(ErrorCode::ParameterInfeasible, "empty interval K");
    const double L = K.length();
    IfsSystem sys;
    sys.K = K;
    sys.maps.push_back(affine(1.0 / 3.0, K.lo - K.lo / 3.0, K, "f1", 0, 0));
    sys.maps.push_back(affine(1.0 / 3.0, K.lo - K.lo / 3.0 + 2.0 * L / 3.0, K, "f2", 0, 0));
    return sys;
}

IfsSystem make_equal_ratio(int k, double c, Interval K) {
    if (k < 1) throw Error(ErrorCode::ParameterInfeasible, "need at least one map");
    if (!(c > 0.0 && c < 1.0)) throw Error(ErrorCode::ParameterInfeasible, "ratio must lie in (0, 1)");
    if (k * c > 1.0 + 1e-15) throw Error(ErrorCode::ParameterInfeasible, "images do not fit in K");
    if (!(K.hi > K.lo)) throw Error(ErrorCode::ParameterInfeasible, "empty interval K");
    const double L = K.length();
    const double gap = k > 1 ? std::max(0.0, L - k * c * L) / (k - 1) : 0.0;
    IfsSystem sys;
    sys.K = K;
    for (int j = 0; j < k; ++j) {
        const double start = k > 1 ? K.lo + j * (c * L + gap) : K.lo + 0.5 * (L - c * L);
        sys.maps.push_back(affine(c, start - c * K.lo, K, "f" + std::to_string(j + 1), 0, 0));
    }
    return sys;
}

IfsSystem make_geometric_model(double a, double lambda, int i_min, int i_max) {
    if (!(lambda > 1.0)) throw Error(ErrorCode::ParameterInfeasible, "lambda must exceed 1");
    if (!(a > 0.0)) throw Error(ErrorCode::ParameterInfeasible, "a must be positive");
    if (i_min < 1 || i_max < i_min) throw Error(ErrorCode::ParameterInfeasible, "need 1 <= i_min <= i_max");
    const double first = std::pow(lambda, -i_min);
    if (2.0 * a * first / (1.0 - 1.0 / lambda) >= 1.0)
        throw Error(ErrorCode::ParameterInfeasible, "images cannot be placed disjointly for a=" + fmt(a) +
                                                        ", lambda=" + fmt(lambda));
    const double m = std::pow(lambda, i_min) - 2.0 * a;
    const Interval K{-1.0, 1.0};
    IfsSystem sys;
    sys.K = K;
    for (int side : {-1, 1}) {
        for (int i = i_min; i <= i_max; ++i) {
            const double s = std::pow(lambda, -i);
            // side * s * (m + a (x + 1))
            sys.maps.push_back(affine(side * s * a, side * s * (m + a), K,
                                      std::string(side < 0 ? "L" : "R") + std::to_string(i), side, i));
        }
    }
    sys.tail = TailModel{lambda / a, lambda, i_max};
    return sys;
}

// conditions

bool ConditionReport::passed() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const ConditionResult& c) { return c.passed; });
}

ConditionReport assess_conditions(const IfsSystem& sys, int samples) {
    if (sys.maps.empty()) throw Error(ErrorCode::DegenerateSystem, "system has no maps");
    samples = std::max(samples, 3);
    const Interval K = sys.K;
    std::vector<double> xs(samples);
    for (int j = 0; j < samples; ++j) xs[j] = K.lo + K.length() * j / (samples - 1);

    ConditionReport rep;
    auto add = [&](const char* id, bool ok, std::string detail) {
        rep.conditions.push_back({id, ok, std::move(detail)});
    };

    {  // C1: injective self-map of K
        std::string bad;
        for (const auto& f : sys.maps) {
            const double slack = 1e-12 * K.length();
            if (f.image.lo < K.lo - slack || f.image.hi > K.hi + slack) {
                bad = f.tag + " image leaves K";
                break;
            }
            double prev = f.eval(xs[0]);
            for (int j = 0; j < samples && bad.empty(); ++j) {
                const double y = f.eval(xs[j]);
                if (!std::isfinite(y) || y < f.image.lo - slack || y > f.image.hi + slack)
                    bad = f.tag + " leaves its image at x=" + fmt(xs[j]);
                else if (j > 0 && (f.increasing ? y <= prev : y >= prev))
                    bad = f.tag + " not strictly monotone near x=" + fmt(xs[j]);
                prev = y;
            }
            if (!bad.empty()) break;
        }
        add("C1", bad.empty(), bad.empty() ? "monotone on samples" : bad);
    }
    {  // C2: uniform contraction with bilateral bounds
        std::string bad;
        double s = 0.0;
        for (const auto& f : sys.maps) {
            s = std::max(s, f.c);
            if (!(f.b > 0.0) || !(f.c < 1.0) || f.b > f.c) {
                bad = f.tag + " has bounds b=" + fmt(f.b) + ", c=" + fmt(f.c);
                break;
            }
            for (int j = 0; j + 1 < samples && bad.empty(); ++j) {
                const double slope = f.deriv ? std::abs(f.deriv(xs[j]))
                                             : std::abs(f.eval(xs[j + 1]) - f.eval(xs[j])) / (xs[j + 1] - xs[j]);
                if (slope < f.b * (1.0 - 1e-9) || slope > f.c * (1.0 + 1e-9))
                    bad = f.tag + " slope " + fmt(slope) + " outside [b, c] at x=" + fmt(xs[j]);
            }
            if (!bad.empty()) break;
        }
        add("C2", bad.empty(), bad.empty() ? "s=" + fmt(s) : bad);
    }
    {  // C3: open set condition
        std::vector<std::size_t> order = image_order(sys);
        std::string bad;
        for (std::size_t j = 0; j + 1 < order.size(); ++j) {
            const auto& f = sys.maps[order[j]];
            const auto& g = sys.maps[order[j + 1]];
            if (f.image.hi > g.image.lo) {
                bad = f.tag + " and " + g.tag + " overlap near " + fmt(g.image.lo);
                break;
            }
        }
        add("C3", bad.empty(), bad.empty() ? "images disjoint" : bad);
    }
    {  // C4
        auto it = std::find_if(sys.maps.begin(), sys.maps.end(), [](const ContractionMap& f) { return !f.deriv; });
        add("C4", it == sys.maps.end(), it == sys.maps.end() ? "derivatives present" : it->tag + " has no derivative");
    }
    add("C5", true, "density 1/2");
    {  // C6: Hoelder surrogate |f'(x)| - |f'(y)| against |x - y|^alpha
        std::vector<double> lx, ly;
        double worst = 0.0;
        for (const auto& f : sys.maps) {
            if (!f.deriv) continue;
            std::vector<double> d(samples);
            for (int j = 0; j < samples; ++j) d[j] = std::abs(f.deriv(xs[j]));
            for (int j = 0; j < samples; ++j)
                for (int l = j + 1; l < samples; ++l) {
                    const double dd = std::abs(d[j] - d[l]);
                    worst = std::max(worst, dd);
                    if (dd > 64.0 * kEps * std::max(d[j], d[l])) {
                        lx.push_back(std::log(xs[l] - xs[j]));
                        ly.push_back(std::log(dd));
                    }
                }
        }
        bool ok = true;
        if (lx.size() >= 3) {
            const double n = static_cast<double>(lx.size());
            const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
            const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
            double sxx = 0.0, sxy = 0.0;
            for (std::size_t j = 0; j < lx.size(); ++j) {
                sxx += (lx[j] - mx) * (lx[j] - mx);
                sxy += (lx[j] - mx) * (ly[j] - my);
            }
            const double alpha = sxx > 0.0 ? sxy / sxx : 0.0;
            double L = 1.0;
            if (alpha > 0.0)
                for (std::size_t j = 0; j < lx.size(); ++j) L = std::max(L, std::exp(ly[j] - alpha * lx[j]));
            rep.holder_alpha = alpha;
            rep.holder_L = L;
            ok = std::isfinite(alpha) && alpha > 0.0 && std::isfinite(L);
        }
        add("C6", ok, "alpha=" + fmt(rep.holder_alpha) + ", L=" + fmt(rep.holder_L));
    }
    return rep;
}

ConditionReport check_conditions(const IfsSystem& sys, int samples) {
    ConditionReport rep = assess_conditions(sys, samples);
    for (const auto& c : rep.conditions)
        if (!c.passed) throw Error(ErrorCode::ConditionViolated, c.id + ": " + c.detail);
    return rep;
}

// dimension

double moran_root(const std::vector<double>& ratios) {
    if (ratios.empty()) throw Error(ErrorCode::DegenerateSystem, "no ratios");
    for (double r : ratios)
        if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorCode::DegenerateSystem, "ratio " + fmt(r) + " not in (0, 1]");
    if (ratios.size() == 1) return 0.0;
    auto excess = [&](double u) {
        double s = 0.0;
        for (double r : ratios) s += std::exp(u * std::log(r));
        return s - 1.0;
    };
    double lo = 0.0, hi = 1.0;
    while (excess(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw Error(ErrorCode::DegenerateSystem, "Moran sum does not fall below 1");
    }
    for (int it = 0; it < 2000 && hi - lo > 2.0 * kEps * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

MoranBounds moran_bounds(const IfsSystem& sys) {
    if (sys.maps.empty()) throw Error(ErrorCode::DegenerateSystem, "system has no maps");
    std::vector<double> b, c;
    for (const auto& f : sys.maps) {
        b.push_back(f.b);
        c.push_back(f.c);
    }
    return {moran_root(b), moran_root(c)};
}

PositiveWitness dimension_positive(const IfsSystem& sys) {
    if (sys.maps.size() < 2) throw Error(ErrorCode::InsufficientMaps, "need two maps");
    std::vector<std::size_t> idx(sys.maps.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return sys.maps[x].b > sys.maps[y].b; });
    PositiveWitness w;
    w.first = std::min(idx[0], idx[1]);
    w.second = std::max(idx[0], idx[1]);
    w.b = sys.maps[idx[1]].b;
    if (!(w.b > 0.0)) throw Error(ErrorCode::DegenerateSystem, "lower derivative bound is zero");
    if (w.b >= 1.0) {
        w.bound = 1.0;
        w.capped = true;
        return w;
    }
    w.bound = std::log(2.0) / -std::log(w.b);
    if (w.bound > 1.0) {
        w.bound = 1.0;
        w.capped = true;
    }
    return w;
}

IfsSystem truncate(const IfsSystem& sys, int n) {
    IfsSystem out;
    out.K = sys.K;
    if (indexed(sys)) {
        const int i0 = first_index(sys);
        for (const auto& f : sys.maps)
            if (f.index > 0 && f.index < i0 + n) out.maps.push_back(f);
    } else {
        for (int j = 0; j < n && j < static_cast<int>(sys.maps.size()); ++j) out.maps.push_back(sys.maps[j]);
    }
    return out;
}

std::vector<TruncationPoint> dimension_sup(const IfsSystem& sys, const std::vector<int>& schedule) {
    std::vector<int> sizes = schedule;
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    std::vector<TruncationPoint> out;
    for (int n : sizes) {
        if (n < 1) continue;
        const IfsSystem sub = truncate(sys, n);
        if (sub.maps.empty()) continue;
        const double s = moran_bounds(sub).s;
        if (!out.empty() && s < out.back().lower - 1e-12)
            throw Error(ErrorCode::NonMonotone, "lower bound drops from " + fmt(out.back().lower) + " to " + fmt(s) +
                                                    " at size " + std::to_string(n));
        out.push_back({n, s});
    }
    return out;
}

double pressure(const IfsSystem& sys, double t) {
    if (!(t > 0.0)) throw Error(ErrorCode::DegenerateSystem, "pressure needs t > 0");
    double p = 0.0;
    for (const auto& f : sys.maps) p += std::exp(t * std::log(f.c));
    if (sys.tail) {
        const TailModel& T = *sys.tail;
        if (!(T.lambda > 1.0)) throw Error(ErrorCode::TailDiverges, "tail lambda=" + fmt(T.lambda));
        const double ll = std::log(T.lambda);
        p += 2.0 * std::exp(-t * (std::log(T.A) + T.i_max * ll)) / -std::expm1(-t * ll);
    }
    return p;
}

double pressure_root(const IfsSystem& sys) {
    const double p1 = pressure(sys, 1.0);
    if (p1 >= 1.0) throw Error(ErrorCode::NoRootInUnitInterval, "P(1)=" + fmt(p1));
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 2000 && hi - lo > 2.0 * kEps * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (pressure(sys, mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

DimensionReport dimension_report(const IfsSystem& sys, const std::vector<int>& schedule) {
    DimensionReport rep;
    const MoranBounds mb = moran_bounds(sys);
    rep.moran_lower = mb.s;
    rep.moran_upper_listed = mb.t;
    rep.moran_upper = mb.t;
    if (sys.tail) {
        try {
            rep.pressure_root = pressure_root(sys);
            rep.moran_upper = std::max(mb.t, *rep.pressure_root);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoRootInUnitInterval) throw;
            rep.moran_upper = 1.0;
            rep.note = "pressure has no root in (0, 1]";
        }
    } else if (sys.maps.size() > 1 && pressure(sys, 1.0) < 1.0) {
        rep.pressure_root = pressure_root(sys);
    }
    auto cap = [&](double& v) {
        if (v > 1.0) {
            v = 1.0;
            rep.capped = true;
        }
    };
    cap(rep.moran_lower);
    cap(rep.moran_upper);
    cap(rep.moran_upper_listed);
    if (rep.capped && rep.note.empty()) rep.note = "clamped to the ambient dimension 1";
    if (!schedule.empty()) rep.truncation_schedule = dimension_sup(sys, schedule);
    return rep;
}

// covers

void map_interval(const ContractionMap& f, double mid, double half, double& out_mid, double& out_half) {
    if (resolved(mid, half)) {
        const double a = f.eval(mid - half);
        const double b = f.eval(mid + half);
        out_mid = 0.5 * (a + b);
        out_half = 0.5 * std::abs(b - a);
    } else {
        out_mid = f.eval(mid);
        out_half = (f.deriv ? std::abs(f.deriv(mid)) : f.c) * half;
    }
}

std::vector<std::size_t> image_order(const IfsSystem& sys) {
    std::vector<std::size_t> order(sys.maps.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sys.maps[x].image.lo < sys.maps[y].image.lo; });
    return order;
}

double CoverSet::total_length() const {
    double s = 0.0;
    for (double h : half) s += 2.0 * h;
    return s;
}

std::optional<std::size_t> CoverSet::find(double x, double slack) const {
    if (mid.empty()) return std::nullopt;
    const std::size_t n = size();
    // first interval whose lower end exceeds x + slack
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
        const std::size_t m = (lo + hi) / 2;
        if (this->lo(m) <= x + slack)
            lo = m + 1;
        else
            hi = m;
    }
    if (lo == 0) return std::nullopt;
    const std::size_t i = lo - 1;
    if (x <= this->hi(i) + slack) return i;
    return std::nullopt;
}

double CoverSet::endpoint_distance(double x) const {
    if (mid.empty()) return std::numeric_limits<double>::infinity();
    const std::size_t n = size();
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
        const std::size_t m = (lo + hi) / 2;
        if (mid[m] <= x)
            lo = m + 1;
        else
            hi = m;
    }
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i : {lo == 0 ? 0 : lo - 1, std::min(lo, n - 1)})
        d = std::min({d, std::abs(x - this->lo(i)), std::abs(x - this->hi(i))});
    return d;
}

CoverSequence attractor_levels(const IfsSystem& sys, int k, std::size_t budget) {
    if (sys.maps.empty()) throw Error(ErrorCode::DegenerateSystem, "system has no maps");
    CoverSequence seq;
    if (k < 1) return seq;
    const std::vector<std::size_t> order = image_order(sys);
    const std::size_t m = order.size();

    CoverSet prev;
    prev.level = 0;
    prev.branching = m;
    prev.mid = {sys.K.mid()};
    prev.half = {0.5 * sys.K.length()};
    prev.rel_lo = {0.0};
    prev.rel_hi = {1.0};

    for (int level = 1; level <= k; ++level) {
        const std::size_t N = prev.size();
        if (m * N > budget) {
            seq.overflow = true;
            break;
        }
        CoverSet next;
        next.level = level;
        next.branching = m;
        next.mid.resize(m * N);
        next.half.resize(m * N);
        next.rel_lo.resize(m * N);
        next.rel_hi.resize(m * N);
        for (std::size_t r = 0; r < m; ++r) {
            const ContractionMap& f = sys.maps[order[r]];
            for (std::size_t src = 0; src < N; ++src) {
                const std::size_t idx = r * N + (f.increasing ? src : N - 1 - src);
                map_interval(f, prev.mid[src], prev.half[src], next.mid[idx], next.half[idx]);
            }
        }
        for (std::size_t idx = 0; idx < m * N; ++idx) {
            const std::size_t p = idx / m;
            if (level == 1) {
                next.rel_lo[idx] = (next.lo(idx) - sys.K.lo) / sys.K.length();
                next.rel_hi[idx] = (next.hi(idx) - sys.K.lo) / sys.K.length();
            } else if (resolved(prev.mid[p], prev.half[p])) {
                const double w = 2.0 * prev.half[p];
                next.rel_lo[idx] = (next.lo(idx) - prev.lo(p)) / w;
                next.rel_hi[idx] = (next.hi(idx) - prev.lo(p)) / w;
            } else {
                // same relative placement as the source inside its parent, mirrored by decreasing maps
                const std::size_t r = idx / N;
                const ContractionMap& f = sys.maps[order[r]];
                const std::size_t j = idx % N;
                const std::size_t src = f.increasing ? j : N - 1 - j;
                if (f.increasing) {
                    next.rel_lo[idx] = prev.rel_lo[src];
                    next.rel_hi[idx] = prev.rel_hi[src];
                } else {
                    next.rel_lo[idx] = 1.0 - prev.rel_hi[src];
                    next.rel_hi[idx] = 1.0 - prev.rel_lo[src];
                }
            }
        }
        seq.levels.push_back(next);
        prev = std::move(next);
    }
    return seq;
}

CoverSet attractor_iterate(const IfsSystem& sys, int k, std::size_t budget, bool* overflow) {
    CoverSequence seq = attractor_levels(sys, k, budget);
    if (overflow) *overflow = seq.overflow;
    if (seq.levels.empty()) {
        CoverSet base;
        base.branching = sys.maps.size();
        base.mid = {sys.K.mid()};
        base.half = {0.5 * sys.K.length()};
        base.rel_lo = {0.0};
        base.rel_hi = {1.0};
        return base;
    }
    return std::move(seq.levels.back());
}

IfsSystem cover_subsystem(const IfsSystem& sys, int depth, std::size_t budget) {
    const int count = index_count(sys);
    IfsSystem best = truncate(sys, 1);
    for (int n = 1; n <= count; ++n) {
        IfsSystem sub = truncate(sys, n);
        const double m = static_cast<double>(sub.maps.size());
        double total = 0.0, p = 1.0;
        for (int j = 1; j <= depth; ++j) total += (p *= m);
        if (total > static_cast<double>(budget)) break;
        best = std::move(sub);
    }
    return best;
}

Scaffold closure_scaffold(const IfsSystem& sys, double q, int k, std::size_t budget) {
    Scaffold out;
    out.points.push_back({q, 0, 0});
    if (k < 1) return out;
    const std::vector<std::size_t> order = image_order(sys);
    const std::uint64_t m = order.size();
    std::size_t begin = 0, end = 1;  // word length l - 1 occupies [begin, end)
    std::uint64_t width = 1;         // m^{l-1}
    for (int l = 1; l <= k; ++l) {
        if (out.points.size() + m * (end - begin) > budget) {
            out.overflow = true;
            break;
        }
        for (std::uint64_t r = 0; r < m; ++r) {
            const ContractionMap& f = sys.maps[order[r]];
            for (std::size_t j = begin; j < end; ++j) {
                const ScaffoldPoint& s = out.points[j];
                out.points.push_back({f.eval(s.x), l, r * width + (f.increasing ? s.code : width - 1 - s.code)});
            }
        }
        begin = end;
        end = out.points.size();
        width *= m;
    }
    return out;
}

// forward / backward equivalence

ForwardBackwardReport forward_backward_report(const std::function<double(double)>& forward, const IfsSystem& sys,
                                              int k, const ForwardBackwardOptions& opt) {
    if (k < 0) throw Error(ErrorCode::DegenerateSystem, "k must be nonnegative");
    const CoverSequence seq = attractor_levels(sys, k + 1);
    if (seq.overflow) throw Error(ErrorCode::DegenerateSystem, "cover budget exceeded at level " + std::to_string(k + 1));
    const CoverSet& top = seq.levels[k];
    const CoverSet& images = seq.levels[0];
    const std::vector<std::size_t> order = image_order(sys);

    double cover_error = 0.0;
    for (const auto& f : sys.maps) cover_error = std::max(cover_error, f.noise * f.c);

    // cumulative lengths per level for length-weighted draws
    std::vector<std::vector<double>> cum(seq.levels.size());
    for (std::size_t l = 0; l < seq.levels.size(); ++l) {
        const CoverSet& C = seq.levels[l];
        cum[l].resize(C.size());
        double s = 0.0;
        for (std::size_t i = 0; i < C.size(); ++i) cum[l][i] = (s += 2.0 * C.half[i]);
    }

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U01(0.0, 1.0);
    auto draw_from = [&](std::size_t l) {
        const std::vector<double>& c = cum[l];
        const double t = U01(rng) * c.back();
        std::size_t i = std::upper_bound(c.begin(), c.end(), t) - c.begin();
        if (i >= c.size()) i = c.size() - 1;
        const CoverSet& C = seq.levels[l];
        return C.lo(i) + 2.0 * C.half[i] * U01(rng);
    };

    ForwardBackwardReport rep;
    rep.k = k;
    const int max_draws = opt.max_draws > 0 ? opt.max_draws : 4 * opt.samples;
    int outside_level = 0;
    while (rep.decided < opt.samples && rep.drawn < max_draws) {
        double x;
        if (rep.drawn % 2 == 0) {
            x = draw_from(k);
        } else {
            x = outside_level == 0 ? sys.K.lo + sys.K.length() * U01(rng) : draw_from(outside_level - 1);
            outside_level = (outside_level + 1) % (k + 1);
        }
        ++rep.drawn;

        if (top.endpoint_distance(x) < cover_error + 8.0 * kEps * std::max(1.0, std::abs(x))) {
            ++rep.excluded;
            continue;
        }
        const bool backward = top.find(x).has_value();

        double e = 0.0;
        bool excluded = false;
        bool forward_in = true;
        double y = x;
        for (int step = 0; step <= k; ++step) {
            if (!std::isfinite(y)) {
                forward_in = false;
                break;
            }
            if (images.endpoint_distance(y) < opt.collar + e) {
                excluded = true;
                break;
            }
            const auto hit = images.find(y);
            if (!hit) {
                forward_in = false;
                break;
            }
            if (step == k) break;
            y = forward(y);
            e = e / sys.maps[order[*hit]].b + opt.map_noise;
        }
        if (excluded) {
            ++rep.excluded;
            continue;
        }
        ++rep.decided;
        if (backward) ++rep.inside;
        if (backward == forward_in)
            ++rep.agree;
        else if (!rep.witness)
            rep.witness = x;
    }
    rep.rate = rep.decided > 0 ? static_cast<double>(rep.agree) / rep.decided : 0.0;
    rep.passed = rep.decided >= opt.samples && rep.rate >= opt.required;
    return rep;
}

ForwardBackwardReport verify_forward_backward(const std::function<double(double)>& forward, const IfsSystem& sys,
                                              int k, const ForwardBackwardOptions& opt) {
    ForwardBackwardReport rep = forward_backward_report(forward, sys, k, opt);
    if (!rep.passed) {
        std::string what = "agreement " + fmt(rep.rate) + " over " + std::to_string(rep.decided) + " decided samples";
        if (rep.witness) what += ", witness x=" + fmt(*rep.witness);
        throw Error(ErrorCode::EquivalenceFailure, what);
    }
    return rep;
}

// Cantor certificate

namespace {

// Pushes [mid - half, mid + half] through psi_word, innermost map first.
void push_segment(const IfsSystem& sys, const std::vector<std::size_t>& order, const std::vector<std::size_t>& word,
                  double& mid, double& half) {
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        double m2, h2;
        map_interval(sys.maps[order[*it]], mid, half, m2, h2);
        mid = m2;
        half = h2;
    }
}

// Outermost map first.
std::vector<std::size_t> decode(std::uint64_t code, int length, std::uint64_t m, const IfsSystem& sys,
                                const std::vector<std::size_t>& order) {
    std::vector<std::size_t> word;
    std::uint64_t width = ipow(m, length - 1);
    for (int l = length; l >= 1; --l) {
        const std::uint64_t r = code / width;
        const std::uint64_t rest = code % width;
        word.push_back(static_cast<std::size_t>(r));
        code = sys.maps[order[r]].increasing ? rest : width - 1 - rest;
        if (width > 1) width /= m;
    }
    return word;
}

bool geometric(const std::vector<double>& d) {
    if (d.size() < 3) return false;
    for (std::size_t j = 0; j + 1 < d.size(); ++j)
        if (!(d[j] > 0.0) || !(d[j + 1] <= 0.9 * d[j])) return false;
    return true;
}

}  // namespace

CantorCertificate cantor_assess(const IfsSystem& sys, const CoverSequence& covers, const Scaffold& scaffold,
                                double q, const IfsSystem* family) {
    if (!family) family = &sys;
    CantorCertificate cert;
    cert.depth = static_cast<int>(covers.levels.size());
    cert.scaffold_points = scaffold.points.size();
    if (covers.levels.empty()) {
        cert.length.detail = cert.perfect.detail = cert.separated.detail = cert.closure.detail = "no cover levels";
        return cert;
    }
    const std::uint64_t m = covers.levels[0].branching;
    const std::vector<std::size_t> order = image_order(sys);

    {  // (i)
        double prev = sys.K.length();
        double log_sum = 0.0;
        cert.max_ratio = 0.0;
        for (const CoverSet& C : covers.levels) {
            const double L = C.total_length();
            cert.total_lengths.push_back(L);
            const double ratio = L / prev;
            cert.max_ratio = std::max(cert.max_ratio, ratio);
            log_sum += std::log(ratio);
            prev = L;
        }
        cert.decay_factor = std::exp(log_sum / covers.levels.size());
        cert.length.passed = cert.max_ratio < 1.0;
        cert.length.detail = "max length ratio " + fmt(cert.max_ratio) + " over " + std::to_string(cert.depth) + " levels";
    }
    {  // (ii) and (iii) from sibling placement inside each parent
        constexpr double tol = 1e-9;
        std::string bad_ii, bad_iii;
        double min_gap = std::numeric_limits<double>::infinity();
        if (m < 2) bad_ii = "one child per interval";
        for (std::size_t l = 0; l < covers.levels.size(); ++l) {
            const CoverSet& C = covers.levels[l];
            for (std::size_t idx = 0; idx < C.size(); ++idx) {
                if (bad_ii.empty() && (C.rel_lo[idx] < -tol || C.rel_hi[idx] > 1.0 + tol || !(C.half[idx] > 0.0)))
                    bad_ii = "level " + std::to_string(l + 1) + " interval " + std::to_string(idx) + " leaves its parent";
                if (idx % m + 1 < m && idx + 1 < C.size()) {
                    const double gap = C.rel_lo[idx + 1] - C.rel_hi[idx];
                    min_gap = std::min(min_gap, gap);
                    if (bad_iii.empty() && !(gap > tol))
                        bad_iii = "level " + std::to_string(l + 1) + " siblings " + std::to_string(idx) + ", " +
                                  std::to_string(idx + 1) + " gap " + fmt(gap);
                }
            }
        }
        cert.min_gap_ratio = std::isfinite(min_gap) ? min_gap : 0.0;
        cert.perfect.passed = bad_ii.empty();
        cert.perfect.detail = bad_ii.empty() ? std::to_string(m) + " disjoint children per interval" : bad_ii;
        cert.separated.passed = bad_iii.empty() && std::isfinite(min_gap);
        cert.separated.detail = bad_iii.empty() ? "min sibling gap ratio " + fmt(cert.min_gap_ratio) : bad_iii;
    }
    {  // (iv)
        // accumulation sequences at q: branch images per side ordered by index
        std::vector<std::vector<double>> sides;
        for (int side : {-1, 1}) {
            std::vector<std::pair<int, double>> js;
            for (const auto& f : family->maps)
                if (f.side == side && f.index > 0) js.push_back({f.index, f.image.mid()});
            std::sort(js.begin(), js.end());
            std::vector<double> mids;
            for (std::size_t j = 0; j < js.size() && j < 4; ++j) mids.push_back(js[j].second);
            if (mids.size() >= 3) sides.push_back(mids);
        }
        // nearest level midpoint to q at each level
        std::vector<double> level_mids;
        for (const CoverSet& C : covers.levels) {
            double best = std::numeric_limits<double>::infinity(), at = q;
            for (std::size_t i = 0; i < C.size(); ++i)
                if (std::abs(C.mid[i] - q) < best) {
                    best = std::abs(C.mid[i] - q);
                    at = C.mid[i];
                }
            level_mids.push_back(at);
        }
        auto pushed_lengths = [&](const std::vector<std::size_t>& word, const std::vector<double>& targets) {
            std::vector<double> d;
            for (double t : targets) {
                double mid = 0.5 * (q + t), half = 0.5 * std::abs(t - q);
                push_segment(sys, order, word, mid, half);
                d.push_back(half);
            }
            return d;
        };

        std::string bad;
        for (const ScaffoldPoint& s : scaffold.points) {
            const std::vector<std::size_t> word = s.length > 0 ? decode(s.code, s.length, m, sys, order)
                                                               : std::vector<std::size_t>{};
            for (int j = 1; j <= s.length && j <= cert.depth && bad.empty(); ++j) {
                const CoverSet& C = covers.levels[j - 1];
                const std::uint64_t a = s.code / ipow(m, s.length - j);
                const double slack = 16.0 * kEps * std::max(std::abs(s.x), std::abs(C.mid[a])) + 1e-300;
                if (a >= C.size() || s.x < C.lo(a) - slack || s.x > C.hi(a) + slack)
                    bad = "point " + fmt(s.x) + " (length " + std::to_string(s.length) + ") outside level " +
                          std::to_string(j);
            }
            if (!bad.empty()) break;

            bool limit = false;
            if (!sides.empty()) {
                limit = true;
                for (const auto& mids : sides) limit = limit && geometric(pushed_lengths(word, mids));
            }
            if (!limit) limit = geometric(pushed_lengths(word, level_mids));
            if (!limit) {
                bad = "point " + fmt(s.x) + " (length " + std::to_string(s.length) + ") is not a limit of cover midpoints";
                break;
            }
        }
        cert.closure.passed = bad.empty();
        cert.closure.detail = bad.empty() ? std::to_string(scaffold.points.size()) + " scaffold points" : bad;
    }
    return cert;
}

CantorCertificate cantor_certify(const IfsSystem& sys, const CoverSequence& covers, const Scaffold& scaffold,
                                 double q, const IfsSystem* family) {
    CantorCertificate cert = cantor_assess(sys, covers, scaffold, q, family);
    const std::pair<const char*, const CantorClause*> clauses[] = {
        {"(i) length", &cert.length},
        {"(ii) perfect", &cert.perfect},
        {"(iii) separated", &cert.separated},
        {"(iv) closure", &cert.closure}};
    for (const auto& [name, c] : clauses)
        if (!c->passed) throw Error(ErrorCode::CertificateFailure, std::string(name) + ": " + c->detail);
    return cert;
}

}  // namespace ssc
