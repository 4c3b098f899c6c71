#include "ssc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ssc/errors.hpp"

namespace ssc {

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::CoverMidpoints: return "cover_midpoints";
        case Provenance::WordImages: return "word_images";
        case Provenance::OrbitSample: return "orbit_sample";
    }
    return "?";
}

PointSample make_sample(std::vector<double> points, Provenance provenance, int depth) {
    std::sort(points.begin(), points.end());
    std::vector<double> out;
    out.reserve(points.size());
    for (double x : points)
        if (out.empty() || x - out.back() > 1e-14) out.push_back(x);
    return {std::move(out), provenance, depth};
}

PointSample sample_cover_midpoints(const CoverSet& cover) {
    return make_sample(cover.mid, Provenance::CoverMidpoints, cover.level);
}

PointSample sample_word_images(const IfsSystem& sys, double resolution, std::size_t budget) {
    if (sys.maps.empty()) throw Error(ErrorCode::DegenerateSystem, "system has no maps");
    struct Node {
        double mid, half;
        int depth;
    };
    const double target = 0.5 * resolution * sys.K.length();
    std::vector<double> pts;
    int deepest = 0;
    std::vector<Node> stack{{sys.K.mid(), 0.5 * sys.K.length(), 0}};
    while (!stack.empty() && pts.size() < budget) {
        const Node n = stack.back();
        stack.pop_back();
        std::vector<double> leaves;
        for (const auto& f : sys.maps) {
            Node c{0.0, 0.0, n.depth + 1};
            map_interval(f, n.mid, n.half, c.mid, c.half);
            if (c.half < target) {
                leaves.push_back(c.mid);
                deepest = std::max(deepest, c.depth);
            } else {
                stack.push_back(c);
            }
        }
        // leaves closer than the resolution are indistinguishable at the fitted scales
        std::sort(leaves.begin(), leaves.end());
        double last = -std::numeric_limits<double>::infinity();
        for (double x : leaves)
            if (x - last >= target) {
                pts.push_back(x);
                last = x;
            }
    }
    PointSample out = make_sample(std::move(pts), Provenance::WordImages, deepest);
    out.overflow = !stack.empty();
    return out;
}

BoxCountResult box_counting(const PointSample& sample, const BoxCountOptions& opt) {
    BoxCountResult res;
    const auto& p = sample.points;
    if (p.empty()) throw Error(ErrorCode::DegenerateFit, "empty sample");
    const double diam = p.back() - p.front();
    if (p.size() == 1 || diam == 0.0) return res;
    if (p.size() < 16) throw Error(ErrorCode::DegenerateFit, "too few points: " + std::to_string(p.size()));
    if (!(opt.window_lo > 0.0 && opt.window_hi > opt.window_lo && opt.per_decade > 0))
        throw Error(ErrorCode::DegenerateFit, "invalid scale window");

    const int n = static_cast<int>(std::lround(std::log10(opt.window_hi / opt.window_lo) * opt.per_decade));
    if (n < 2) throw Error(ErrorCode::DegenerateFit, "scale window too narrow");
    std::vector<double> lx, ly;
    for (int j = 0; j <= n; ++j) {
        const double rel = opt.window_hi * std::pow(opt.window_lo / opt.window_hi, static_cast<double>(j) / n);
        const double eps = diam * rel;
        // the last box is closed, so the maximum never opens a box of its own
        const auto top = static_cast<long long>(std::ceil(1.0 / rel - 1e-9)) - 1;
        std::size_t count = 0;
        long long last = -1;
        for (double x : p) {
            const auto box = std::min(top, static_cast<long long>(std::floor((x - p.front()) / diam / rel)));
            if (box != last) {
                ++count;
                last = box;
            }
        }
        res.eps.push_back(eps);
        res.counts.push_back(count);
        lx.push_back(std::log(1.0 / eps));
        ly.push_back(std::log(static_cast<double>(count)));
    }
    const double m = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t j = 0; j < lx.size(); ++j) {
        mx += lx[j] / m;
        my += ly[j] / m;
    }
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t j = 0; j < lx.size(); ++j) {
        sxx += (lx[j] - mx) * (lx[j] - mx);
        sxy += (lx[j] - mx) * (ly[j] - my);
        syy += (ly[j] - my) * (ly[j] - my);
    }
    res.slope = sxy / sxx;
    res.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    if (res.r2 < opt.min_r2) {
        std::ostringstream os;
        os << "R^2 = " << res.r2 << " below " << opt.min_r2 << " (slope " << res.slope << ")";
        throw Error(ErrorCode::DegenerateFit, os.str());
    }
    return res;
}

double cover_length(const CoverSet& cover) { return cover.total_length(); }

Verdict crosscheck(const DimensionReport& report, const BoxCountResult& box, const CoverSequence& covers,
                   const IfsSystem& cover_sys, double band) {
    Verdict v;
    v.box_slope = box.slope;
    v.band_lo = report.moran_lower - band;
    v.band_hi = report.moran_upper + band;
    v.margin_lo = box.slope - v.band_lo;
    v.margin_hi = v.band_hi - box.slope;
    auto note = [&](const std::string& s) { v.failures.push_back(s); };
    std::ostringstream os;
    os.precision(6);
    if (v.margin_lo < 0.0 || v.margin_hi < 0.0) {
        os << "box slope " << box.slope << " outside [" << v.band_lo << ", " << v.band_hi << "]";
        note(os.str());
    }
    for (const auto& f : cover_sys.maps) v.sum_c += f.c;
    if (!(v.sum_c < 1.0)) note("sum of contraction bounds is not below 1");
    double prev = cover_sys.K.length();
    for (const CoverSet& C : covers.levels) {
        const double L = cover_length(C);
        const double ratio = L / prev;
        v.max_decay = std::max(v.max_decay, ratio);
        prev = L;
    }
    if (covers.levels.empty()) note("no cover levels");
    if (v.max_decay > v.sum_c * (1.0 + 1e-9)) {
        std::ostringstream d;
        d.precision(6);
        d << "cover length ratio " << v.max_decay << " exceeds sum c_i = " << v.sum_c;
        note(d.str());
    }
    v.passed = v.failures.empty();
    return v;
}

}  // namespace ssc
