#include <cmath>

#include "doctest.h"
#include "ssc/errors.hpp"
#include "ssc/oracle.hpp"

using namespace ssc;

TEST_SUITE("oracle") {

TEST_CASE("samples are sorted and deduplicated") {
    const PointSample s = make_sample({0.5, 0.1, 0.5 + 1e-16, 0.3, 0.1}, Provenance::OrbitSample);
    REQUIRE(s.points.size() == 3);
    CHECK(s.points[0] == 0.1);
    CHECK(s.points[2] == 0.5);
    CHECK(std::string(to_string(Provenance::WordImages)) == "word_images");
}

TEST_CASE("middle-thirds box slope") {
    const PointSample s = sample_word_images(make_middle_thirds(), 1e-7);
    CHECK_FALSE(s.overflow);
    const BoxCountResult b = box_counting(s);
    CHECK(std::abs(b.slope - std::log(2.0) / std::log(3.0)) < 0.01);
    CHECK(b.r2 >= 0.99);
    for (std::size_t i = 1; i < b.eps.size(); ++i) {
        CHECK(b.eps[i] < b.eps[i - 1]);
        CHECK(b.counts[i] >= b.counts[i - 1]);
    }

    // shift and scale the sample
    std::vector<double> moved;
    for (double x : s.points) moved.push_back(7.0 + 0.25 * x);
    const BoxCountResult m = box_counting(make_sample(moved, Provenance::WordImages));
    CHECK(std::abs(m.slope - b.slope) < 1e-6);
}

TEST_CASE("uniform and degenerate samples") {
    std::vector<double> grid;
    for (int i = 0; i <= 1000000; ++i) grid.push_back(-1.0 + 2e-6 * i);
    CHECK(std::abs(box_counting(make_sample(grid, Provenance::OrbitSample)).slope - 1.0) < 0.01);
    CHECK(box_counting(make_sample({0.25}, Provenance::OrbitSample)).slope == 0.0);
    try {
        (void)box_counting(make_sample({0.1, 0.2, 0.3}, Provenance::OrbitSample));
        FAIL("expected DegenerateFit");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateFit);
    }
}

TEST_CASE("cover length") {
    const IfsSystem mt = make_middle_thirds();
    for (int k = 1; k <= 8; ++k) CHECK(cover_length(attractor_iterate(mt, k)) == doctest::Approx(std::pow(2.0 / 3.0, k)));
    CHECK(cover_length(attractor_iterate(make_geometric_model(1.0, 4.0, 1, 3), 0)) == 2.0);
    const CoverSequence seq = attractor_levels(mt, 6);
    for (std::size_t k = 1; k < seq.levels.size(); ++k)
        CHECK(cover_length(seq.levels[k]) <= cover_length(seq.levels[k - 1]));
}

TEST_CASE("crosscheck verdicts") {
    const IfsSystem mt = make_middle_thirds();
    const DimensionReport r = dimension_report(mt, {});
    const CoverSequence covers = attractor_levels(mt, 8);
    const BoxCountResult b = box_counting(sample_word_images(mt, 1e-7));
    const Verdict v = crosscheck(r, b, covers, mt);
    CHECK(v.passed);
    CHECK(v.margin_lo > 0.0);
    CHECK(v.margin_hi > 0.0);
    CHECK(v.failures.empty());

    // understated contraction bounds: the bracket drops and the covers decay too slowly
    IfsSystem corrupt = mt;
    for (auto& f : corrupt.maps) f.b = f.c = f.c / 2.0;
    const Verdict w = crosscheck(dimension_report(corrupt, {}), b, covers, corrupt);
    CHECK_FALSE(w.passed);
    CHECK(w.margin_hi < 0.0);
    CHECK(w.failures.size() >= 2);
}

}
