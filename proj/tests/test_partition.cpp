#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"

#include "mabi/partition.hpp"
#include "mabi/rng.hpp"

using namespace mabi;

namespace {

// 20x20 unit lattice: local coordinates (col, row) = real + 9.5, ids row*20+col.
UnitUniverse grid400() { return UnitUniverse::lattice(400); }

Point local_point(double lx, double ly, double b) { return {lx - b, ly - b}; }

} // namespace

TEST_SUITE("partition") {

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(PartitionSpec(0.0, 0.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(PartitionSpec(2.0, 1.0, 5.0), std::invalid_argument); // 2r = l
    CHECK_THROWS_AS(PartitionSpec(2.0, -0.1, 5.0), std::invalid_argument);
    CHECK_NOTHROW(PartitionSpec(2.0, 0.99, 5.0));
    CHECK(PartitionSpec(5.0, 1.2, 9.5).cells_per_axis() == 4);  // 19/5 -> 4 cells
    CHECK(PartitionSpec(5.0, 1.2, 10.0).cells_per_axis() == 4); // exact fit
    CHECK(PartitionSpec(5.0, 1.2, 1.0).cells_per_axis() == 1);  // box inside one cell
}

TEST_CASE("region classification") {
    const PartitionSpec spec(5.0, 1.2, 10.0);
    // cell centers are interior since 2r < l
    CHECK(classify_region(local_point(7.5, 7.5, 10), spec) ==
          RegionId{RegionId::Kind::Interior, 1, 1});
    // exact four-cell corner resolves to the quad
    CHECK(classify_region(local_point(5, 5, 10), spec) == RegionId{RegionId::Kind::Quad, 1, 1});
    // on a vertical grid line, mid-cell in y
    CHECK(classify_region(local_point(5, 2.5, 10), spec) ==
          RegionId{RegionId::Kind::VStrip, 1, 0});
    // strip/interior shared boundary resolves to the strip (margin and
    // boundary chosen representable so the closed-interval edge is exact)
    const PartitionSpec dyadic(5.0, 1.25, 10.0);
    CHECK(classify_region(local_point(6.25, 7.5, 10), dyadic) ==
          RegionId{RegionId::Kind::VStrip, 1, 1});
    CHECK(classify_region(local_point(6.25 + 0x1.0p-20, 7.5, 10), dyadic) ==
          RegionId{RegionId::Kind::Interior, 1, 1});
    CHECK_THROWS_AS(classify_region({10.5, 0.0}, spec), std::invalid_argument);
    CHECK_THROWS_AS(classify_region({0.0, -10.5}, spec), std::invalid_argument);
}

TEST_CASE("region cluster options respect the box edge") {
    const PartitionSpec spec(5.0, 1.2, 10.0); // 4 cells per axis
    CHECK(region_cluster_options({RegionId::Kind::Interior, 2, 3}, spec) ==
          std::vector<ClusterId>{{2, 3}});
    CHECK(region_cluster_options({RegionId::Kind::VStrip, 1, 0}, spec) ==
          std::vector<ClusterId>{{0, 0}, {1, 0}});
    CHECK(region_cluster_options({RegionId::Kind::VStrip, 0, 2}, spec) ==
          std::vector<ClusterId>{{0, 2}});
    CHECK(region_cluster_options({RegionId::Kind::VStrip, 4, 2}, spec) ==
          std::vector<ClusterId>{{3, 2}});
    CHECK(region_cluster_options({RegionId::Kind::Quad, 1, 1}, spec).size() == 4);
    CHECK(region_cluster_options({RegionId::Kind::Quad, 0, 0}, spec) ==
          std::vector<ClusterId>{{0, 0}});
    CHECK(region_cluster_options({RegionId::Kind::Quad, 4, 1}, spec).size() == 2);
}

TEST_CASE("one-cell box gives the trivial partition") {
    const PartitionSpec spec(5.0, 1.2, 1.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const Partition part = Partition::sample(spec, rng);
        CHECK(part.cluster_of({0.9, -0.9}) == ClusterId{0, 0});
        CHECK(part.cluster_of({-1.0, 1.0}) == ClusterId{0, 0});
    }
}

TEST_CASE("strip and quad attachment frequencies") {
    const PartitionSpec spec(5.0, 1.2, 10.0);
    const int n = 10000;
    int strip_left = 0;
    std::array<int, 4> quad_counts{};
    const auto quad_opts = region_cluster_options({RegionId::Kind::Quad, 2, 2}, spec);
    Rng rng(2024);
    for (int i = 0; i < n; ++i) {
        const Partition part = Partition::sample(spec, rng);
        strip_left += part.cluster_of_region({RegionId::Kind::VStrip, 1, 1}) == ClusterId{0, 1};
        const ClusterId q = part.cluster_of_region({RegionId::Kind::Quad, 2, 2});
        for (std::size_t c = 0; c < 4; ++c)
            quad_counts[c] += q == quad_opts[c];
    }
    const double se_half = std::sqrt(0.25 / n);
    CHECK(std::fabs(strip_left / double(n) - 0.5) <= 3 * se_half);
    const double se_quarter = std::sqrt(0.25 * 0.75 / n);
    for (int c = 0; c < 4; ++c)
        CHECK(std::fabs(quad_counts[c] / double(n) - 0.25) <= 3 * se_quarter);
}

TEST_CASE("cluster lookup per region kind") {
    const PartitionSpec spec(5.0, 1.2, 10.0);
    std::set<std::pair<int, int>> strip_clusters, quad_clusters;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        const Partition part = Partition::sample(spec, rng);
        // interior point sticks to its own cell whatever the seed
        CHECK(part.cluster_of(local_point(7.5, 7.5, 10)) == ClusterId{1, 1});
        const ClusterId s = part.cluster_of(local_point(5, 7.5, 10));
        strip_clusters.insert({s.i, s.j});
        const ClusterId q = part.cluster_of(local_point(5, 5, 10));
        quad_clusters.insert({q.i, q.j});
    }
    CHECK(strip_clusters == std::set<std::pair<int, int>>{{0, 1}, {1, 1}});
    CHECK(quad_clusters == std::set<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
}

TEST_CASE("ball cluster set") {
    const UnitUniverse uni = grid400();
    const PartitionSpec spec(5.0, 0.5, uni.half_width());
    Rng rng(7);

    SUBCASE("ball inside one interior is a singleton") {
        // local (7,7): the radius-0.8 ball is the unit alone, deep interior
        const Partition part = Partition::sample(spec, rng);
        const auto set = ball_cluster_set(part, uni, 7 * 20 + 7, 0.8);
        CHECK(set == std::vector<ClusterId>{{1, 1}});
    }

    SUBCASE("interior plus strip collapses when the strip draws inward") {
        // local (4,2): radius-1.2 ball spans interior(0,0) and vstrip(1,0)
        const int u = 2 * 20 + 4;
        bool found_single = false, found_double = false;
        for (std::uint64_t seed = 0; seed < 64 && !(found_single && found_double); ++seed) {
            Rng sample_rng(seed);
            const Partition part = Partition::sample(spec, sample_rng);
            const auto set = ball_cluster_set(part, uni, u, 1.2);
            if (set == std::vector<ClusterId>{{0, 0}})
                found_single = true;
            else if (set.size() == 2)
                found_double = true;
            CHECK(set.size() <= 2);
        }
        CHECK(found_single);
        CHECK(found_double);
    }

    SUBCASE("four regions can scatter into four clusters but never more") {
        const PartitionSpec wide(5.0, 1.2, uni.half_width());
        const int u = 7 * 20 + 7; // interior + 2 strips + quad at radius 1.2
        bool found_four = false;
        for (std::uint64_t seed = 0; seed < 256; ++seed) {
            Rng sample_rng(seed);
            const Partition part = Partition::sample(wide, sample_rng);
            const auto set = ball_cluster_set(part, uni, u, 1.2);
            CHECK(set.size() <= 4);
            found_four = found_four || set.size() == 4;
        }
        CHECK(found_four);
    }

    SUBCASE("precondition 2r < cell side") {
        const Partition part = Partition::sample(spec, rng);
        CHECK_THROWS_AS(ball_cluster_set(part, uni, 0, 2.6), std::invalid_argument);
    }
}

TEST_CASE("containment probability matches the four boundary cases") {
    const UnitUniverse uni = grid400();
    const PartitionSpec spec(5.0, 1.2, uni.half_width());

    // interior + two strips + quad
    CHECK(containment_probability(spec, uni, 7 * 20 + 7, 1.2) == doctest::Approx(1.0 / 16).epsilon(1e-12));
    // ball entirely inside one quad
    CHECK(containment_probability(spec, uni, 5 * 20 + 5, 1.2) == doctest::Approx(1.0).epsilon(1e-12));
    // one strip + one quad, no interior
    CHECK(containment_probability(spec, uni, 7 * 20 + 5, 1.2) == doctest::Approx(1.0 / 4).epsilon(1e-12));

    // two strips + quad, no interior: needs an off-lattice unit set
    const UnitUniverse sparse = UnitUniverse::from_points(
        {{-10, -10}, {10, 10}, {-4, -2.5}, {-2.5, -4}, {-4, -4}}, 5.0);
    const PartitionSpec sparse_spec(5.0, 1.2, sparse.half_width());
    CHECK(containment_probability(sparse_spec, sparse, 4, 1.6) ==
          doctest::Approx(1.0 / 16).epsilon(1e-12));

    // empty ball is always contained
    CHECK(containment_probability(spec, uni, 0, 0.0) == 1.0);
    CHECK_THROWS_AS(containment_probability(spec, uni, 0, 2.5), std::invalid_argument);
}

TEST_CASE("containment never drops below 1/16 when cells dominate the margin") {
    const UnitUniverse uni = grid400();
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double l = rng.uniform(4.0, 9.0);
        const double r = rng.uniform(0.1, l / 4.0);
        const PartitionSpec spec(l, r, uni.half_width());
        const int u = int(rng.next_below(400));
        const double p = containment_probability(spec, uni, u, r);
        CHECK(p >= 1.0 / 16 - 1e-12);
        CHECK(p <= 1.0 + 1e-12);
    }
}

TEST_CASE("containment matches Monte Carlo frequency") {
    const UnitUniverse uni = grid400();
    const PartitionSpec spec(5.0, 1.2, uni.half_width());
    Rng rng(99);
    for (int u : {7 * 20 + 7, 7 * 20 + 5, 9 * 20 + 9}) {
        const double exact = containment_probability(spec, uni, u, 1.2);
        const int n = 20000;
        int hits = 0;
        for (int i = 0; i < n; ++i) {
            const Partition part = Partition::sample(spec, rng);
            const auto set = ball_cluster_set(part, uni, u, 1.2);
            hits += set.size() == 1 && set[0] == part.cluster_of(uni.unit(u));
        }
        CHECK(std::fabs(hits / double(n) - exact) <=
              4.0 * std::sqrt(std::max(exact, 1e-3) * (1 - exact) / n) + 1e-9);
    }
}

TEST_CASE("cover profiles") {
    const UnitUniverse uni = grid400();

    SUBCASE("single-unit ball always sits in one cluster") {
        const PartitionSpec spec(5.0, 1.2, uni.half_width());
        const auto w = ball_cover_profile(spec, uni, 7 * 20 + 7, 0.8);
        REQUIRE(w.size() == 2);
        CHECK(w[0] == 0.0);
        CHECK(w[1] == 1.0);
    }

    SUBCASE("interior plus one strip splits 1/2 - 1/2") {
        const PartitionSpec spec(5.0, 0.5, uni.half_width());
        const auto w = ball_cover_profile(spec, uni, 2 * 20 + 4, 1.2);
        REQUIRE(w.size() == 3);
        CHECK(w[0] == 0.0);
        CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(w[2] == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("empty ball has the trivial profile") {
        const PartitionSpec spec(5.0, 0.5, uni.half_width());
        CHECK(ball_cover_profile(spec, uni, 0, 0.0) == std::vector<double>{1.0});
    }

    SUBCASE("uniform clustering profile is deterministic") {
        const PartitionSpec spec(5.0, 0.5, uni.half_width());
        const auto w = ball_cover_profile_uniform(spec, uni, 2 * 20 + 4, 1.2);
        // floor clustering puts local x=5 into cell 1, x in {3,4} into cell 0
        REQUIRE(w.size() == 3);
        CHECK(w[2] == 1.0);
    }
}

TEST_CASE("csv dump lists every region") {
    const PartitionSpec spec(5.0, 1.2, 10.0); // 4 cells per axis
    Rng rng(3);
    const Partition part = Partition::sample(spec, rng);
    std::ostringstream out;
    part.dump_csv(out);
    std::istringstream in(out.str());
    std::string line;
    CHECK(std::getline(in, line));
    CHECK(line == "region_kind,i,j,cluster_i,cluster_j");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    const int m = 4;
    CHECK(rows == m * m + 2 * m * (m + 1) + (m + 1) * (m + 1));
}

} // TEST_SUITE
