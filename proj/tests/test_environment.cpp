#include <cmath>
#include <memory>

#include "doctest.h"

#include "mabi/environment.hpp"

using namespace mabi;

namespace {

std::shared_ptr<const UnitUniverse> shared_lattice(int n) {
    return std::make_shared<const UnitUniverse>(UnitUniverse::lattice(n));
}

// Window helper for the extension checks: row-major (2m+1)^2 grid.
std::vector<std::uint8_t> window_from_bits(unsigned bits, int cells) {
    std::vector<std::uint8_t> w(static_cast<std::size_t>(cells));
    for (int c = 0; c < cells; ++c)
        w[static_cast<std::size_t>(c)] = (bits >> c) & 1;
    return w;
}

} // namespace

TEST_SUITE("environment") {

TEST_CASE("kernel shapes") {
    const auto sutva = InterferenceKernel::sutva();
    CHECK(sutva(0) == 1.0);
    CHECK(sutva(0.1) == 0.0);
    CHECK(sutva(3) == 0.0);

    const auto kappa = InterferenceKernel::kappa_neighborhood(2.0);
    CHECK(kappa(0) == 1.0);
    CHECK(kappa(1.9) == 1.0);
    CHECK(kappa(2.0) == 0.0);

    const auto power = InterferenceKernel::power_law(2.0);
    CHECK(power(0) == 1.0);
    CHECK(power(1) == 1.0);
    CHECK(power(2) == doctest::Approx(0.25));
    CHECK(power(4) == doctest::Approx(1.0 / 16));

    const auto table = InterferenceKernel::tabulated({1.0, 0.5, 0.0});
    CHECK(table(0) == 1.0);
    CHECK(table(0.9) == 1.0);
    CHECK(table(1.0) == 0.5);
    CHECK(table(2.0) == 0.0);
    CHECK(table(9.0) == 0.0);

    CHECK_THROWS_AS(InterferenceKernel::tabulated({0.5, 0.7}), std::invalid_argument);
    CHECK_THROWS_AS(InterferenceKernel::tabulated({}), std::invalid_argument);
    CHECK_THROWS_AS(InterferenceKernel::kappa_neighborhood(0.0), std::invalid_argument);
    CHECK_THROWS_AS(InterferenceKernel::power_law(0.5), std::invalid_argument);
    CHECK_THROWS_AS(sutva(-1.0), std::invalid_argument);
}

TEST_CASE("kernel parse round trip") {
    for (const std::string text : {"sutva", "kappa:2", "power-law:1.5", "tabulated:1;0.5;0"}) {
        const auto kernel = InterferenceKernel::parse(text);
        const auto again = InterferenceKernel::parse(kernel.describe());
        for (double r : {0.0, 0.5, 1.0, 2.0, 5.0})
            CHECK(kernel(r) == again(r));
    }
    CHECK_THROWS_AS(InterferenceKernel::parse("banana"), std::invalid_argument);
}

TEST_CASE("lattice-neighbor rewards follow the neighborhood share") {
    const auto uni = shared_lattice(49);
    Rng rng(11);
    const LatticeNeighborModel model(uni, 2, 16, 2, rng);

    const AssignmentVector ones = constant_assignment(49, 1);
    const AssignmentVector zeros = constant_assignment(49, 0);
    for (int t : {1, 7, 16}) {
        for (int u : {0, 3, 24, 48}) {
            const double c = model.drift(u, t);
            CHECK(model.eval(u, t, ones) == doctest::Approx((1 + c) / 2).epsilon(1e-12));
            CHECK(model.eval(u, t, zeros) == doctest::Approx((1 - c) / 2).epsilon(1e-12));
        }
    }

    // direct neighbor-count oracle on a mixed assignment
    AssignmentVector mixed(49, 0);
    for (int u = 0; u < 49; u += 3)
        mixed[static_cast<std::size_t>(u)] = 1;
    const int u = 24; // interior: 5-unit neighborhood
    int ones_count = 0;
    for (int v : {24, 23, 25, 17, 31})
        ones_count += mixed[static_cast<std::size_t>(v)] == 1;
    const double rho = ones_count / 5.0;
    const double want = (1 + (2 * rho - 1) * model.drift(u, 5)) / 2;
    CHECK(model.eval(u, 5, mixed) == doctest::Approx(want).epsilon(1e-12));

    CHECK_THROWS_AS(model.eval(0, 0, ones), std::out_of_range);
    CHECK_THROWS_AS(model.eval(0, 17, ones), std::out_of_range);
    CHECK_THROWS_AS(model.eval(0, 1, AssignmentVector(5, 0)), std::invalid_argument);
}

TEST_CASE("drift profiles are 8-piecewise constant") {
    const auto uni = shared_lattice(9);
    Rng rng(4);
    const int horizon = 40; // pieces of length 5
    const LatticeNeighborModel model(uni, 2, horizon, 2, rng);
    CHECK(LatticeNeighborModel::piece_index(1, horizon) == 0);
    CHECK(LatticeNeighborModel::piece_index(5, horizon) == 0);
    CHECK(LatticeNeighborModel::piece_index(6, horizon) == 1);
    CHECK(LatticeNeighborModel::piece_index(40, horizon) == 7);
    // horizons not divisible by 8 clip the final piece
    CHECK(LatticeNeighborModel::piece_index(10, 10) == 4);
    CHECK(LatticeNeighborModel::piece_index(9, 9) == 4);
    int changes = 0;
    for (int t = 2; t <= horizon; ++t)
        changes += model.drift(0, t) != model.drift(0, t - 1);
    CHECK(changes <= 7);
    // piecewise-constant within pieces
    CHECK(model.drift(3, 1) == model.drift(3, 5));
    CHECK(model.drift(3, 6) == model.drift(3, 10));
}

TEST_CASE("counterfactual means") {
    const auto uni = shared_lattice(49);

    SUBCASE("per-arm constants pass through") {
        const UniformConstantModel model(uni, 5, {0.3, 0.8});
        CHECK(model.counterfactual_mean(3, 0) == doctest::Approx(0.3));
        CHECK(model.counterfactual_mean(3, 1) == doctest::Approx(0.8));
        CHECK_THROWS_AS(model.counterfactual_mean(0, 0), std::out_of_range);
        CHECK_THROWS_AS(model.counterfactual_mean(1, 2), std::out_of_range);
    }

    SUBCASE("lattice model: direct average oracle") {
        Rng rng(8);
        const LatticeNeighborModel model(uni, 2, 12, 2, rng);
        for (int t : {1, 6, 12}) {
            double sum = 0.0;
            for (int u = 0; u < 49; ++u)
                sum += (1 + model.drift(u, t)) / 2;
            CHECK(model.counterfactual_mean(t, 1) == doctest::Approx(sum / 49).epsilon(1e-12));
        }
    }
}

TEST_CASE("r_star window radius") {
    // all zeros: even the center ball fails
    CHECK(r_star(std::vector<std::uint8_t>(9, 0), 1) == 0);
    // all ones: capped at the window half-width
    CHECK(r_star(std::vector<std::uint8_t>(9, 1), 1) == 1);
    CHECK(r_star(std::vector<std::uint8_t>(49, 1), 3) == 3);
    // center one, a single off-center zero
    std::vector<std::uint8_t> w(9, 1);
    w[0] = 0;
    CHECK(r_star(w, 1) == 1);
    // zero at distance 2 in a 5x5 window
    std::vector<std::uint8_t> w5(25, 1);
    w5[0] = 0; // corner, sup distance 2
    CHECK(r_star(w5, 2) == 2);
    w5[7] = 0; // (dx,dy)=(0,-1), distance 1
    CHECK(r_star(w5, 2) == 1);
    CHECK_THROWS_AS(r_star(std::vector<std::uint8_t>(8, 1), 1), std::invalid_argument);
}

TEST_CASE("extension values over the assignment hypercube") {
    const auto uni = shared_lattice(49);
    const HypercubeExtension ext{uni, 24, 1, InterferenceKernel::tabulated({1.0, 0.5, 0.0})};

    CHECK(extension_value(ext, constant_assignment(49, 0)) == doctest::Approx(0.0));
    // all ones: psi(0) - psi(m) = 1 - 0.5
    CHECK(extension_value(ext, constant_assignment(49, 1)) == doctest::Approx(0.5));

    AssignmentVector z = constant_assignment(49, 1);
    z[23] = 0; // a window neighbor
    CHECK(extension_value(ext, z) == doctest::Approx(0.5)); // r_star = 1 -> 1 - psi(1)
    z[24] = 0; // the center itself
    CHECK(extension_value(ext, z) == doctest::Approx(0.0)); // r_star = 0

    AssignmentVector bad = constant_assignment(49, 1);
    bad[23] = 2;
    CHECK_THROWS_AS(extension_value(ext, bad), std::invalid_argument);

    // window cells outside the universe never cap the radius
    const HypercubeExtension corner{uni, 0, 1, InterferenceKernel::tabulated({1.0, 0.5, 0.0})};
    CHECK(extension_value(corner, constant_assignment(49, 1)) == doctest::Approx(0.5));
}

TEST_CASE("extension satisfies the decay bound exhaustively at m=1") {
    for (const auto& kernel :
         {InterferenceKernel::tabulated({1.0, 0.5, 0.0}), InterferenceKernel::power_law(1.0),
          InterferenceKernel::sutva()}) {
        std::array<double, 512> f{};
        for (unsigned bits = 0; bits < 512; ++bits)
            f[bits] = kernel(0) - kernel(r_star(window_from_bits(bits, 9), 1));
        long long violations = 0;
        for (unsigned a = 0; a < 512; ++a) {
            for (unsigned b = 0; b < 512; ++b) {
                // agreement on B(O,1) = the center bit (index 4)
                if (((a >> 4) & 1) == ((b >> 4) & 1) && std::fabs(f[a] - f[b]) > kernel(1) + 1e-12)
                    ++violations;
                // agreement on B(O,2) = the full window
                if (a == b && std::fabs(f[a] - f[b]) > kernel(2) + 1e-12)
                    ++violations;
            }
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("extension grows when entries flip to one") {
    Rng rng(21);
    const auto kernel = InterferenceKernel::power_law(1.0);
    for (int i = 0; i < 3000; ++i) {
        const int m = 2;
        std::vector<std::uint8_t> w(25);
        for (auto& v : w)
            v = static_cast<std::uint8_t>(rng.next_below(2));
        const double before = kernel(0) - kernel(r_star(w, m));
        const auto flip = rng.next_below(25);
        if (w[flip] == 1)
            continue;
        w[flip] = 1;
        const double after = kernel(0) - kernel(r_star(w, m));
        CHECK(after >= before - 1e-12);
    }
}

TEST_CASE("adversarial instance construction") {
    SUBCASE("boundary behavior") {
        std::vector<std::uint8_t> xi{1, 0, 1, 1, 0, 0, 1, 0};
        const LowerBoundModel model(4, 8, InterferenceKernel::sutva(), xi);
        CHECK(model.units() == 81); // (4*2+1)^2
        CHECK(model.interior_count() == 25);
        const AssignmentVector zeros = constant_assignment(81, 0);
        const AssignmentVector ones = constant_assignment(81, 1);
        for (int u = 0; u < 81; ++u) {
            for (int t : {1, 4, 8}) {
                if (!model.is_interior(u)) {
                    CHECK(model.eval(u, t, zeros) == 0.0);
                    CHECK(model.eval(u, t, ones) == 0.0);
                } else {
                    CHECK(model.eval(u, t, zeros) == doctest::Approx(0.5));
                    CHECK(model.eval(u, t, ones) ==
                          doctest::Approx(xi[static_cast<std::size_t>(t - 1)] ? 1.0 : 0.0));
                }
            }
        }
    }

    SUBCASE("coin average is exactly one half on interior units") {
        Rng rng(3);
        std::vector<std::uint8_t> xi(12), anti(12);
        for (std::size_t t = 0; t < 12; ++t) {
            xi[t] = rng.bernoulli(0.5);
            anti[t] = 1 - xi[t];
        }
        const LowerBoundModel a(4, 12, InterferenceKernel::tabulated({1.0, 0.6, 0.0}), xi);
        const LowerBoundModel b(4, 12, InterferenceKernel::tabulated({1.0, 0.6, 0.0}), anti);
        AssignmentVector z(81);
        for (auto& arm : z)
            arm = static_cast<std::uint8_t>(rng.next_below(2));
        for (int t = 1; t <= 12; ++t)
            for (int u = 0; u < 81; ++u)
                if (a.is_interior(u))
                    CHECK(std::fabs((a.eval(u, t, z) + b.eval(u, t, z)) / 2 - 0.5) <= 1e-15);
    }

    SUBCASE("box-level counterfactual mean carries the interior dilution") {
        std::vector<std::uint8_t> xi{1, 0};
        const LowerBoundModel model(4, 2, InterferenceKernel::sutva(), xi);
        const double dilution = 25.0 / 81.0;
        // arm 0 freezes every interior unit at 1/2
        CHECK(model.counterfactual_mean(1, 0) == doctest::Approx(0.5 * dilution));
        // arm 1 pays the coin
        CHECK(model.counterfactual_mean(1, 1) == doctest::Approx(1.0 * dilution));
        CHECK(model.counterfactual_mean(2, 1) == doctest::Approx(0.0));
    }

    SUBCASE("kernel preconditions") {
        Rng rng(5);
        CHECK_THROWS_AS(LowerBoundModel(4, 4, InterferenceKernel::tabulated({0.5, 0.0}), rng),
                        std::invalid_argument);
        CHECK_THROWS_AS(LowerBoundModel(3, 4, InterferenceKernel::sutva(), rng),
                        std::invalid_argument); // not a perfect square
        CHECK_THROWS_AS(LowerBoundModel(4, 4, InterferenceKernel::tabulated({1.0, 1.0, 1.0}), rng),
                        std::invalid_argument); // no decay over the window
        // power-law tails are rescaled to hit zero at the window edge
        const LowerBoundModel rescaled(4, 4, InterferenceKernel::power_law(1.0), rng);
        CHECK(rescaled.decay_profile()[0] == doctest::Approx(1.0));
        CHECK(rescaled.decay_profile()[2] == doctest::Approx(0.0));
    }
}

TEST_CASE("dip verification accepts the built-in models") {
    const auto uni = shared_lattice(100);
    Rng build(17);
    const LatticeNeighborModel lattice5(uni, 2, 10, 2, build);
    const LatticeNeighborModel lattice1(uni, 3, 10, 1, build);
    const UniformConstantModel constant(uni, 10, {0.1, 0.9});
    const LowerBoundModel lower(4, 10, InterferenceKernel::sutva(), build);

    Rng rng(23);
    for (const RewardModel* model :
         std::vector<const RewardModel*>{&lattice5, &lattice1, &constant, &lower}) {
        const DipReport report = verify_dip(*model, 3000, rng);
        CHECK(report.samples == 3000);
        CHECK(report.violations == 0);
        CHECK(report.max_excess == 0.0);
    }
}

TEST_CASE("rewards stay in the unit interval") {
    const auto uni = shared_lattice(100);
    Rng build(29);
    const LatticeNeighborModel lattice(uni, 2, 12, 2, build);
    const LowerBoundModel lower(9, 12, InterferenceKernel::power_law(1.5), build);

    Rng rng(31);
    for (const RewardModel* model : std::vector<const RewardModel*>{&lattice, &lower}) {
        AssignmentVector z(static_cast<std::size_t>(model->units()));
        for (int i = 0; i < 20000; ++i) {
            for (auto& a : z)
                a = static_cast<std::uint8_t>(rng.next_below(model->arms()));
            const int u = int(rng.next_below(model->units()));
            const int t = 1 + int(rng.next_below(model->horizon()));
            const double y = model->eval(u, t, z);
            CHECK(y >= 0.0);
            CHECK(y <= 1.0);
        }
    }
}

} // TEST_SUITE
