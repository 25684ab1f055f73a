#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "harmonica/symmetrize.hpp"

using namespace harmonica;

namespace {

VoxelSet random_mask(const GridSpec& spec, std::uint64_t seed, double fill = 0.35) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    VoxelSet s(spec);
    for (auto& m : s.mask) m = u(rng) < fill ? 1 : 0;
    return s;
}

VoxelSet rect(const GridSpec& spec, std::array<int, 3> lo, std::array<int, 3> hi) {
    VoxelSet s(spec);
    for (long i = 0; i < spec.total(); ++i) {
        auto idx = spec.unflat(i);
        bool in = true;
        for (int k = 0; k < spec.n; ++k)
            if (idx[k] < lo[k] || idx[k] >= hi[k]) in = false;
        if (in) s.mask[i] = 1;
    }
    return s;
}

}  // namespace

TEST_CASE("steiner preserves cell counts and is idempotent") {
    GridSpec spec(2, 32, 1.0);
    std::vector<LatticeDirection> dirs{LatticeDirection::axis(0), LatticeDirection::axis(1),
                                       LatticeDirection::pair(0, 1, 1, 1),
                                       LatticeDirection::pair(0, 1, 1, -1),
                                       LatticeDirection::pair(0, 1, 2, 1)};
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        VoxelSet s = random_mask(spec, seed);
        for (const auto& d : dirs) {
            VoxelSet t = steiner(s, d);
            REQUIRE(t.count() == s.count());
            VoxelSet t2 = steiner(t, d);
            REQUIRE(t2.mask == t.mask);
        }
    }
}

TEST_CASE("steiner of a centered ball along an axis is the ball") {
    GridSpec spec(2, 64, 1.0);
    VoxelSet ball = rasterize_ball(spec, 0.6);
    for (int ax : {0, 1}) {
        VoxelSet t = steiner(ball, LatticeDirection::axis(ax));
        REQUIRE(t.mask == ball.mask);
    }
}

TEST_CASE("steiner of an axis-aligned rectangle recenters it") {
    GridSpec spec(2, 32, 1.0);
    VoxelSet r = rect(spec, {2, 5, 0}, {10, 9, 0});
    VoxelSet t = steiner(r, LatticeDirection::axis(0));
    REQUIRE(t.count() == r.count());
    // Recentered along axis 0: rows now occupy [N/2 - 4, N/2 + 4).
    VoxelSet want = rect(spec, {12, 5, 0}, {20, 9, 0});
    REQUIRE(t.mask == want.mask);
}

TEST_CASE("steiner is monotone column-wise") {
    GridSpec spec(2, 24, 1.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        VoxelSet a = random_mask(spec, 100 + seed, 0.25);
        VoxelSet b = a;
        VoxelSet extra = random_mask(spec, 200 + seed, 0.2);
        for (long i = 0; i < spec.total(); ++i)
            if (extra.mask[i]) b.mask[i] = 1;  // a subset of b
        for (auto d : {LatticeDirection::axis(1), LatticeDirection::pair(0, 1, 1, 1)}) {
            VoxelSet sa = steiner(a, d), sb = steiner(b, d);
            for (long i = 0; i < spec.total(); ++i) REQUIRE(sa.mask[i] <= sb.mask[i]);
        }
    }
}

TEST_CASE("steiner rejects unrepresentable directions") {
    GridSpec spec(2, 16, 1.0);
    VoxelSet s = random_mask(spec, 1);
    REQUIRE_THROWS_AS(steiner(s, LatticeDirection::pair(0, 1, 2, 4)), invalid_direction_error);
    REQUIRE_THROWS_AS(steiner(s, LatticeDirection::pair(0, 0, 1, 1)), invalid_direction_error);
    REQUIRE_THROWS_AS(steiner(s, LatticeDirection::axis(2)), invalid_direction_error);
}

TEST_CASE("square converges to the ball under an alternating schedule") {
    GridSpec spec(2, 64, 1.0);
    // Square with the measure of the radius-0.55 ball.
    double rho = 0.55;
    double side = std::sqrt(M_PI) * rho;
    int half = static_cast<int>(std::round(side / spec.step() / 2));
    VoxelSet sq = rect(spec, {32 - half, 32 - half, 0}, {32 + half, 32 + half, 0});
    auto schedule = default_ball_schedule(2, 20);
    auto res = symmetrize_to_ball(sq, schedule);
    REQUIRE(res.delta_history.size() == 20);
    REQUIRE(res.delta_history.back() < 0.05 * sq.measure());

    // Ball input: already within the one-cell shell at every step.
    VoxelSet ball = rasterize_ball(spec, rho);
    auto res2 = symmetrize_to_ball(ball, schedule);
    double shell = 2 * M_PI * rho * spec.step() * 1.5;
    for (double d : res2.delta_history) REQUIRE(d <= shell);

    auto res3 = symmetrize_to_ball(VoxelSet(spec), schedule);
    REQUIRE(res3.result.empty());
}

TEST_CASE("minkowski sum of single cells and balls") {
    GridSpec spec(2, 32, 1.0);
    VoxelSet a(spec), b(spec);
    a.mask[spec.flat({4, 7, 0})] = 1;
    b.mask[spec.flat({20, 3, 0})] = 1;
    VoxelSet sum = minkowski_sum(a, b);
    REQUIRE(sum.count() == 4);  // one 2h-cube
    REQUIRE(sum.measure() == Catch::Approx(4 * spec.cell_volume()));

    // A ball plus itself dilates to twice the radius, up to a cell shell.
    VoxelSet ball = rasterize_ball(spec, 0.4);
    VoxelSet bb = minkowski_sum(ball, ball);
    GridSpec big(2, 64, 2.0);
    VoxelSet target = rasterize_ball(big, 0.8);
    long delta = 0;
    for (long i = 0; i < big.total(); ++i)
        if (bb.mask[i] != target.mask[i]) ++delta;
    REQUIRE(delta * big.cell_volume() < 0.2 * target.measure());

    // Contains every translate of A by cell offsets of B.
    VoxelSet A = random_mask(spec, 5, 0.2), B = random_mask(spec, 6, 0.05);
    VoxelSet S = minkowski_sum(A, B);
    for (long ib = 0; ib < spec.total(); ++ib) {
        if (!B.mask[ib]) continue;
        auto off = spec.unflat(ib);
        for (long ia = 0; ia < spec.total(); ++ia) {
            if (!A.mask[ia]) continue;
            auto ai = spec.unflat(ia);
            std::array<int, 3> idx{0, 0, 0};
            for (int k = 0; k < 2; ++k) idx[k] = ai[k] + off[k];
            REQUIRE(S.mask[S.spec.flat(idx)] == 1);
        }
    }
}

TEST_CASE("brunn-minkowski holds with exact integer arithmetic") {
    for (int n : {1, 2, 3}) {
        GridSpec spec(n, n == 3 ? 8 : 16, 1.0);
        for (std::uint64_t seed = 0; seed < 70; ++seed) {
            VoxelSet a = random_mask(spec, 1000 * n + seed, 0.3);
            VoxelSet b = random_mask(spec, 2000 * n + seed, 0.25);
            if (a.empty() || b.empty()) continue;
            VoxelSet s = minkowski_sum(a, b);
            REQUIRE(brunn_minkowski_holds(s.count(), a.count(), b.count(), n));
        }
    }
}

TEST_CASE("bll inequality on shifted intervals with closed-form sides") {
    // f1 = chi_[0,1), f2 = chi_[0.5, 1.5), K = chi_[-1,1], m = 1, l_j = id.
    StepFn1D f1{{0.0, 1.0}, {1.0}};
    StepFn1D f2{{0.5, 1.5}, {1.0}};
    auto K = [](const Vec& z) { return std::abs(z[0]) <= 1.0; };
    auto r = bll_check({f1, f2}, {{{1, 0, 0}}, {{1, 0, 0}}}, K, 1, 2.0);
    // lhs: overlap of [0,1), [0.5,1.5) and [-1,1] has length 1/2;
    // rhs: both recenter to [-1/2, 1/2), overlap 1.
    REQUIRE(r.lhs == Catch::Approx(0.5).margin(2e-3));
    REQUIRE(r.rhs == Catch::Approx(1.0).margin(2e-3));
    REQUIRE(r.lhs <= r.rhs + 1e-9);

    // Symmetric decreasing inputs are fixed points: lhs = rhs.
    StepFn1D g{{-1.0, 1.0}, {1.0}};
    auto req = bll_check({g, g}, {{{1, 0, 0}}, {{-1, 0, 0}}}, K, 1, 2.0);
    REQUIRE(req.lhs == Catch::Approx(req.rhs).epsilon(1e-9));

    auto bad = [](const Vec& z) { return z[0] >= 0.0; };
    REQUIRE_THROWS_AS(bll_check({f1}, {{{1, 0, 0}}}, bad, 1, 2.0), invalid_kernel_error);
}

TEST_CASE("bll inequality against the exhaustive lattice oracle") {
    // Intervals with integer endpoints on a 16-cell lattice; exact interval
    // arithmetic provides both sides. Both factors read the same coordinate.
    auto overlap = [](double a0, double a1, double b0, double b1, double c) {
        double lo = std::max({a0, b0, -c}), hi = std::min({a1, b1, c});
        return std::max(0.0, hi - lo);
    };
    int checked = 0;
    for (int a0 = 0; a0 < 16; ++a0) {
        for (int a1 = a0 + 1; a1 <= 16; ++a1) {
            for (int b0 = 0; b0 < 16; ++b0) {
                for (int b1 = b0 + 1; b1 <= 16; ++b1) {
                    double c = 5.0;  // kernel window chi_[-5,5]
                    double sa0 = a0 - 8.0, sa1 = a1 - 8.0;  // center the lattice on 0
                    double sb0 = b0 - 8.0, sb1 = b1 - 8.0;
                    double lhs = overlap(sa0, sa1, sb0, sb1, c);
                    double wa = sa1 - sa0, wb = sb1 - sb0;
                    double rhs = overlap(-wa / 2, wa / 2, -wb / 2, wb / 2, c);
                    REQUIRE(lhs <= rhs + 1e-12);
                    ++checked;
                }
            }
        }
    }
    REQUIRE(checked == 136 * 136);

    // Spot check the quadrature path against the oracle on a few instances.
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        int a0 = static_cast<int>(rng() % 15), a1 = a0 + 1 + static_cast<int>(rng() % (16 - a0));
        int b0 = static_cast<int>(rng() % 15), b1 = b0 + 1 + static_cast<int>(rng() % (16 - b0));
        a1 = std::min(a1, 16);
        b1 = std::min(b1, 16);
        StepFn1D fa{{a0 - 8.0, a1 - 8.0}, {1.0}};
        StepFn1D fb{{b0 - 8.0, b1 - 8.0}, {1.0}};
        auto K = [](const Vec& z) { return std::abs(z[0]) <= 5.0; };
        auto r = bll_check({fa, fb}, {{{1, 0, 0}}, {{1, 0, 0}}}, K, 1, 10.0);
        double lhs = overlap(a0 - 8.0, a1 - 8.0, b0 - 8.0, b1 - 8.0, 5.0);
        double wa = a1 - a0 + 0.0, wb = b1 - b0 + 0.0;
        double rhs = overlap(-wa / 2, wa / 2, -wb / 2, wb / 2, 5.0);
        REQUIRE(r.lhs == Catch::Approx(lhs).margin(0.02));
        REQUIRE(r.rhs == Catch::Approx(rhs).margin(0.02));
    }
}

TEST_CASE("steiner in three dimensions") {
    GridSpec spec(3, 12, 1.0);
    std::vector<LatticeDirection> dirs{LatticeDirection::axis(2),
                                       LatticeDirection::pair(0, 2, 1, 1),
                                       LatticeDirection::pair(1, 2, 2, -1)};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        VoxelSet s = random_mask(spec, 3000 + seed, 0.3);
        for (const auto& d : dirs) {
            VoxelSet t = steiner(s, d);
            REQUIRE(t.count() == s.count());
            REQUIRE(steiner(t, d).mask == t.mask);
        }
    }
}
