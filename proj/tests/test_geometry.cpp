#include <catch_amalgamated.hpp>

#include "maent/geometry.hpp"

using namespace maent;

TEST_CASE("orbit hull inradius in the plane", "[geometry]") {
    SECTION("C4 orbit of (1,0): inradius of the unit square") {
        const auto orb = orbit(Vec{1.0, 0.0}, group_preset("cyclic:4"));
        REQUIRE_THAT(orbit_hull_inradius(orb),
                     Catch::Matchers::WithinAbs(std::sqrt(2.0) / 2.0, 1e-12));
    }
    SECTION("C8 orbit of (1,0): regular octagon") {
        const auto orb = orbit(Vec{1.0, 0.0}, group_preset("cyclic:8"));
        REQUIRE_THAT(orbit_hull_inradius(orb),
                     Catch::Matchers::WithinAbs(std::cos(M_PI / 8.0), 1e-12));
    }
    SECTION("antipodal orbit degenerates to a segment") {
        const auto orb = orbit(Vec{1.0, 0.0}, group_preset("neg-identity:2"));
        REQUIRE(orbit_hull_inradius(orb) == 0.0);
    }
    SECTION("unit orbits give inradius at most 1") {
        for (const char* name : {"cyclic:3", "cyclic:7", "dihedral:5", "hyperoctahedral:2"}) {
            const auto g = group_preset(name);
            for (const Vec& u : sphere_samples(2, 37)) {
                const double r = orbit_hull_inradius(orbit(u, g));
                REQUIRE(r <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("orbit hull inradius in 3-D", "[geometry]") {
    SECTION("octahedron from hyperoctahedral orbit of e1") {
        const auto orb = orbit(Vec{1.0, 0.0, 0.0}, group_preset("hyperoctahedral:3"));
        REQUIRE(orb.points.size() == 6);
        REQUIRE_THAT(orbit_hull_inradius(orb),
                     Catch::Matchers::WithinAbs(1.0 / std::sqrt(3.0), 1e-10));
    }
    SECTION("cube from the diagonal orbit") {
        const double s = 1.0 / std::sqrt(3.0);
        const auto orb = orbit(Vec{s, s, s}, group_preset("hyperoctahedral:3"));
        REQUIRE(orb.points.size() == 8);
        REQUIRE_THAT(orbit_hull_inradius(orb), Catch::Matchers::WithinAbs(s, 1e-10));
    }
    SECTION("planar orbit in R^3 is degenerate") {
        Mat rot(3);  // C4 rotation in the xy-plane, z fixed
        rot(0, 1) = -1.0;
        rot(1, 0) = 1.0;
        rot(2, 2) = 1.0;
        const auto g = close_group({rot}, 10);
        const auto orb = orbit(Vec{1.0, 0.0, 0.5}, g);
        REQUIRE(orbit_hull_inradius(orb) == 0.0);
    }
}

TEST_CASE("lemma-1 epsilon estimates", "[geometry]") {
    SECTION("cyclic groups: every unit orbit is a congruent m-gon") {
        for (int m : {3, 6, 9}) {
            const auto g = group_preset("cyclic:" + std::to_string(m));
            REQUIRE_THAT(lemma1_epsilon(g, 128),
                         Catch::Matchers::WithinAbs(std::cos(M_PI / m), 1e-9));
        }
    }
    SECTION("neg-identity gives zero") {
        REQUIRE(lemma1_epsilon(group_preset("neg-identity:2"), 64) == 0.0);
    }
    SECTION("hyperoctahedral B2: axis orbits attain sqrt(2)/2") {
        // independent dense scan with its own random directions
        const auto g = group_preset("hyperoctahedral:2");
        std::mt19937_64 rng(12345);
        double brute = std::numeric_limits<double>::infinity();
        for (int s = 0; s < 100000; ++s) {
            const Vec u = random_unit_vector(rng, 2);
            brute = std::min(brute, orbit_hull_inradius(orbit(u, g)));
        }
        REQUIRE_THAT(brute, Catch::Matchers::WithinAbs(std::sqrt(2.0) / 2.0, 1e-3));
        const double eps = lemma1_epsilon(g, 4096);
        REQUIRE(eps >= std::sqrt(2.0) / 2.0 - 1e-9);
        REQUIRE(eps <= 1.0);
        REQUIRE_THAT(eps, Catch::Matchers::WithinAbs(brute, 1e-3));
    }
    SECTION("monotone nonincreasing under sample refinement") {
        const auto g = group_preset("dihedral:3");
        const double e1 = lemma1_epsilon(g, 256);
        const double e2 = lemma1_epsilon(g, 1024);
        REQUIRE(e2 <= e1 + 1e-15);
    }
    SECTION("invariant under conjugation of C6 by a rotation") {
        const auto c6 = group_preset("cyclic:6");
        const Mat q = rotation2d(0.7391);
        std::vector<Mat> gens;
        for (const auto& e : c6.elements) gens.push_back(q.times(e).times(q.transposed()));
        const auto conj = close_group(gens, 32);
        REQUIRE_THAT(lemma1_epsilon(conj, 512),
                     Catch::Matchers::WithinAbs(lemma1_epsilon(c6, 512), 1e-9));
    }
}

TEST_CASE("irreducibility certificate", "[geometry]") {
    SECTION("C8 in the plane is irreducible") {
        const auto cert = check_irreducible(group_preset("cyclic:8"));
        REQUIRE(cert.verdict);
        REQUIRE(cert.span_rank == 2);
        REQUIRE(cert.center_of_mass_norm <= 1e-12);
        REQUIRE(cert.epsilon > 0.9);
    }
    SECTION("block C4 + fixed axis in R^3 is reducible") {
        Mat rot(3);
        rot(0, 1) = -1.0;
        rot(1, 0) = 1.0;
        rot(2, 2) = 1.0;
        const auto cert = check_irreducible(close_group({rot}, 10), 1e-9, 256);
        REQUIRE_FALSE(cert.verdict);
        REQUIRE(cert.epsilon == 0.0);
    }
    SECTION("{+1,-1} acting on R^1") {
        const auto cert = check_irreducible(group_preset("neg-identity:1"));
        REQUIRE(cert.verdict);
        REQUIRE_THAT(cert.epsilon, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    SECTION("verdict implies strictly interior origin for sampled orbits") {
        const auto g = group_preset("dihedral:4");
        const auto cert = check_irreducible(g, 1e-9, 128);
        REQUIRE(cert.verdict);
        for (const Vec& u : sphere_samples(2, 128))
            REQUIRE(orbit_hull_inradius(orbit(u, g)) > 0.0);
    }
    SECTION("full rotation mode is trivially irreducible") {
        const auto cert = check_irreducible(group_preset("full-rotation:2"));
        REQUIRE(cert.verdict);
        REQUIRE_THAT(cert.epsilon, Catch::Matchers::WithinAbs(1.0, 1e-15));
    }
}
