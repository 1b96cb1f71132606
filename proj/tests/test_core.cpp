#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wavepilot/core.hpp"
#include "wavepilot/dynamics.hpp"
#include "wavepilot/errors.hpp"

using namespace wavepilot;
using doctest::Approx;

namespace {

Scenario quantum_scenario() {
    Scenario sc;
    sc.units = Units::for_system(System::Quantum);
    return sc;
}

}  // namespace

TEST_CASE("make_bundle samples a five-ray Gaussian") {
    Scenario sc = quantum_scenario();
    sc.beam.ray_count = 5;
    sc.beam.span = 2.0;
    const Bundle b = make_bundle(sc.beam, sc);
    REQUIRE(b.size() == 5);
    const double expect_x[] = {-2, -1, 0, 1, 2};
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(b.rays[j].position.x == Approx(expect_x[j]).epsilon(1e-15));
        CHECK(b.rays[j].position.z == 0.0);
        CHECK(b.rays[j].amplitude == Approx(std::exp(-expect_x[j] * expect_x[j])).epsilon(1e-15));
        CHECK(b.rays[j].launch_index == j);
    }
}

TEST_CASE("make_bundle launches every ray with p = (0, p0)") {
    for (ProfileKind kind : {ProfileKind::Gaussian, ProfileKind::SuperGaussian}) {
        Scenario sc = quantum_scenario();
        sc.beam.kind = kind;
        sc.beam.ray_count = 41;
        const Bundle b = make_bundle(sc.beam, sc);
        for (const auto& r : b.rays) {
            CHECK(r.momentum.x == 0.0);
            CHECK(r.momentum.z == sc.launch_momentum());
        }
    }
    // p0 = 2 pi hbar / lambda0
    CHECK(quantum_scenario().launch_momentum() == Approx(2.0 * kPi / 2e-4));
}

TEST_CASE("a three-sample table cannot feed a five-ray stencil") {
    Scenario sc = quantum_scenario();
    sc.beam.kind = ProfileKind::Table;
    sc.beam.ray_count = 5;
    sc.beam.table_x = {-3, 0, 3};
    sc.beam.table_amplitude = {0, 1, 0};
    CHECK_THROWS_AS(make_bundle(sc.beam, sc), ConfigError);
}

TEST_CASE("non-positive span or momentum is a configuration error") {
    Scenario sc = quantum_scenario();
    sc.beam.span = 0.0;
    CHECK_THROWS_AS(make_bundle(sc.beam, sc), ConfigError);
    sc.beam.span = 3.0;
    sc.lambda0 = -1.0;
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc.beam.ray_count = 4;
    CHECK_THROWS_AS(sc.beam.validate(), ConfigError);
}

TEST_CASE("launch spacings follow the Voronoi convention and mirror exactly") {
    for (ProfileKind kind : {ProfileKind::Gaussian, ProfileKind::SuperGaussian}) {
        Scenario sc = quantum_scenario();
        sc.beam.kind = kind;
        sc.beam.ray_count = 37;
        sc.beam.span = 2.7;
        const Bundle b = make_bundle(sc.beam, sc);
        const std::size_t n = b.size();
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t m = n - 1 - j;
            CHECK(b.rays[j].position.x == -b.rays[m].position.x);
            CHECK(b.rays[j].amplitude == b.rays[m].amplitude);
            CHECK(b.launch_spacings[j] == b.launch_spacings[m]);
            CHECK(b.launch_spacings[j] > 0.0);
        }
        const double h = 2.0 * 2.7 / 36.0;
        CHECK(b.launch_spacings[10] == Approx(h).epsilon(1e-12));
        CHECK(b.launch_spacings[0] == Approx(h).epsilon(1e-12));
    }
    const auto w = voronoi_widths({0.0, 1.0, 3.0, 4.0});
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 1.5);
    CHECK(w[2] == 1.5);
    CHECK(w[3] == 1.0);
}

TEST_CASE("table profiles interpolate linearly") {
    BeamProfile p;
    p.kind = ProfileKind::Table;
    p.table_x = {-2, -1, 0, 1, 2};
    p.table_amplitude = {0, 0.5, 1, 0.5, 0};
    p.span = 2.0;
    p.ray_count = 9;
    CHECK_NOTHROW(p.validate());
    CHECK(p.amplitude(0.5) == Approx(0.75));
    CHECK(p.amplitude(-1.5) == Approx(0.25));
    p.span = 2.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("de Broglie wavenumbers") {
    const Units q = Units::for_system(System::Quantum);
    CHECK(de_broglie_wavenumber_sq(0.5, 0.0, 1.0, System::Quantum, q) == Approx(1.0));

    const Units rel = Units::for_system(System::Relativistic, 3.0);
    const double e = 20.0;
    const double expect = std::pow(e / 3.0, 2) - std::pow(1.0 * 3.0, 2);
    CHECK(de_broglie_wavenumber_sq(e, 0.0, 1.0, System::Relativistic, rel) == Approx(expect));

    const Units ml = Units::for_system(System::Massless, 2.0);
    const double k2 = de_broglie_wavenumber_sq(e, e / 2, 0.0, System::Massless, ml);
    // (omega n / c)^2 with omega = E / hbar and n = 1 - V/E = 1/2
    const double omega = e / ml.hbar;
    CHECK(k2 == Approx(std::pow(omega * 0.5 / ml.c, 2)));
    CHECK(k2 == Approx(std::pow(e / (2.0 * ml.hbar * ml.c), 2)));

    CHECK_THROWS_AS(de_broglie_wavenumber_sq(0.5, 1.0, 1.0, System::Quantum, q), EvanescentError);
    CHECK_THROWS_AS(de_broglie_wavenumber_sq(1.0, 0.0, 1.0, System::EM, q), ConfigError);
}

TEST_CASE("quantum wavenumber is the low-energy limit of the relativistic one") {
    const double c = 1e4;
    const Units q = Units::for_system(System::Quantum);
    const Units rel = Units::for_system(System::Relativistic, c);
    const double rest = c * c;
    for (double ratio : {1e-5, 5e-5, 9e-5}) {
        const double kinetic = ratio * rest;
        const double kq = de_broglie_wavenumber_sq(kinetic, 0.0, 1.0, System::Quantum, q);
        const double kr = de_broglie_wavenumber_sq(kinetic + rest, 0.0, 1.0, System::Relativistic, rel);
        CHECK(std::abs(kr - kq) / kq <= 1e-4);
        CHECK(std::abs(kr - kq) / kq == Approx(ratio / 2).epsilon(1e-3));
        // first-order expansion of the relativistic value
        const double first_order = kq * (1.0 + kinetic / (2.0 * rest));
        CHECK(std::abs(kr - first_order) / kr <= 1e-6);
    }
}

TEST_CASE("eval_medium on analytic fields") {
    const FieldSample u = eval_medium(Medium::vacuum_index(), {3.0, -7.0});
    CHECK(u.value == 1.0);
    CHECK(u.gradient.x == 0.0);
    CHECK(u.gradient.z == 0.0);

    const Medium osc{MediumKind::Potential, QuadraticField{0.0, 1.0, 0.0, {}}, {}};
    const FieldSample s = eval_medium(osc, {2.0, 5.0});
    CHECK(s.value == Approx(2.0));
    CHECK(s.gradient.x == Approx(2.0));
    CHECK(s.gradient.z == 0.0);
}

TEST_CASE("tabulated fields reject queries beyond their box") {
    TableField t;
    t.x_min = -1;
    t.x_max = 1;
    t.z_min = 0;
    t.z_max = 2;
    t.nx = 3;
    t.nz = 3;
    t.values = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    const Medium m{MediumKind::Potential, t, {}};
    CHECK_NOTHROW(eval_medium(m, {0.5, 1.0}));
    CHECK_THROWS_AS(eval_medium(m, {1.5, 1.0}), OutOfDomainError);
    CHECK_THROWS_AS(eval_medium(m, {0.0, -0.1}), OutOfDomainError);

    const Medium boxed{MediumKind::Potential, UniformField{0.0}, {-1, 1, -1, 1}};
    CHECK_THROWS_AS(eval_medium(boxed, {0.0, 2.0}), OutOfDomainError);

    const Medium negative{MediumKind::Index, UniformField{-0.5}, {}};
    CHECK_THROWS(eval_medium(negative, {0.0, 0.0}));
}

TEST_CASE("medium gradients agree with central differences") {
    const std::vector<Medium> media = {
        {MediumKind::Potential, QuadraticField{0.3, 1.7, -0.4, {0.2, -0.1}}, {}},
        {MediumKind::Potential, LinearField{1.0, {0.25, -2.0}}, {}},
        {MediumKind::Index, GaussianField{1.0, 0.2, {0.1, 0.3}, 0.8}, {}},
    };
    const double h = 1e-5;
    for (const auto& m : media) {
        for (Vec2 p : {Vec2{0.3, 0.7}, Vec2{-1.1, 0.2}, Vec2{0.9, -0.6}}) {
            const FieldSample s = eval_medium(m, p);
            const double gx = (eval_medium(m, {p.x + h, p.z}).value - eval_medium(m, {p.x - h, p.z}).value) / (2 * h);
            const double gz = (eval_medium(m, {p.x, p.z + h}).value - eval_medium(m, {p.x, p.z - h}).value) / (2 * h);
            const double scale = std::max(norm(s.gradient), 1e-12);
            CHECK(std::abs(gx - s.gradient.x) / scale <= 1e-6);
            CHECK(std::abs(gz - s.gradient.z) / scale <= 1e-6);
        }
    }
    // bilinear table inside one cell
    TableField t{0, 1, 0, 1, 2, 2, {1.0, 2.0, 3.0, 5.0}};
    const Medium tm{MediumKind::Potential, t, {}};
    const Vec2 p{0.4, 0.6};
    const FieldSample s = eval_medium(tm, p);
    const double gx = (eval_medium(tm, {p.x + h, p.z}).value - eval_medium(tm, {p.x - h, p.z}).value) / (2 * h);
    CHECK(std::abs(gx - s.gradient.x) / norm(s.gradient) <= 1e-6);
}

TEST_CASE("scenarios reject forbidden launch regions and mixed units") {
    Scenario sc = quantum_scenario();
    sc.medium = Medium{MediumKind::Potential, QuadraticField{0.0, 1e9, 0.0, {}}, {}};
    CHECK_THROWS_AS(sc.validate(), ConfigError);

    Scenario rel;
    rel.system = System::Relativistic;
    rel.units = Units::for_system(System::Relativistic, 1e7);
    CHECK_NOTHROW(rel.validate());
    CHECK(rel.energy() > rel.units.mass * rel.units.c * rel.units.c);

    Scenario mixed = quantum_scenario();
    mixed.units = Units::for_system(System::EM);
    CHECK_THROWS_AS(mixed.validate(), ConfigError);

    Scenario q = quantum_scenario();
    q.beam.ray_count = 11;
    Bundle b = make_bundle(q.beam, q);
    b.mode = UnitMode::EM;
    CHECK_THROWS_AS(advance(b, q, 1e-6), ConfigError);
}

TEST_CASE("default step lets a Nyquist-momentum ray advance a quarter spacing") {
    Scenario sc = quantum_scenario();
    sc.beam.ray_count = 301;
    const double h0 = 0.02;
    const double p_nyq = kPi / h0;
    CHECK(sc.default_dt() * p_nyq / sc.units.mass == Approx(0.25 * h0));
}
