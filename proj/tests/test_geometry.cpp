#include "doctest.h"
#include "vws/geometry.hpp"

#include <cmath>
#include <random>

using namespace vws;

namespace {

std::shared_ptr<Grid> make_grid(int nx = 48, int nz = 24) {
    return std::make_shared<Grid>(nx, nz, 2.0 * M_PI);
}

SurfaceField cosx(const Grid& g, double a) {
    SurfaceField s(g.nx());
    for (int i = 0; i < g.nx(); ++i) s[i] = a * std::cos(g.x(i));
    return s;
}

// smooth random volume field from a few trig-poly modes
VolumeField random_volume(const Grid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    VolumeField f(g);
    for (int k = 0; k <= 3; ++k) {
        double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
        for (int iz = 0; iz < g.nz(); ++iz) {
            double z = g.z(iz);
            double pz = 1.0 + c * z + d * z * z;
            for (int ix = 0; ix < g.nx(); ++ix) {
                double kx = k * g.x(ix);
                f.at(ix, iz) += (a * std::cos(kx) + b * std::sin(kx)) * pz;
            }
        }
    }
    return f;
}

}  // namespace

TEST_CASE("build_geometry basics and errors") {
    auto grid = make_grid();
    const Grid& g = *grid;

    // flat surface
    GeometryCache G0 = build_geometry(grid, SurfaceField(g.nx()), 1.0, 1.0, 0.05);
    CHECK(max_abs(G0.sigma) == 0.0);
    CHECK(max_abs(G0.Nmu_x) < 1e-14);
    for (int i = 0; i < g.nx(); ++i) CHECK(G0.h[i] == doctest::Approx(1.0));

    // sigma boundary values for zeta = 0.1 cos x, eps = 1
    GeometryCache G = build_geometry(grid, cosx(g, 0.1), 1.0, 1.0, 0.05);
    for (int i = 0; i < g.nx(); ++i) {
        CHECK(G.sigma.at(i, g.nz() - 1) == doctest::Approx(0.0));
        CHECK(G.sigma.at(i, 0) == doctest::Approx(0.1 * std::cos(g.x(i))));
    }
    // dz sigma independent of z
    for (int iz = 1; iz < g.nz(); ++iz)
        for (int i = 0; i < g.nx(); ++i)
            CHECK(std::abs(G.dzsigma.at(i, iz) - G.dzsigma.at(i, 0)) < 1e-13);

    // forced violation
    SurfaceField deep(g.nx(), -1.01);
    CHECK_THROWS_AS(build_geometry(grid, deep, 1.0, 1.0, 0.05), DepthVanishes);
}

TEST_CASE("sigma derivatives") {
    auto grid = make_grid();
    const Grid& g = *grid;

    // flat: sigma ops equal flat ops
    GeometryCache G0 = build_geometry(grid, SurfaceField(g.nx()), 0.5, 0.7, 0.05);
    VolumeField f = random_volume(g, 21);
    CHECK(max_abs(sigma_derivative(f, Axis::X, G0) - dx(g, f)) < 1e-13 * max_abs(f));
    CHECK(max_abs(sigma_derivative(f, Axis::Z, G0) - dz(g, f)) < 1e-12 * max_abs(f));

    // F = z + sigma (physical vertical coordinate pulled back)
    GeometryCache G = build_geometry(grid, cosx(g, 0.1), 1.0, 0.5, 0.05);
    VolumeField F(g);
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) F.at(ix, iz) = g.z(iz) + G.sigma.at(ix, iz);
    VolumeField dzs = sigma_derivative(F, Axis::Z, G);
    CHECK(max_abs(dzs - VolumeField(g, 1.0)) < 1e-10);
    CHECK(max_abs(sigma_derivative(F, Axis::X, G)) < 1e-10);
}

TEST_CASE("scaled operators: curl of grad, div of curl") {
    auto grid = make_grid();
    const Grid& g = *grid;
    GeometryCache G = build_geometry(grid, cosx(g, 0.08), 1.0, 0.6, 0.05);

    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        unsigned seed = rng();
        VolumeField F = random_volume(g, seed);
        VectorVolumeField grad = scaled_grad(F, G);
        double scale = std::max(1.0, max_abs(grad));
        CHECK(max_abs(scaled_curl(grad, G)) < 1e-9 * scale);

        VectorVolumeField A;
        A.x = random_volume(g, seed + 1);
        A.y = random_volume(g, seed + 2);
        A.z = random_volume(g, seed + 3);
        VectorVolumeField curl = scaled_curl(A, G);
        CHECK(max_abs(scaled_div(curl, G)) < 1e-9 * std::max(1.0, max_abs(curl)));
    }
}

TEST_CASE("manufactured divergence-free pair on the flat strip") {
    auto grid = make_grid(64, 24);
    const Grid& g = *grid;
    GeometryCache G = build_geometry(grid, SurfaceField(g.nx()), 1.0, 1.0, 0.05);

    // U = (sin x (z+1)^2, 0, w) with w = -cos x ((z+1)^3/3 - 1/3) makes
    // scaled_div U = dx Ux + dz w vanish (mu = 1, flat)
    VectorVolumeField U(g);
    for (int iz = 0; iz < g.nz(); ++iz) {
        double zp = 1.0 + g.z(iz);
        for (int ix = 0; ix < g.nx(); ++ix) {
            U.x.at(ix, iz) = std::sin(g.x(ix)) * zp * zp;
            U.z.at(ix, iz) = -std::cos(g.x(ix)) * (zp * zp * zp / 3.0 - 1.0 / 3.0);
        }
    }
    CHECK(max_abs(scaled_div(U, G)) < 1e-10);
}

TEST_CASE("traces and tangential trace") {
    auto grid = make_grid();
    const Grid& g = *grid;

    VolumeField c(g, 3.25);
    CHECK(max_abs(trace(c, Where::Surface) - SurfaceField(g.nx(), 3.25)) < 1e-15);
    CHECK(max_abs(trace(c, Where::Bottom) - SurfaceField(g.nx(), 3.25)) < 1e-15);

    VolumeField lin(g);
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) lin.at(ix, iz) = 1.0 + g.z(iz);
    CHECK(max_abs(trace(lin, Where::Surface) - SurfaceField(g.nx(), 1.0)) < 1e-15);
    CHECK(max_abs(trace(lin, Where::Bottom)) < 1e-15);

    VolumeField ce(g);
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) ce.at(ix, iz) = std::cos(g.x(ix)) * std::exp(g.z(iz));
    SurfaceField bot = trace(ce, Where::Bottom);
    for (int i = 0; i < g.nx(); ++i)
        CHECK(bot[i] == doctest::Approx(std::cos(g.x(i)) / M_E).epsilon(1e-12));

    // tangential trace: flat zeta returns surface traces; w=1, V=0, zeta=cos x
    // (depth degenerates to zero at x=pi; the trace formula does not divide by h)
    GeometryCache G = build_geometry(grid, cosx(g, 1.0), 1.0, 1.0, 0.0);
    VectorVolumeField U(g);
    for (auto& v : U.z.v) v = 1.0;
    TangentialTrace t = tangential_trace(U, G);
    for (int i = 0; i < g.nx(); ++i) {
        CHECK(t.x[i] == doctest::Approx(-std::sin(g.x(i))).epsilon(1e-10));
        CHECK(t.y[i] == doctest::Approx(0.0));
    }
}

TEST_CASE("good unknown") {
    auto grid = make_grid();
    const Grid& g = *grid;
    SurfaceField psi(g.nx()), zeta(g.nx()), w(g.nx(), 1.0);
    for (int i = 0; i < g.nx(); ++i) {
        psi[i] = std::sin(g.x(i));
        zeta[i] = std::cos(g.x(i));
    }
    // psi_(1) = cos x - 1*( -sin x ) = cos x + sin x
    SurfaceField p1 = good_unknown(g, psi, zeta, w, 1, 1.0);
    for (int i = 0; i < g.nx(); ++i)
        CHECK(p1[i] == doctest::Approx(std::cos(g.x(i)) + std::sin(g.x(i))).epsilon(1e-12));

    // zeta constant -> d^a psi; w = 0 -> d^a psi
    SurfaceField zc(g.nx(), 0.37);
    CHECK(max_abs(good_unknown(g, psi, zc, w, 2, 1.0) - dx_n(g, psi, 2)) < 1e-12);
    SurfaceField w0(g.nx());
    CHECK(max_abs(good_unknown(g, psi, zeta, w0, 3, 1.0) - dx_n(g, psi, 3)) < 1e-12);
}

TEST_CASE("weighted integration by parts") {
    auto grid = make_grid(48, 28);
    const Grid& g = *grid;
    GeometryCache G = build_geometry(grid, cosx(g, 0.1), 1.0, 0.8, 0.05);

    std::mt19937 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        VolumeField F = random_volume(g, rng());
        VectorVolumeField Gv;
        Gv.x = random_volume(g, rng());
        Gv.y = random_volume(g, rng());
        Gv.z = random_volume(g, rng());

        VectorVolumeField gradF = scaled_grad(F, G);
        VolumeField divG = scaled_div(Gv, G);
        double lhs = integral_weighted(gradF.x * Gv.x + gradF.y * Gv.y + gradF.z * Gv.z, G) +
                     integral_weighted(F * divG, G);

        // boundary terms: int_surf F (G . Nmu) dx - int_bot F G_z dx
        SurfaceField Fs = trace(F, Where::Surface), Fb = trace(F, Where::Bottom);
        SurfaceField GNs = G.Nmu_x * trace(Gv.x, Where::Surface) + trace(Gv.z, Where::Surface);
        double rhs = inner_x(g, Fs, GNs) - inner_x(g, Fb, trace(Gv.z, Where::Bottom));
        CHECK(std::abs(lhs - rhs) < 1e-8 * std::max(1.0, std::abs(lhs)));
    }
}
