#include "doctest.h"
#include "support/testutil.hpp"
#include "vws/hamiltonian.hpp"

#include <cmath>
#include <random>

using namespace vws;
using namespace vws::testutil;

namespace {

Params ham_params(double mu = 0.7, int nx = 48, int nz = 24) {
    Params p;
    p.eps = 1.0;
    p.mu = mu;
    p.nx = nx;
    p.nz = nz;
    return p;
}

State random_state(const Stepper& st, std::mt19937& rng, double amp = 0.04) {
    const Grid& g = *st.grid();
    State s;
    s.t = 0.0;
    s.zeta = smooth_surface(g, rng, 3, amp);
    s.psi = smooth_surface(g, rng, 3, amp);
    GeometryCache G = st.geometry(s.zeta);
    s.omega = amp * admissible_vorticity(G, rng, 2, 2);
    return s;
}

Direction random_direction(const Stepper& st, const State& s, std::mt19937& rng) {
    const Grid& g = *st.grid();
    Direction d;
    d.dzeta = smooth_surface(g, rng, 3, 1.0);
    d.dpsi = smooth_surface(g, rng, 3, 1.0);
    GeometryCache G = st.geometry(s.zeta);
    d.domega = admissible_vorticity(G, rng, 2, 2);
    return d;
}

}  // namespace

TEST_CASE("gradients at rest vanish") {
    Stepper st(ham_params());
    const Grid& g = *st.grid();
    State s;
    s.zeta = SurfaceField(g.nx());
    s.psi = SurfaceField(g.nx());
    s.omega = VectorVolumeField(g);
    Gradient grad = grad_total_energy(st, s);
    CHECK(max_abs(grad.dzeta) < 1e-12);
    CHECK(max_abs(grad.dpsi) < 1e-12);
    CHECK(max_abs(grad.domega) < 1e-12);
}

TEST_CASE("fd_check: mass is exact, energy converges quadratically") {
    Stepper st(ham_params());
    std::mt19937 rng(3);
    State s = random_state(st, rng);
    Direction dir = random_direction(st, s, rng);

    Functional mass = make_mass(st);
    FdReport rm = fd_check(mass, st, s, dir, {1e-2, 1e-3});
    // a linear functional paired against mean-zero directions: both sides zero
    CHECK(rm.min_abs_error < 1e-12);

    Functional H = make_total_energy(st);
    FdReport rh = fd_check(H, st, s, dir, {1e-3, 3e-4, 1e-4, 1e-5, 1e-6});
    CHECK(rh.min_rel_error < 1e-6);
    // quadratic convergence between the two largest steps
    CHECK(rh.slope > 1.5);
    CHECK(rh.slope < 2.5);

    // guard: a non-divergence-free direction is rejected
    Direction bad = dir;
    for (int iz = 0; iz < st.grid()->nz(); ++iz)
        for (int ix = 0; ix < st.grid()->nx(); ++ix)
            bad.domega.z.at(ix, iz) += 0.5 * (1.0 + st.grid()->z(iz));
    CHECK_THROWS_AS(fd_check(H, st, s, bad, {1e-3}), InadmissibleDirection);
}

TEST_CASE("cotangent structure of the energy gradient") {
    Stepper st(ham_params(0.5));
    std::mt19937 rng(7);
    State s = random_state(st, rng);
    const Grid& g = *st.grid();

    Gradient grad = grad_total_energy(st, s);
    GeometryCache G = st.geometry(s.zeta);

    // perp-div of the tangential trace of dH/domega equals dH/dpsi (up to mean)
    TangentialTrace bp = tangential_trace(grad.domega, G);
    SurfaceField lhs = dx(g, (1.0 / std::sqrt(st.params().mu)) * bp.y);
    // note: B_par,y = (1/sqrt(mu)) * B2_surface; tangential_trace already gives
    // the y-trace, so scale accordingly
    SurfaceField rhs = grad.dpsi;
    double m = mean(g, rhs);
    for (auto& v : rhs.v) v -= m;
    CHECK(max_abs(lhs - rhs) < 1e-8 * std::max(1.0, max_abs(rhs)));

    // dH/domega is divergence-free; its bottom normal trace vanishes (the
    // tangential bottom trace of this representative need not vanish on the
    // periodic domain - the zero-mode sector again - but the gradient pairing
    // is exact, which fd_check certifies)
    CHECK(divergence_residual(grad.domega, G) < 1e-7);
    CHECK(max_abs(trace(grad.domega.z, Where::Bottom)) < 1e-8);

    // curl of the gradient reproduces the mu-weighted velocity
    DivCurlSolution sol = st.reconstruct(s);
    VectorVolumeField c = scaled_curl(grad.domega, G);
    const double smu = std::sqrt(st.params().mu);
    CHECK(max_abs(c.x - smu * sol.U.x) < 1e-8);
    CHECK(max_abs(c.y - smu * sol.U.y) < 1e-8);
    CHECK(max_abs(c.z - sol.U.z) < 1e-8);
}

TEST_CASE("irrotational gradient reduces to the DN value") {
    Stepper st(ham_params());
    const Grid& g = *st.grid();
    std::mt19937 rng(11);
    State s;
    s.zeta = smooth_surface(g, rng, 3, 0.05);
    s.psi = smooth_surface(g, rng, 3, 0.05);
    s.omega = VectorVolumeField(g);

    Gradient grad = grad_total_energy(st, s);
    DivCurlSolution sol = st.reconstruct(s);
    GeometryCache G = st.geometry(s.zeta);
    SurfaceField gdn = generalized_DN(sol, G);
    CHECK(max_abs(grad.dpsi - gdn) < 1e-10 * std::max(1.0, max_abs(gdn)));
}

TEST_CASE("poisson bracket: diagonal, mass conservation, antisymmetry") {
    Stepper st(ham_params(0.6));
    std::mt19937 rng(13);
    State s = random_state(st, rng);
    const Grid& g = *st.grid();

    Functional H = make_total_energy(st);
    Functional mass = make_mass(st);

    double hh = poisson_bracket(H, H, st, s);
    double hscale = std::max(1.0, std::abs(H.value(s)));
    CHECK(std::abs(hh) < 1e-12 * hscale);

    double mh = poisson_bracket(mass, H, st, s);
    CHECK(std::abs(mh) < 1e-10);

    // antisymmetry over random admissible pairs: linear observables and energy
    for (int trial = 0; trial < 20; ++trial) {
        Functional A = make_linear_observable(st, smooth_surface(g, rng, 3, 1.0), "A");
        Functional B = (trial % 2 == 0)
                           ? make_linear_observable(st, smooth_surface(g, rng, 3, 1.0), "B")
                           : make_total_energy(st);
        double ab = poisson_bracket(A, B, st, s);
        double ba = poisson_bracket(B, A, st, s);
        double scale = std::max({std::abs(ab), std::abs(ba), 1e-12});
        CHECK(std::abs(ab + ba) < 1e-11 * scale / std::min(1.0, scale) * scale);
        CHECK(std::abs(ab + ba) <= 1e-11 * std::max(1.0, scale));
    }
}

TEST_CASE("Zakharov reduction at zero vorticity") {
    Stepper st(ham_params());
    const Grid& g = *st.grid();
    std::mt19937 rng(17);
    State s;
    s.zeta = smooth_surface(g, rng, 3, 0.05);
    s.psi = smooth_surface(g, rng, 3, 0.05);
    s.omega = VectorVolumeField(g);

    Functional H = make_total_energy(st);
    Functional A = make_linear_observable(st, smooth_surface(g, rng, 3, 1.0), "A");

    Gradient gA = A.gradient(s), gH = H.gradient(s);
    double canonical = inner_x(g, gA.dzeta, gH.dpsi) - inner_x(g, gA.dpsi, gH.dzeta);
    double full = poisson_bracket(A, H, st, s);
    CHECK(std::abs(full - canonical) < 1e-13 * std::max(1.0, std::abs(full)));
}

TEST_CASE("dynamics rhs equals J grad H") {
    Stepper st(ham_params(0.5, 64, 32));
    std::mt19937 rng(19);
    for (int trial = 0; trial < 3; ++trial) {
        State s = random_state(st, rng, 0.03);
        JConsistency r = j_consistency(st, s);
        CHECK(r.zeta_row < 1e-8);
        CHECK(r.psi_row < 1e-8);
        CHECK(r.omega_row < 1e-8);
    }
}

TEST_CASE("trajectory consistency dF/dt = {F,H}") {
    Params p = ham_params(0.8, 32, 16);
    Stepper st(p);
    const Grid& g = *st.grid();
    std::mt19937 rng(23);
    State s = random_state(st, rng, 0.03);

    Functional F = make_linear_observable(st, smooth_surface(g, rng, 2, 1.0), "obs");
    Functional H = make_total_energy(st);
    Functional mass = make_mass(st);

    auto run = [&](double dt, int steps) {
        std::vector<State> traj{s};
        State q = s;
        for (int n = 0; n < steps; ++n) {
            q = st.step(q, dt, true);
            traj.push_back(q);
        }
        return traj;
    };

    auto traj = run(0.02, 12);
    TrajectoryConsistency tc = hamiltonian_consistency(traj, F, st);
    CHECK(tc.max_rel_mismatch < 1e-3);

    auto traj2 = run(0.01, 24);
    TrajectoryConsistency tc2 = hamiltonian_consistency(traj2, F, st);
    CHECK(tc2.max_rel_mismatch < 0.3 * tc.max_rel_mismatch);

    // F = H and F = mass: both sides vanish; compare on the trajectory scale
    TrajectoryConsistency th = hamiltonian_consistency(traj, H, st);
    double Hval = std::abs(H.value(s));
    for (size_t n = 1; n + 1 < traj.size(); ++n) {
        double dH = (H.value(traj[n + 1]) - H.value(traj[n - 1])) / (traj[n + 1].t - traj[n - 1].t);
        CHECK(std::abs(dH) < 1e-7 * std::max(1.0, Hval) / 0.01);
    }
    (void)th;
    for (size_t n = 1; n + 1 < traj.size(); ++n) {
        double dM =
            (mass.value(traj[n + 1]) - mass.value(traj[n - 1])) / (traj[n + 1].t - traj[n - 1].t);
        CHECK(std::abs(dM) < 1e-10);
        CHECK(std::abs(poisson_bracket(mass, H, st, traj[n])) < 1e-10);
    }
}
