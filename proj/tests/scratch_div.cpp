#include "support/testutil.hpp"
#include "vws/dynamics.hpp"

#include <cstdio>
#include <random>

using namespace vws;
using namespace vws::testutil;

int main() {
    Params p;
    p.eps = 1.0;
    p.mu = 0.5;
    p.nx = 32;
    p.nz = 16;
    Stepper st(p);
    const Grid& g = *st.grid();
    std::mt19937 rng(41);

    State s;
    s.zeta = smooth_surface(g, rng, 3, 0.04);
    s.psi = smooth_surface(g, rng, 3, 0.04);
    GeometryCache G = st.geometry(s.zeta);
    s.omega = 0.04 * admissible_vorticity(G, rng, 2, 2);

    std::printf("initial |div omega| = %.3e  (rel %.3e)\n", max_abs(scaled_div(s.omega, G)),
                divergence_residual(s.omega, G));

    DivCurlSolution sol = reconstruct_velocity(st.workspace(), G, s.psi, s.omega,
                                               st.params().divcurl_options());
    VectorVolumeField tend = st.advect_vorticity(s, G, sol);
    VolumeField dtend = scaled_div(tend, G);
    std::printf("|div tendency| = %.3e   |tend| = %.3e\n", max_abs(dtend), max_abs(tend));

    // row profile of the divergence of the tendency
    for (int iz = 0; iz < g.nz(); iz += 3)
        std::printf("  row %2d (z=%+.3f): %.3e\n", iz, g.z(iz), max_abs(row(dtend, iz)));

    // after one projection, where does the residual live?
    VectorVolumeField cleaned = project_div_free(st.workspace(), G, s.omega);
    VolumeField dclean = scaled_div(cleaned, G);
    std::printf("|div cleaned| = %.3e\n", max_abs(dclean));
    for (int iz : {0, 1, g.nz() - 2, g.nz() - 1})
        std::printf("  row %2d: %.3e\n", iz, max_abs(row(dclean, iz)));

    DivCurlOptions relaxed = st.params().divcurl_options();
    relaxed.tol_div = 1.0;
    State s2 = s;
    axpy(0.01, tend, s2.omega);
    GeometryCache G2 = st.geometry(s2.zeta);
    std::printf("after half-step omega: |div| = %.3e rel %.3e\n",
                max_abs(scaled_div(s2.omega, G2)), divergence_residual(s2.omega, G2));
    return 0;
}
