#include "support/testutil.hpp"
#include "vws/hamiltonian.hpp"
#include <cstdio>
#include <random>

using namespace vws;
using namespace vws::testutil;

int main() {
    Params p; p.eps = 1.0; p.mu = 0.7; p.nx = 48; p.nz = 24;
    Stepper st(p);
    const Grid& g = *st.grid();
    std::mt19937 rng(3);
    State s;
    s.zeta = smooth_surface(g, rng, 3, 0.04);
    s.psi = smooth_surface(g, rng, 3, 0.04);
    GeometryCache G0 = st.geometry(s.zeta);
    s.omega = 0.04 * admissible_vorticity(G0, rng, 2, 2);

    Functional H = make_total_energy(st);
    Direction dir;
    dir.dzeta = smooth_surface(g, rng, 3, 1.0);
    dir.dpsi = smooth_surface(g, rng, 3, 1.0);
    dir.domega = admissible_vorticity(G0, rng, 2, 2);

    auto probe = [&](bool z, bool ps, bool om, const char* name) {
        Direction d;
        d.dzeta = z ? dir.dzeta : SurfaceField(g.nx());
        d.dpsi = ps ? dir.dpsi : SurfaceField(g.nx());
        d.domega = om ? dir.domega : VectorVolumeField(g);
        FdReport r = fd_check(H, st, s, d, {1e-3, 1e-4, 1e-5});
        std::printf("%-8s min_rel=%.3e slope=%.2f errors:", name, r.min_rel_error, r.slope);
        for (double e : r.errors) std::printf(" %.2e", e);
        std::printf("\n");
    };
    probe(true, false, false, "zeta");
    probe(false, true, false, "psi");
    probe(false, false, true, "omega");
    return 0;
}
