#include "support/testutil.hpp"
#include "vws/dynamics.hpp"

#include <cstdio>
#include <random>

using namespace vws;
using namespace vws::testutil;

int main() {
    Params p;
    p.eps = 1.0;
    p.mu = 0.6;
    p.nx = 48;
    p.nz = 24;
    p.filter.enabled = false;  // isolate the continuous-system energy balance
    p.tol_div = 1e-2;
    p.tol_mean = 1e-5;
    Stepper st(p);
    const Grid& g = *st.grid();
    std::mt19937 rng(47);

    State s;
    s.zeta = smooth_surface(g, rng, 3, 0.03);
    s.psi = smooth_surface(g, rng, 3, 0.03);
    GeometryCache G = st.geometry(s.zeta);
    s.omega = 0.03 * admissible_vorticity(G, rng, 2, 2);

    Tendencies t = st.rhs(s);

    auto H_of = [&](const State& q) { return st.energy(q).H; };

    auto advance = [&](const State& q, const Tendencies& k, double h, bool zp, bool om) {
        State r = q;
        if (zp) {
            axpy(h, k.dzeta, r.zeta);
            axpy(h, k.dpsi, r.psi);
            r.mx += h * k.dmx;
            r.my += h * k.dmy;
        }
        if (om) axpy(h, k.domega, r.omega);
        return r;
    };

    const double h = 1e-6;
    double H0 = H_of(s);
    auto probe = [&](bool zp, bool om, const char* name) {
        double Hp = H_of(advance(s, t, h, zp, om));
        double Hm = H_of(advance(s, t, -h, zp, om));
        std::printf("%-12s dH/dt = %+.6e  (H = %.6e)\n", name, (Hp - Hm) / (2 * h), H0);
    };
    probe(true, true, "full");
    probe(true, false, "zeta+psi");
    probe(false, true, "omega");

    // component-isolated cases (constructed admissibly)
    auto omega2_only = [&](std::mt19937& r) {
        VectorVolumeField om(g);
        om.y = smooth_volume(g, r, 2, 2);
        return om;
    };
    auto omega13_only = [&](std::mt19937& r, const GeometryCache& Gc) {
        VolumeField Vy = smooth_volume(g, r, 2, 2);
        for (int iz = 0; iz < g.nz(); ++iz) {
            double zp = 1.0 + g.z(iz);
            for (int ix = 0; ix < g.nx(); ++ix) Vy.at(ix, iz) *= zp;
        }
        VectorVolumeField om(g);
        om.x = (-1.0 / std::sqrt(p.mu)) * sigma_derivative(Vy, Axis::Z, Gc);
        om.z = sigma_derivative(Vy, Axis::X, Gc);
        return om;
    };
    {
        State s2 = s;
        s2.omega = 0.05 * omega2_only(rng);
        Tendencies t2 = st.rhs(s2);
        double Hp2 = H_of(advance(s2, t2, h, true, true));
        double Hm2 = H_of(advance(s2, t2, -h, true, true));
        std::printf("%-12s dH/dt = %+.6e  (H = %.6e)\n", "omega2-only",
                    (Hp2 - Hm2) / (2 * h), H_of(s2));
    }
    {
        State s3 = s;
        s3.omega = 0.05 * omega13_only(rng, G);
        Tendencies t3 = st.rhs(s3);
        double Hp3 = H_of(advance(s3, t3, h, true, true));
        double Hm3 = H_of(advance(s3, t3, -h, true, true));
        std::printf("%-12s dH/dt = %+.6e  (H = %.6e)\n", "omega13-only",
                    (Hp3 - Hm3) / (2 * h), H_of(s3));
    }
    {   // flat surface, omega13 only
        State s4 = s;
        s4.zeta = SurfaceField(g.nx());
        GeometryCache G4 = st.geometry(s4.zeta);
        s4.omega = 0.05 * omega13_only(rng, G4);
        Tendencies t4 = st.rhs(s4);
        double Hp4 = H_of(advance(s4, t4, h, true, true));
        double Hm4 = H_of(advance(s4, t4, -h, true, true));
        std::printf("%-12s dH/dt = %+.6e  (H = %.6e)\n", "flat om13",
                    (Hp4 - Hm4) / (2 * h), H_of(s4));
    }
    {   // flat surface, omega2 only
        State s5 = s;
        s5.zeta = SurfaceField(g.nx());
        s5.omega = 0.05 * omega2_only(rng);
        Tendencies t5 = st.rhs(s5);
        double Hp5 = H_of(advance(s5, t5, h, true, true));
        double Hm5 = H_of(advance(s5, t5, -h, true, true));
        std::printf("%-12s dH/dt = %+.6e  (H = %.6e)\n", "flat om2",
                    (Hp5 - Hm5) / (2 * h), H_of(s5));
    }
    // irrotational comparison
    State si = s;
    si.omega = VectorVolumeField(g);
    Tendencies ti = st.rhs(si);
    double Hi0 = H_of(si);
    double Hp = H_of(advance(si, ti, h, true, false));
    double Hm = H_of(advance(si, ti, -h, true, false));
    std::printf("%-12s dH/dt = %+.6e  (H = %.6e)\n", "irrot", (Hp - Hm) / (2 * h), Hi0);
    return 0;
}
