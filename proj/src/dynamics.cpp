#include "vws/dynamics.hpp"

#include <cmath>

namespace vws {

void Params::validate() const {
    if (!(eps > 0.0)) throw ConfigError("Params: eps must be positive");
    if (!(mu > 0.0)) throw ConfigError("Params: mu must be positive");
    if (!(Lx > 0.0)) throw ConfigError("Params: Lx must be positive");
    if (nx < 8 || nx % 2 != 0) throw ConfigError("Params: nx must be even and >= 8");
    if (nz < 5) throw ConfigError("Params: nz must be >= 5");
    if (dt < 0.0) throw ConfigError("Params: dt must be >= 0");
    if (dt == 0.0 && !(cfl > 0.0)) throw ConfigError("Params: cfl must be positive");
    if (!(tol_div > 0.0) || !(tol_mean > 0.0) || !(krylov_tol > 0.0))
        throw ConfigError("Params: tolerances must be positive");
    if (!(h_min > 0.0)) throw ConfigError("Params: h_min must be positive");
    if (N_energy < 1) throw ConfigError("Params: N_energy must be >= 1");
    if (clean_every < 1) throw ConfigError("Params: clean_every must be >= 1");
}

Stepper::Stepper(const Params& p)
    : p_(p), grid_(std::make_shared<Grid>(p.nx, p.nz, p.Lx)), ws_(grid_, p.mu) {
    p_.validate();
}

GeometryCache Stepper::geometry(const SurfaceField& zeta) const {
    return build_geometry(grid_, zeta, p_.eps, p_.mu, p_.h_min);
}

namespace {
// the kernel modes of the periodic div-curl problem are uniform horizontal
// currents; they are carried by the state and added after reconstruction
void add_uniform_current(DivCurlSolution& sol, double mx, double my) {
    if (mx != 0.0) {
        for (auto& v : sol.U.x.v) v += mx;
        for (auto& v : sol.Vx_s.v) v += mx;
        for (auto& v : sol.Vx_b.v) v += mx;
        for (auto& v : sol.Upar_x.v) v += mx;
    }
    if (my != 0.0) {
        for (auto& v : sol.U.y.v) v += my;
        for (auto& v : sol.Vy_s.v) v += my;
        for (auto& v : sol.Vy_b.v) v += my;
        for (auto& v : sol.Upar_y.v) v += my;
    }
}
}  // namespace

DivCurlSolution Stepper::reconstruct(const State& s) const {
    GeometryCache G = geometry(s.zeta);
    DivCurlSolution sol = reconstruct_velocity(ws_, G, s.psi, s.omega, p_.divcurl_options());
    add_uniform_current(sol, s.mx, s.my);
    return sol;
}

// RK stage vectors carry an O(dt^2) sigma-divergence because the straightened
// divergence operator moves with zeta; the strict tolerance applies to the
// cleaned step-boundary states, not to stage inputs.
DivCurlOptions Stepper::stage_options() const {
    DivCurlOptions o = p_.divcurl_options();
    o.tol_div = std::max(o.tol_div, 1e-3);
    o.tol_mean = std::max(o.tol_mean, 1e-7);
    return o;
}

VolumeField Stepper::vertical_advection_coeff(const GeometryCache& G,
                                              const DivCurlSolution& sol) const {
    const Grid& g = *grid_;
    SurfaceField gdn = generalized_DN(sol, G);
    VolumeField a(g);
    for (int iz = 0; iz < g.nz(); ++iz) {
        const double zp1 = 1.0 + g.z(iz);
        for (int ix = 0; ix < g.nx(); ++ix) {
            double UdotN = -G.mu * G.dxsigma.at(ix, iz) * sol.U.x.at(ix, iz) + sol.U.z.at(ix, iz);
            a.at(ix, iz) = (UdotN - zp1 * G.mu * gdn[ix]) / G.h[ix];
        }
    }
    return a;
}

VectorVolumeField Stepper::advect_vorticity(const State& s, const GeometryCache& G,
                                            const DivCurlSolution& sol) const {
    const Grid& g = *grid_;
    const double eps = p_.eps, mu = p_.mu, smu = std::sqrt(mu);

    VolumeField a = vertical_advection_coeff(G, sol);

    VolumeField dsxVx = sigma_derivative(sol.U.x, Axis::X, G);
    VolumeField dszVx = sigma_derivative(sol.U.x, Axis::Z, G);
    VolumeField dsxVy = sigma_derivative(sol.U.y, Axis::X, G);
    VolumeField dszVy = sigma_derivative(sol.U.y, Axis::Z, G);
    VolumeField dsxw = sigma_derivative(sol.U.z, Axis::X, G);
    VolumeField dszw = sigma_derivative(sol.U.z, Axis::Z, G);

    VectorVolumeField out(g);
    const VolumeField* comps[3] = {&s.omega.x, &s.omega.y, &s.omega.z};
    VolumeField* outc[3] = {&out.x, &out.y, &out.z};
    for (int c = 0; c < 3; ++c) {
        VolumeField ox = dx(g, *comps[c]);
        VolumeField oz = dz(g, *comps[c]);
        for (int iz = 0; iz < g.nz(); ++iz)
            for (int ix = 0; ix < g.nx(); ++ix)
                outc[c]->at(ix, iz) = -eps * sol.U.x.at(ix, iz) * ox.at(ix, iz) -
                                      (eps / mu) * a.at(ix, iz) * oz.at(ix, iz);
    }
    // stretching (eps/mu) (omega . grad^{sigma,mu}) U^mu per component
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) {
            const double o1 = s.omega.x.at(ix, iz), o3 = s.omega.z.at(ix, iz);
            out.x.at(ix, iz) += eps * o1 * dsxVx.at(ix, iz) + (eps / smu) * o3 * dszVx.at(ix, iz);
            out.y.at(ix, iz) += eps * o1 * dsxVy.at(ix, iz) + (eps / smu) * o3 * dszVy.at(ix, iz);
            out.z.at(ix, iz) +=
                (eps / smu) * o1 * dsxw.at(ix, iz) + (eps / mu) * o3 * dszw.at(ix, iz);
        }
    return out;
}

Tendencies Stepper::rhs(const State& s, const GeometryCache& G,
                        const DivCurlSolution& sol) const {
    const Grid& g = *grid_;
    const double eps = p_.eps, mu = p_.mu;

    Tendencies out;
    out.dzeta = dealias(g, generalized_DN(sol, G), p_.filter);

    SurfaceField omegaN = omega_dot_Nmu_surface(s.omega, G);
    SurfaceField coupling = omegaN * sol.Vy_s;
    double cm = mean(g, coupling);
    for (auto& v : coupling.v) v -= cm;
    SurfaceField lifted = inv_dx(g, coupling, 1e-6);

    // x-averaged tangential momentum: the zero-mode currents feel the mean
    // vorticity coupling (the gradient terms average to zero)
    out.dmx = eps * cm;
    out.dmy = -eps * mean(g, omegaN * sol.Vx_s);

    SurfaceField dpsi(g.nx());
    for (int i = 0; i < g.nx(); ++i) {
        const double upar2 = sol.Upar_x[i] * sol.Upar_x[i] + sol.Upar_y[i] * sol.Upar_y[i];
        const double zx = G.dxzeta[i];
        const double wfac = (1.0 + eps * eps * mu * zx * zx) * sol.w_s[i] * sol.w_s[i];
        dpsi[i] = -s.zeta[i] - 0.5 * eps * upar2 + 0.5 * (eps / mu) * wfac + eps * lifted[i];
    }
    double m = mean(g, dpsi);
    for (auto& v : dpsi.v) v -= m;
    out.dpsi = dealias(g, dpsi, p_.filter);

    out.domega = dealias(g, advect_vorticity(s, G, sol), p_.filter);
    return out;
}

Tendencies Stepper::rhs(const State& s, DivCurlSolution* sol_out) const {
    GeometryCache G = geometry(s.zeta);
    DivCurlSolution sol = reconstruct_velocity(ws_, G, s.psi, s.omega, stage_options());
    add_uniform_current(sol, s.mx, s.my);
    Tendencies t = rhs(s, G, sol);
    if (sol_out) *sol_out = std::move(sol);
    return t;
}

double Stepper::cfl_dt(const GeometryCache& G, const DivCurlSolution& sol) const {
    const Grid& g = *grid_;
    const double smu = std::sqrt(p_.mu);
    // gravity-wave phase-speed bound from the flat dispersion relation,
    // attained at the smallest nonzero wavenumber
    const double k1 = g.k(1);
    const double cg = std::sqrt(std::tanh(smu * k1) / (smu * k1));
    double dt = p_.cfl * g.dx() / cg;

    double vmax = max_abs(sol.U.x);
    if (vmax > 0.0) dt = std::min(dt, p_.cfl * g.dx() / (p_.eps * vmax));
    VolumeField a = vertical_advection_coeff(G, sol);
    double amax = max_abs(a);
    if (amax > 0.0) dt = std::min(dt, p_.cfl * p_.mu * g.dz_min() / (p_.eps * amax));
    return dt;
}

State Stepper::step(const State& s, double dt, bool clean_omega) const {
    GeometryCache G1 = geometry(s.zeta);
    DivCurlSolution sol1 = reconstruct_velocity(ws_, G1, s.psi, s.omega, stage_options());
    add_uniform_current(sol1, s.mx, s.my);
    if (dt <= 0.0) dt = (p_.dt > 0.0) ? p_.dt : cfl_dt(G1, sol1);

    Tendencies k1 = rhs(s, G1, sol1);

    auto advance = [&](const Tendencies& k, double factor) {
        State r;
        r.t = s.t + factor;
        r.zeta = s.zeta;
        r.psi = s.psi;
        r.omega = s.omega;
        r.mx = s.mx + factor * k.dmx;
        r.my = s.my + factor * k.dmy;
        axpy(factor, k.dzeta, r.zeta);
        axpy(factor, k.dpsi, r.psi);
        axpy(factor, k.domega, r.omega);
        return r;
    };

    State s2 = advance(k1, 0.5 * dt);
    Tendencies k2 = rhs(s2);
    State s3 = advance(k2, 0.5 * dt);
    Tendencies k3 = rhs(s3);
    State s4 = advance(k3, dt);
    Tendencies k4 = rhs(s4);

    State out;
    out.t = s.t + dt;
    out.zeta = s.zeta;
    out.psi = s.psi;
    out.omega = s.omega;
    const double c = dt / 6.0;
    out.mx = s.mx + c * (k1.dmx + 2.0 * k2.dmx + 2.0 * k3.dmx + k4.dmx);
    out.my = s.my + c * (k1.dmy + 2.0 * k2.dmy + 2.0 * k3.dmy + k4.dmy);
    axpy(c, k1.dzeta, out.zeta);
    axpy(2.0 * c, k2.dzeta, out.zeta);
    axpy(2.0 * c, k3.dzeta, out.zeta);
    axpy(c, k4.dzeta, out.zeta);
    axpy(c, k1.dpsi, out.psi);
    axpy(2.0 * c, k2.dpsi, out.psi);
    axpy(2.0 * c, k3.dpsi, out.psi);
    axpy(c, k4.dpsi, out.psi);
    axpy(c, k1.domega, out.omega);
    axpy(2.0 * c, k2.domega, out.omega);
    axpy(2.0 * c, k3.domega, out.omega);
    axpy(c, k4.domega, out.omega);

    if (clean_omega) {
        GeometryCache Gout = geometry(out.zeta);
        out.omega = project_div_free(ws_, Gout, out.omega, p_.divcurl_options());
    }
    return out;
}

EnergyReport Stepper::energy(const State& s) const {
    GeometryCache G = geometry(s.zeta);
    DivCurlSolution sol = reconstruct_velocity(ws_, G, s.psi, s.omega, p_.divcurl_options());
    add_uniform_current(sol, s.mx, s.my);
    return energy(s, G, sol);
}

EnergyReport Stepper::energy(const State& s, const GeometryCache& G,
                             const DivCurlSolution& sol) const {
    const Grid& g = *grid_;
    const int N = p_.N_energy;
    EnergyReport r;

    r.zeta_HN = 0.5 * sobolev_sq_x(g, s.zeta, N);

    // |P psi|_{H^3}^2 computed spectrally
    {
        auto c = spectrum(g, s.psi);
        const double smu = std::sqrt(p_.mu);
        double total = 0.0;
        for (int j = 0; j < g.nk(); ++j) {
            double k = g.k(j), k2 = k * k;
            double P2 = k2 / std::sqrt(1.0 + smu * k);
            double msum = 0.0, kp = 1.0;
            for (int mo = 0; mo <= 3; ++mo) {
                msum += kp;
                kp *= k2;
            }
            double wgt = (j == 0 || j == g.nx() / 2) ? 1.0 : 2.0;
            total += wgt * P2 * msum * std::norm(c[j]);
        }
        r.Ppsi_H3 = 0.5 * total * g.Lx();
    }

    for (int alpha = 1; alpha <= N; ++alpha) {
        SurfaceField pa = good_unknown(g, s.psi, s.zeta, sol.w_s, alpha, p_.eps);
        SurfaceField Ppa = p_multiplier(g, pa, p_.mu);
        r.good_unknowns += 0.5 * inner_x(g, Ppa, Ppa);
    }

    // H^{N-1} volume norm of the vorticity (flat-strip measure)
    {
        const VolumeField* comps[3] = {&s.omega.x, &s.omega.y, &s.omega.z};
        for (const VolumeField* comp : comps) {
            VolumeField zder = *comp;
            for (int j = 0; j <= N - 1; ++j) {
                if (j > 0) zder = dz(g, zder);
                VolumeField f = zder;
                for (int mo = 0; mo + j <= N - 1; ++mo) {
                    if (mo > 0) f = dx(g, f);
                    r.omega_HNm1 += 0.5 * integral_volume(g, f * f);
                }
            }
        }
    }

    {
        SurfaceField ob = omega_dot_Nb_bottom(s.omega);
        double scale = std::max(1.0, max_abs(ob));
        if (std::abs(mean(g, ob)) > p_.tol_mean * scale)
            throw MeanNotZero("energy: bottom vorticity flux has a nonzero mean");
        SurfaceField wob = h0m_weight(g, ob, p_.mu, p_.tol_mean);
        r.bottom_vorticity = 0.5 * inner_x(g, wob, wob);
    }

    r.total = r.zeta_HN + r.Ppsi_H3 + r.good_unknowns + r.omega_HNm1 + r.bottom_vorticity;

    EnergyParts ep = energy_parts(sol, G);
    r.E_pot = ep.potential;
    r.E_kin = ep.kinetic;
    r.H = ep.total();
    r.min_h = G.min_h;
    r.div_omega = max_abs(scaled_div(s.omega, G));
    return r;
}

SurfaceField rayleigh_taylor(const Grid& g, const SurfaceField& w_s,
                             const SurfaceField& w_s_prev, const SurfaceField& Vx_s, double dt,
                             double eps) {
    SurfaceField dxw = dx(g, w_s);
    SurfaceField a(g.nx());
    for (int i = 0; i < g.nx(); ++i) {
        double dtw = (w_s[i] - w_s_prev[i]) / dt;
        a[i] = 1.0 + eps * (dtw + eps * Vx_s[i] * dxw[i]);
    }
    return a;
}

double min_value(const SurfaceField& f) {
    double m = f.v.empty() ? 0.0 : f.v[0];
    for (double x : f.v) m = std::min(m, x);
    return m;
}

}  // namespace vws
