#include "vws/swmodel.hpp"

#include <chrono>
#include <cmath>

namespace vws {

SWStepper::SWStepper(const Params& p) : p_(p), grid_(std::make_shared<Grid>(p.nx, p.nz, p.Lx)) {
    p_.validate();
}

SWTendencies SWStepper::rhs(const SWState& s) const {
    const Grid& g = *grid_;
    const double eps = p_.eps;

    SurfaceField h(g.nx());
    double hmin = std::numeric_limits<double>::max();
    for (int i = 0; i < g.nx(); ++i) {
        h[i] = 1.0 + eps * s.zeta[i];
        hmin = std::min(hmin, h[i]);
    }
    if (hmin < p_.h_min) throw DepthVanishes("nsw_rhs: depth fell below h_min");

    SWTendencies out;
    out.dzeta = dealias(g, (-1.0) * dx(g, h * s.vbar_x), p_.filter);

    SurfaceField vx_x = dx(g, s.vbar_x), vy_x = dx(g, s.vbar_y), z_x = dx(g, s.zeta);
    SurfaceField dvx(g.nx()), dvy(g.nx()), dqx(g.nx()), dqy(g.nx());
    SurfaceField qx_x = dx(g, s.Q_x), qy_x = dx(g, s.Q_y);
    for (int i = 0; i < g.nx(); ++i) {
        dvx[i] = -eps * s.vbar_x[i] * vx_x[i] - z_x[i];
        dvy[i] = -eps * s.vbar_x[i] * vy_x[i];
        dqx[i] = -eps * s.vbar_x[i] * qx_x[i] - eps * s.Q_x[i] * vx_x[i];
        dqy[i] = -eps * s.vbar_x[i] * qy_x[i] - eps * s.Q_x[i] * vy_x[i];
    }
    out.dvbar_x = dealias(g, dvx, p_.filter);
    out.dvbar_y = dealias(g, dvy, p_.filter);
    out.dQ_x = dealias(g, dqx, p_.filter);
    out.dQ_y = dealias(g, dqy, p_.filter);
    return out;
}

double SWStepper::cfl_dt(const SWState& s) const {
    const Grid& g = *grid_;
    double vmax = max_abs(s.vbar_x);
    double hmax = 1.0 + p_.eps * max_abs(s.zeta);
    double speed = std::sqrt(hmax) + p_.eps * vmax;
    return p_.cfl * g.dx() / speed;
}

SWState SWStepper::step(const SWState& s, double dt) const {
    if (dt <= 0.0) dt = (p_.dt > 0.0) ? p_.dt : cfl_dt(s);

    auto advance = [&](const SWState& q, const SWTendencies& k, double f) {
        SWState r = q;
        r.t = q.t + f;
        axpy(f, k.dzeta, r.zeta);
        axpy(f, k.dvbar_x, r.vbar_x);
        axpy(f, k.dvbar_y, r.vbar_y);
        axpy(f, k.dQ_x, r.Q_x);
        axpy(f, k.dQ_y, r.Q_y);
        return r;
    };

    SWTendencies k1 = rhs(s);
    SWState s2 = advance(s, k1, 0.5 * dt);
    SWTendencies k2 = rhs(s2);
    SWState s3 = advance(s, k2, 0.5 * dt);
    SWTendencies k3 = rhs(s3);
    SWState s4 = advance(s, k3, dt);
    SWTendencies k4 = rhs(s4);

    SWState out = s;
    out.t = s.t + dt;
    const double c = dt / 6.0;
    auto comb = [&](SurfaceField& acc, const SurfaceField& a, const SurfaceField& b,
                    const SurfaceField& cc, const SurfaceField& d) {
        axpy(c, a, acc);
        axpy(2.0 * c, b, acc);
        axpy(2.0 * c, cc, acc);
        axpy(c, d, acc);
    };
    comb(out.zeta, k1.dzeta, k2.dzeta, k3.dzeta, k4.dzeta);
    comb(out.vbar_x, k1.dvbar_x, k2.dvbar_x, k3.dvbar_x, k4.dvbar_x);
    comb(out.vbar_y, k1.dvbar_y, k2.dvbar_y, k3.dvbar_y, k4.dvbar_y);
    comb(out.Q_x, k1.dQ_x, k2.dQ_x, k3.dQ_x, k4.dQ_x);
    comb(out.Q_y, k1.dQ_y, k2.dQ_y, k3.dQ_y, k4.dQ_y);
    return out;
}

SurfacePair reconstruct_surface_velocity(const SWState& s, double mu) {
    const double smu = std::sqrt(mu);
    SurfacePair out;
    out.x = s.vbar_x - smu * s.Q_x;
    out.y = s.vbar_y - smu * s.Q_y;
    return out;
}

SurfacePair depth_average(const DivCurlSolution& sol, const GeometryCache& G) {
    const Grid& g = G.g();
    SurfacePair out;
    out.x = SurfaceField(g.nx());
    out.y = SurfaceField(g.nx());
    const auto& w = g.zw();
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) {
            out.x[ix] += w[iz] * sol.U.x.at(ix, iz) * G.h[ix];
            out.y[ix] += w[iz] * sol.U.y.at(ix, iz) * G.h[ix];
        }
    for (int ix = 0; ix < g.nx(); ++ix) {
        out.x[ix] /= G.h[ix];
        out.y[ix] /= G.h[ix];
    }
    return out;
}

namespace {

// inner vertical integral int_z^0 (omega_h)^perp h dz' (physical measure)
void omega_perp_integral(const VectorVolumeField& omega, const GeometryCache& G,
                         VolumeField& Ix, VolumeField& Iy) {
    const Grid& g = G.g();
    VolumeField fx(g), fy(g);
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) {
            // (omega_h)^perp = (-omega_2, omega_1)
            fx.at(ix, iz) = -omega.y.at(ix, iz) * G.h[ix];
            fy.at(ix, iz) = omega.x.at(ix, iz) * G.h[ix];
        }
    // int_z^0 = -int_0^z
    Ix = (-1.0) * z_antiderivative_from_surface(g, fx);
    Iy = (-1.0) * z_antiderivative_from_surface(g, fy);
}

}  // namespace

SurfacePair q_from_vorticity(const VectorVolumeField& omega, const GeometryCache& G) {
    const Grid& g = G.g();
    VolumeField Ix, Iy;
    omega_perp_integral(omega, G, Ix, Iy);
    SurfacePair out;
    out.x = SurfaceField(g.nx());
    out.y = SurfaceField(g.nx());
    const auto& w = g.zw();
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) {
            out.x[ix] += w[iz] * Ix.at(ix, iz) * G.h[ix];
            out.y[ix] += w[iz] * Iy.at(ix, iz) * G.h[ix];
        }
    for (int ix = 0; ix < g.nx(); ++ix) {
        out.x[ix] /= G.h[ix];
        out.y[ix] /= G.h[ix];
    }
    return out;
}

StructureReport structure_check(const DivCurlSolution& sol, const State& s,
                                const GeometryCache& G) {
    const Grid& g = G.g();
    const double smu = std::sqrt(G.mu);

    SurfacePair vbar = depth_average(sol, G);
    SurfacePair Q = q_from_vorticity(s.omega, G);
    VolumeField Ix, Iy;
    omega_perp_integral(s.omega, G, Ix, Iy);

    StructureReport rep;
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) {
            double vx = vbar.x[ix] + smu * (Ix.at(ix, iz) - Q.x[ix]) + s.mx;
            double vy = vbar.y[ix] + smu * (Iy.at(ix, iz) - Q.y[ix]) + s.my;
            rep.v_residual = std::max(rep.v_residual, std::abs(sol.U.x.at(ix, iz) - vx));
            rep.v_residual = std::max(rep.v_residual, std::abs(sol.U.y.at(ix, iz) - vy));
        }

    SurfaceField psixx = dx_n(g, s.psi, 2);
    for (int iz = 0; iz < g.nz(); ++iz) {
        double zp = 1.0 + g.z(iz);
        for (int ix = 0; ix < g.nx(); ++ix) {
            double w_model = -G.mu * zp * G.h[ix] * psixx[ix];
            rep.w_residual = std::max(rep.w_residual, std::abs(sol.U.z.at(ix, iz) - w_model));
        }
    }
    return rep;
}

std::vector<JustificationRow> justification_harness(const std::vector<double>& mu_list,
                                                    const JustificationSetup& setup) {
    std::vector<JustificationRow> table;

    auto run_full = [&](double mu, int nx, int nz, double cfl_scale, double T,
                        State* out_state, Stepper** out_st,
                        std::unique_ptr<Stepper>& holder) {
        Params p;
        p.eps = 1.0;
        p.mu = mu;
        p.Lx = setup.Lx;
        p.nx = nx;
        p.nz = nz;
        p.cfl = setup.cfl * cfl_scale;
        holder = std::make_unique<Stepper>(p);
        Stepper& st = *holder;
        const Grid& g = *st.grid();

        State s;
        s.zeta = SurfaceField(g.nx());
        s.psi = SurfaceField(g.nx());
        for (int i = 0; i < g.nx(); ++i) s.zeta[i] = setup.amplitude * std::cos(g.x(i));
        s.omega = VectorVolumeField(g);
        for (auto& v : s.omega.x.v) v = setup.shear;

        while (s.t < T - 1e-12) {
            GeometryCache G = st.geometry(s.zeta);
            DivCurlSolution sol =
                reconstruct_velocity(st.workspace(), G, s.psi, s.omega, p.divcurl_options());
            double dt = st.cfl_dt(G, sol);
            if (s.t + dt > T) dt = T - s.t;
            s = st.step(s, dt, true);
        }
        *out_state = s;
        *out_st = &st;
    };

    for (double mu : mu_list) {
        auto t0 = std::chrono::steady_clock::now();
        JustificationRow row;
        row.mu = mu;

        // full model
        std::unique_ptr<Stepper> hold;
        Stepper* st = nullptr;
        State sf;
        run_full(mu, setup.nx, setup.nz, 1.0, setup.T, &sf, &st, hold);
        const Grid& g = *st->grid();
        GeometryCache Gf = st->geometry(sf.zeta);
        DivCurlSolution solf = st->reconstruct(sf);
        SurfacePair vbar_full = depth_average(solf, Gf);
        StructureReport srep = structure_check(solf, sf, Gf);
        row.structure_v = srep.v_residual;
        row.structure_w = srep.w_residual;

        // shallow-water model from the matched initial data
        Params psw;
        psw.eps = 1.0;
        psw.mu = mu;
        psw.Lx = setup.Lx;
        psw.nx = setup.nx;
        psw.nz = setup.nz;
        psw.cfl = setup.cfl * 0.5;
        SWStepper sws(psw);
        SWState q;
        q.zeta = SurfaceField(g.nx());
        for (int i = 0; i < g.nx(); ++i) q.zeta[i] = setup.amplitude * std::cos(g.x(i));
        {
            State s0;
            s0.zeta = q.zeta;
            s0.psi = SurfaceField(g.nx());
            s0.omega = VectorVolumeField(g);
            for (auto& v : s0.omega.x.v) v = setup.shear;
            GeometryCache G0 = st->geometry(s0.zeta);
            DivCurlSolution sol0 = reconstruct_velocity(st->workspace(), G0, s0.psi, s0.omega,
                                                        psw.divcurl_options());
            SurfacePair vb0 = depth_average(sol0, G0);
            SurfacePair q0 = q_from_vorticity(s0.omega, G0);
            q.vbar_x = vb0.x;
            q.vbar_y = vb0.y;
            q.Q_x = q0.x;
            q.Q_y = q0.y;
        }
        while (q.t < setup.T - 1e-12) {
            double dt = sws.cfl_dt(q);
            if (q.t + dt > setup.T) dt = setup.T - q.t;
            q = sws.step(q, dt);
        }

        row.err_zeta = max_abs(sf.zeta - q.zeta);
        row.err_vbar =
            std::max(max_abs(vbar_full.x - q.vbar_x), max_abs(vbar_full.y - q.vbar_y));
        SurfacePair usurf = reconstruct_surface_velocity(q, mu);
        row.err_usurf_uncorrected =
            std::max(max_abs(solf.Vx_s - q.vbar_x), max_abs(solf.Vy_s - q.vbar_y));
        row.err_usurf_corrected =
            std::max(max_abs(solf.Vx_s - usurf.x), max_abs(solf.Vy_s - usurf.y));

        if (setup.check_self_error) {
            std::unique_ptr<Stepper> hold2;
            Stepper* st2 = nullptr;
            State sf2;
            run_full(mu, setup.nx * 2, setup.nz + setup.nz / 2, 0.5, setup.T, &sf2, &st2, hold2);
            // compare zeta on the coarse nodes (every second fine node)
            double e = 0.0;
            for (int i = 0; i < g.nx(); ++i)
                e = std::max(e, std::abs(sf.zeta[i] - sf2.zeta[2 * i]));
            row.self_error = e;
        }

        row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        table.push_back(row);
    }
    return table;
}

}  // namespace vws
