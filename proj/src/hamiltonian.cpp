#include "vws/hamiltonian.hpp"

#include <cmath>

namespace vws {

namespace {

// evaluations at perturbed states need slack on the divergence/mean guards
// (perturbing zeta moves the sigma-operators underneath omega)
DivCurlOptions relaxed_options(const Params& p) {
    DivCurlOptions o = p.divcurl_options();
    o.tol_div = std::max(o.tol_div, 1e-3);
    o.tol_mean = std::max(o.tol_mean, 1e-3);
    return o;
}

DivCurlSolution reconstruct_relaxed(const Stepper& st, const State& s, GeometryCache* G_out) {
    GeometryCache G = st.geometry(s.zeta);
    DivCurlSolution sol =
        reconstruct_velocity(st.workspace(), G, s.psi, s.omega, relaxed_options(st.params()));
    if (s.mx != 0.0 || s.my != 0.0) {
        for (auto& v : sol.U.x.v) v += s.mx;
        for (auto& v : sol.U.y.v) v += s.my;
        for (auto& v : sol.Vx_s.v) v += s.mx;
        for (auto& v : sol.Vy_s.v) v += s.my;
        for (auto& v : sol.Vx_b.v) v += s.mx;
        for (auto& v : sol.Vy_b.v) v += s.my;
        for (auto& v : sol.Upar_x.v) v += s.mx;
        for (auto& v : sol.Upar_y.v) v += s.my;
    }
    if (G_out) *G_out = std::move(G);
    return sol;
}

VectorVolumeField mu_triple(const VectorVolumeField& U, double mu) {
    VectorVolumeField C;
    const double smu = std::sqrt(mu);
    C.x = smu * U.x;
    C.y = smu * U.y;
    C.z = U.z;
    return C;
}

}  // namespace

EnergyParts total_energy(const Stepper& st, const State& s) {
    GeometryCache G;
    DivCurlSolution sol = reconstruct_relaxed(st, s, &G);
    return energy_parts(sol, G);
}

Gradient grad_total_energy(const Stepper& st, const State& s) {
    const Grid& g = *st.grid();
    const double eps = st.params().eps, mu = st.params().mu;
    GeometryCache G;
    DivCurlSolution sol = reconstruct_relaxed(st, s, &G);
    SurfaceField gdn = generalized_DN(sol, G);

    Gradient grad;
    grad.dpsi = gdn;

    SurfaceField om2s = trace(s.omega.y, Where::Surface);
    SurfaceField lifted = inv_dx(g, gdn, 1e-6);
    grad.dzeta = SurfaceField(g.nx());
    for (int i = 0; i < g.nx(); ++i) {
        double upar2 = sol.Upar_x[i] * sol.Upar_x[i] + sol.Upar_y[i] * sol.Upar_y[i];
        double zx = G.dxzeta[i];
        double wfac = (1.0 + eps * eps * mu * zx * zx) * sol.w_s[i] * sol.w_s[i];
        grad.dzeta[i] = s.zeta[i] + 0.5 * eps * upar2 - 0.5 * (eps / mu) * wfac +
                        eps * std::sqrt(mu) * om2s[i] * lifted[i];
    }

    DivCurlOptions opts = relaxed_options(st.params());
    CurlInverse ci = curl_inverse_gradient_gauge(st.workspace(), G, mu_triple(sol.U, mu), opts);
    grad.domega = ci.B;
    return grad;
}

Functional make_mass(const Stepper& st) {
    Functional F;
    F.name = "mass";
    const Grid* g = st.grid().get();
    F.value = [g](const State& s) { return integral_x(*g, s.zeta); };
    F.gradient = [g](const State& s) {
        Gradient out;
        out.dzeta = SurfaceField(g->nx(), 1.0);
        out.dpsi = SurfaceField(g->nx());
        out.domega.x = VolumeField(s.omega.x.nx, s.omega.x.nz);
        out.domega.y = out.domega.x;
        out.domega.z = out.domega.x;
        return out;
    };
    return F;
}

Functional make_total_energy(const Stepper& st) {
    Functional F;
    F.name = "energy";
    const Stepper* stp = &st;
    F.value = [stp](const State& s) { return total_energy(*stp, s).total(); };
    F.gradient = [stp](const State& s) { return grad_total_energy(*stp, s); };
    return F;
}

Functional make_linear_observable(const Stepper& st, const SurfaceField& phi,
                                  const std::string& name) {
    Functional F;
    F.name = name;
    const Grid* g = st.grid().get();
    SurfaceField phi_copy = phi;
    F.value = [g, phi_copy](const State& s) { return inner_x(*g, s.zeta, phi_copy); };
    F.gradient = [g, phi_copy](const State& s) {
        Gradient out;
        out.dzeta = phi_copy;
        out.dpsi = SurfaceField(g->nx());
        out.domega.x = VolumeField(s.omega.x.nx, s.omega.x.nz);
        out.domega.y = out.domega.x;
        out.domega.z = out.domega.x;
        return out;
    };
    return F;
}

double momentum_x(const Stepper& st, const State& s) {
    GeometryCache G;
    DivCurlSolution sol = reconstruct_relaxed(st, s, &G);
    return integral_weighted(sol.U.x, G);
}

FdReport fd_check(const Functional& F, const Stepper& st, const State& s, const Direction& dir,
                  const std::vector<double>& h_list) {
    const Grid& g = *st.grid();
    GeometryCache G = st.geometry(s.zeta);

    double zscale = std::max(1.0, max_abs(dir.dzeta));
    double pscale = std::max(1.0, max_abs(dir.dpsi));
    if (std::abs(mean(g, dir.dzeta)) > 1e-10 * zscale)
        throw InadmissibleDirection("fd_check: delta zeta must be mean-zero");
    if (std::abs(mean(g, dir.dpsi)) > 1e-10 * pscale)
        throw InadmissibleDirection("fd_check: delta psi must be mean-zero");
    if (divergence_residual(dir.domega, G) > 1e-6)
        throw InadmissibleDirection("fd_check: delta omega must be sigma-divergence-free");
    SurfaceField dob = omega_dot_Nb_bottom(dir.domega);
    if (std::abs(mean(g, dob)) > 1e-10 * std::max(1.0, max_abs(dob)))
        throw InadmissibleDirection("fd_check: bottom flux of delta omega must be mean-zero");

    Gradient grad = F.gradient(s);
    VolumeField wdot = grad.domega.x * dir.domega.x + grad.domega.y * dir.domega.y +
                       grad.domega.z * dir.domega.z;
    double pairing = inner_x(g, grad.dzeta, dir.dzeta) + inner_x(g, grad.dpsi, dir.dpsi) +
                     integral_weighted(wdot, G);

    // The gradient formulas hold the physical-domain vorticity fixed under
    // zeta-variations, so the straightened omega is transported through the
    // change of the straightening map before the functional is evaluated.
    auto perturbed = [&](double h) {
        State q = s;
        axpy(h, dir.dzeta, q.zeta);
        axpy(h, dir.dpsi, q.psi);
        VectorVolumeField om = s.omega;
        axpy(h, dir.domega, om);
        q.omega = resample_straightened(om, g, s.zeta, q.zeta, st.params().eps);
        return F.value(q);
    };

    FdReport rep;
    rep.min_rel_error = std::numeric_limits<double>::max();
    rep.min_abs_error = std::numeric_limits<double>::max();
    double scale = std::max(std::abs(pairing), 1e-14);
    for (double h : h_list) {
        double fd = (perturbed(h) - perturbed(-h)) / (2.0 * h);
        double aerr = std::abs(fd - pairing);
        rep.errors.push_back(aerr / scale);
        rep.min_rel_error = std::min(rep.min_rel_error, aerr / scale);
        rep.min_abs_error = std::min(rep.min_abs_error, aerr);
    }
    if (h_list.size() >= 2 && rep.errors[0] > 0.0 && rep.errors[1] > 0.0)
        rep.slope = std::log(rep.errors[0] / rep.errors[1]) / std::log(h_list[0] / h_list[1]);
    return rep;
}

double poisson_bracket(const Functional& F, const Functional& G_fun, const Stepper& st,
                       const State& s) {
    const Grid& g = *st.grid();
    const double eps = st.params().eps, mu = st.params().mu;
    GeometryCache G = st.geometry(s.zeta);

    Gradient gF = F.gradient(s);
    Gradient gG = G_fun.gradient(s);

    double canonical = inner_x(g, gF.dzeta, gG.dpsi) - inner_x(g, gF.dpsi, gG.dzeta);

    SurfaceField om2s = trace(s.omega.y, Where::Surface);
    SurfaceField liftG = inv_dx(g, gG.dpsi, 1e-6);
    SurfaceField liftF = inv_dx(g, gF.dpsi, 1e-6);
    double coupling = eps * std::sqrt(mu) *
                      (inner_x(g, om2s * gF.dpsi, liftG) - inner_x(g, om2s * gG.dpsi, liftF));

    // volume term: (eps/mu) int curl(dF/dw) . (curl(dG/dw) x omega) (1+dz sigma)
    VectorVolumeField cF = scaled_curl(gF.domega, G);
    VectorVolumeField cG = scaled_curl(gG.domega, G);
    VolumeField dens(g);
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) {
            double bx = cG.x.at(ix, iz), by = cG.y.at(ix, iz), bz = cG.z.at(ix, iz);
            double ox = s.omega.x.at(ix, iz), oy = s.omega.y.at(ix, iz),
                   oz = s.omega.z.at(ix, iz);
            double rx = by * oz - bz * oy;
            double ry = bz * ox - bx * oz;
            double rz = bx * oy - by * ox;
            dens.at(ix, iz) =
                cF.x.at(ix, iz) * rx + cF.y.at(ix, iz) * ry + cF.z.at(ix, iz) * rz;
        }
    double volume = (eps / mu) * integral_weighted(dens, G);

    return canonical + coupling + volume;
}

JApplied apply_J(const Stepper& st, const State& s, const Gradient& grad) {
    const Grid& g = *st.grid();
    const double eps = st.params().eps, mu = st.params().mu, smu = std::sqrt(mu);
    GeometryCache G = st.geometry(s.zeta);

    JApplied out;
    out.dzeta = grad.dpsi;

    SurfaceField om2s = trace(s.omega.y, Where::Surface);
    SurfaceField omN = omega_dot_Nmu_surface(s.omega, G);

    SurfaceField b = grad.dpsi;
    SurfaceField t1 = om2s * inv_dx(g, b, 1e-6);
    SurfaceField ob = om2s * b;
    double obm = mean(g, ob);
    for (auto& v : ob.v) v -= obm;
    SurfaceField t2 = inv_dx(g, ob, 1e-6);

    VectorVolumeField scC = scaled_curl(grad.domega, G);
    SurfaceField scCN = omega_dot_Nmu_surface(scC, G);
    SurfaceField scC2 = trace(scC.y, Where::Surface);
    SurfaceField cross = om2s * scCN - omN * scC2;
    double cm = mean(g, cross);
    for (auto& v : cross.v) v -= cm;
    SurfaceField t3 = inv_dx(g, cross, 1e-6);

    out.dpsi = SurfaceField(g.nx());
    for (int i = 0; i < g.nx(); ++i)
        out.dpsi[i] = -grad.dzeta[i] + eps * smu * (t1[i] + t2[i]) - (eps / smu) * t3[i];

    VectorVolumeField R(g);
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) {
            double bx = scC.x.at(ix, iz), by = scC.y.at(ix, iz), bz = scC.z.at(ix, iz);
            double ox = s.omega.x.at(ix, iz), oy = s.omega.y.at(ix, iz),
                   oz = s.omega.z.at(ix, iz);
            R.x.at(ix, iz) = by * oz - bz * oy;
            R.y.at(ix, iz) = bz * ox - bx * oz;
            R.z.at(ix, iz) = bx * oy - by * ox;
        }
    out.domega = (eps / mu) * scaled_curl(R, G);
    return out;
}

JConsistency j_consistency(const Stepper& st, const State& s) {
    const Grid& g = *st.grid();
    const double eps = st.params().eps;
    GeometryCache G = st.geometry(s.zeta);

    Gradient grad = grad_total_energy(st, s);
    JApplied jh = apply_J(st, s, grad);
    Tendencies t = st.rhs(s);

    JConsistency r;
    double zscale = std::max(1.0, max_abs(t.dzeta));
    r.zeta_row = max_abs(t.dzeta - jh.dzeta) / zscale;

    SurfaceField dpsi_rhs = t.dpsi;
    SurfaceField dpsi_j = jh.dpsi;
    double m1 = mean(g, dpsi_rhs), m2 = mean(g, dpsi_j);
    for (auto& v : dpsi_rhs.v) v -= m1;
    for (auto& v : dpsi_j.v) v -= m2;
    r.psi_row = max_abs(dpsi_rhs - dpsi_j) / std::max(1.0, max_abs(dpsi_rhs));

    // the rhs advances the straightened components; the Hamiltonian row is the
    // Eulerian tendency dt^sigma omega = dt omega - (dt sigma / h) dz omega
    SurfaceField gdn = t.dzeta;
    VolumeField dtsigma(g);
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix)
            dtsigma.at(ix, iz) = eps * (1.0 + g.z(iz)) * gdn[ix];
    VectorVolumeField eulerian;
    eulerian.x = sigma_derivative_t(t.domega.x, s.omega.x, dtsigma, G);
    eulerian.y = sigma_derivative_t(t.domega.y, s.omega.y, dtsigma, G);
    eulerian.z = sigma_derivative_t(t.domega.z, s.omega.z, dtsigma, G);
    double oscale = std::max(1.0, max_abs(eulerian));
    r.omega_row = max_abs(eulerian - jh.domega) / oscale;
    return r;
}

TrajectoryConsistency hamiltonian_consistency(const std::vector<State>& traj,
                                              const Functional& F, const Stepper& st) {
    TrajectoryConsistency out;
    Functional H = make_total_energy(st);
    for (size_t n = 1; n + 1 < traj.size(); ++n) {
        double dt_c = traj[n + 1].t - traj[n - 1].t;
        double dF = (F.value(traj[n + 1]) - F.value(traj[n - 1])) / dt_c;
        double pb = poisson_bracket(F, H, st, traj[n]);
        double scale = std::max({std::abs(dF), std::abs(pb), 1e-12});
        double mismatch = std::abs(dF - pb) / scale;
        out.mismatches.push_back(mismatch);
        out.max_rel_mismatch = std::max(out.max_rel_mismatch, mismatch);
    }
    return out;
}

}  // namespace vws
