#pragma once

// Time evolution of the dimensionless straightened water-waves system with
// vorticity: right-hand side assembly, vorticity transport, divergence
// cleaning, RK4 stepping with CFL control, and the energy diagnostics.

#include "vws/divcurl.hpp"

namespace vws {

struct Params {
    double eps = 1.0;
    double mu = 1.0;
    double Lx = 2.0 * M_PI;
    int nx = 64;
    int nz = 32;
    double dt = 0.0;  // fixed step when > 0, otherwise CFL-based
    double cfl = 0.5;
    FilterSpec filter;
    double tol_div = 1e-8;
    double tol_mean = 1e-12;
    double krylov_tol = 1e-11;
    double h_min = 0.05;
    double a_min = 0.1;
    int N_energy = 3;
    int clean_every = 1;

    void validate() const;
    DivCurlOptions divcurl_options() const {
        DivCurlOptions o;
        o.krylov_tol = krylov_tol;
        o.tol_div = tol_div;
        o.tol_mean = tol_mean;
        return o;
    }
};

struct State {
    double t = 0.0;
    SurfaceField zeta;
    SurfaceField psi;
    VectorVolumeField omega;
    // mean tangential currents (torus zero-mode sector): the x-averages of
    // the horizontal velocity, which (zeta, psi, omega) cannot represent on
    // the periodic domain; they evolve by the x-averaged tangential momentum
    // equation and enter the reconstruction as uniform currents
    double mx = 0.0;
    double my = 0.0;
};

struct Tendencies {
    SurfaceField dzeta, dpsi;
    VectorVolumeField domega;
    double dmx = 0.0, dmy = 0.0;
};

struct EnergyReport {
    // calE_N terms
    double zeta_HN = 0.0;
    double Ppsi_H3 = 0.0;
    double good_unknowns = 0.0;
    double omega_HNm1 = 0.0;
    double bottom_vorticity = 0.0;
    double total = 0.0;
    // physical energy and monitors
    double H = 0.0, E_pot = 0.0, E_kin = 0.0;
    double min_h = 0.0;
    double min_a = 1.0;
    double div_omega = 0.0;
};

class Stepper {
  public:
    explicit Stepper(const Params& p);

    const Params& params() const { return p_; }
    std::shared_ptr<const Grid> grid() const { return grid_; }
    DivCurlWorkspace& workspace() const { return ws_; }

    GeometryCache geometry(const SurfaceField& zeta) const;
    // reconstruction including the uniform mean currents of the state
    DivCurlSolution reconstruct(const State& s) const;

    Tendencies rhs(const State& s, DivCurlSolution* sol_out = nullptr) const;
    // rhs given an existing geometry+reconstruction (used by the RK stages)
    Tendencies rhs(const State& s, const GeometryCache& G, const DivCurlSolution& sol) const;

    // vertical advection speed of the straightened vorticity transport;
    // vanishes at the surface and at the bottom
    VolumeField vertical_advection_coeff(const GeometryCache& G,
                                         const DivCurlSolution& sol) const;
    VectorVolumeField advect_vorticity(const State& s, const GeometryCache& G,
                                       const DivCurlSolution& sol) const;

    double cfl_dt(const GeometryCache& G, const DivCurlSolution& sol) const;
    // one classical RK4 step; dt <= 0 means use params.dt or the CFL bound
    State step(const State& s, double dt = 0.0, bool clean_omega = true) const;

    EnergyReport energy(const State& s) const;
    EnergyReport energy(const State& s, const GeometryCache& G, const DivCurlSolution& sol) const;

  private:
    DivCurlOptions stage_options() const;

    Params p_;
    std::shared_ptr<Grid> grid_;
    mutable DivCurlWorkspace ws_;
};

// Rayleigh-Taylor coefficient 1 + eps*(dt w_s + eps V_s dx w_s) with a
// backward difference in time (monitor; both states need reconstructed traces)
SurfaceField rayleigh_taylor(const Grid& g, const SurfaceField& w_s,
                             const SurfaceField& w_s_prev, const SurfaceField& Vx_s, double dt,
                             double eps);

double min_value(const SurfaceField& f);

}  // namespace vws
