#pragma once

// Shallow-water asymptotics: the nonlinear shallow water system in
// (zeta, Vbar), the vorticity-correction transport for Q, surface-velocity
// reconstruction, and the consistency / justification harness.

#include "vws/dynamics.hpp"

namespace vws {

struct SWState {
    double t = 0.0;
    SurfaceField zeta;
    SurfaceField vbar_x, vbar_y;
    SurfaceField Q_x, Q_y;
};

struct SWTendencies {
    SurfaceField dzeta, dvbar_x, dvbar_y, dQ_x, dQ_y;
};

class SWStepper {
  public:
    explicit SWStepper(const Params& p);

    const Params& params() const { return p_; }
    std::shared_ptr<const Grid> grid() const { return grid_; }

    SWTendencies rhs(const SWState& s) const;  // NSW + Q transport
    double cfl_dt(const SWState& s) const;
    SWState step(const SWState& s, double dt = 0.0) const;

  private:
    Params p_;
    std::shared_ptr<Grid> grid_;
};

// V_surface = Vbar - sqrt(mu) Q
struct SurfacePair {
    SurfaceField x, y;
};
SurfacePair reconstruct_surface_velocity(const SWState& s, double mu);

// depth-averaged horizontal velocity (Clenshaw-Curtis with Jacobian weight)
SurfacePair depth_average(const DivCurlSolution& sol, const GeometryCache& G);

// Q = (1/h) int_{-1}^0 ( int_z^0 (omega_h)^perp h dz' ) h dz
SurfacePair q_from_vorticity(const VectorVolumeField& omega, const GeometryCache& G);

// residuals of the velocity structure
//   V = Vbar + sqrt(mu)(int_z^surf omega_h^perp - Q) + O(mu^{3/2})
//   w = -mu (1+z) h dxx psi + O(mu^{3/2})
struct StructureReport {
    double v_residual = 0.0;  // max over both horizontal components
    double w_residual = 0.0;
};
StructureReport structure_check(const DivCurlSolution& sol, const State& s,
                                const GeometryCache& G);

// one row of the justification error table
struct JustificationRow {
    double mu = 0.0;
    double err_zeta = 0.0;
    double err_vbar = 0.0;
    double err_usurf_uncorrected = 0.0;
    double err_usurf_corrected = 0.0;
    double self_error = 0.0;  // full-model discretization error (resolution doubling)
    double structure_v = 0.0;
    double structure_w = 0.0;
    double runtime_s = 0.0;
};

struct JustificationSetup {
    double T = 0.5;
    double amplitude = 0.05;
    double shear = 0.5;   // omega0 = (shear, 0, 0)
    int nx = 64;
    int nz = 24;
    double Lx = 2.0 * M_PI;
    double cfl = 0.25;
    bool check_self_error = true;
};

std::vector<JustificationRow> justification_harness(const std::vector<double>& mu_list,
                                                    const JustificationSetup& setup);

}  // namespace vws
