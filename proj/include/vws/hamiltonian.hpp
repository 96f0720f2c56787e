#pragma once

// Energy functional, variational gradients, the operator J, Poisson-bracket
// evaluation and trajectory-consistency checks.

#include "vws/dynamics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vws {

struct Gradient {
    SurfaceField dzeta;
    SurfaceField dpsi;
    VectorVolumeField domega;  // paired against the (1+dz sigma)-weighted volume integral
};

// an admissible functional: evaluation plus its three gradient maps (the
// omega-gradient is divergence-free with zero bottom trace)
struct Functional {
    std::string name;
    std::function<double(const State&)> value;
    std::function<Gradient(const State&)> gradient;
    bool admissible = true;
};

EnergyParts total_energy(const Stepper& st, const State& s);

// gradient of the total energy:
//   dH/dzeta = zeta + (eps/2)|U_par|^2 - (eps/2mu)(1+eps^2 mu zx^2) w_s^2
//              + eps sqrt(mu) omega2_s invdx(gdn)
//   dH/dpsi  = gdn
//   dH/domega = curl_inverse of the mu-weighted velocity triple
// (valid for states with zero mean currents)
Gradient grad_total_energy(const Stepper& st, const State& s);

Functional make_mass(const Stepper& st);
Functional make_total_energy(const Stepper& st);
Functional make_linear_observable(const Stepper& st, const SurfaceField& phi,
                                  const std::string& name = "linear");

// horizontal momentum int int V_x (1+dz sigma): diagnostic only (its
// omega-gradient is not representable on the torus, see notes)
double momentum_x(const Stepper& st, const State& s);

struct FdReport {
    double min_rel_error = 0.0;
    double min_abs_error = 0.0;
    double slope = 0.0;  // observed order in h of the FD error
    std::vector<double> errors;
};

struct Direction {
    SurfaceField dzeta;
    SurfaceField dpsi;
    VectorVolumeField domega;
};

// central-difference directional derivative against the gradient pairing
FdReport fd_check(const Functional& F, const Stepper& st, const State& s, const Direction& dir,
                  const std::vector<double>& h_list);

double poisson_bracket(const Functional& F, const Functional& G, const Stepper& st,
                       const State& s);

// J applied to a gradient triple (the rows of the Hamiltonian operator)
struct JApplied {
    SurfaceField dzeta;
    SurfaceField dpsi;
    VectorVolumeField domega;
};
JApplied apply_J(const Stepper& st, const State& s, const Gradient& g);

// residuals of rhs == J grad H per row (psi-row compared mean-free; the
// omega-row compares the Eulerian tendency dt^sigma omega)
struct JConsistency {
    double zeta_row = 0.0;
    double psi_row = 0.0;
    double omega_row = 0.0;
};
JConsistency j_consistency(const Stepper& st, const State& s);

struct TrajectoryConsistency {
    double max_rel_mismatch = 0.0;
    std::vector<double> mismatches;
};
// centered dF/dt along stored snapshots versus {F,H} at the midpoints
TrajectoryConsistency hamiltonian_consistency(const std::vector<State>& traj,
                                              const Functional& F, const Stepper& st);

}  // namespace vws
