#pragma once

// Configuration, run orchestration, reproducible binary/CSV outputs, and the
// verification harnesses behind the CLI subcommands.

#include "vws/hamiltonian.hpp"
#include "vws/swmodel.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace vws {

struct RunConfig {
    std::string scenario = "rest";  // rest | standing_wave | shear_vorticity | manufactured
    Params params;
    double T = 1.0;
    double amplitude = 0.05;
    int mode = 1;
    double strength = 0.5;
    std::string profile = "constant";  // constant | linear
    int out_every = 10;
    std::string out_dir = "out";
    unsigned seed = 1234;
    int threads = 1;
    std::vector<double> mu_list = {0.04, 0.01, 0.0025};

    static RunConfig load(const std::string& path);  // throws ConfigError
};

State initial_state(const RunConfig& cfg, const Stepper& st);

// binary snapshot container, magic "VWS1"
void write_snapshot(const std::string& path, const State& s, const Params& p);
struct Snapshot {
    State state;
    double eps, mu, Lx;
    int nx, nz;
};
Snapshot read_snapshot(const std::string& path);

// dispersion measurement of a small standing wave against the analytic
// relation omega_k^2 = |k| tanh(sqrt(mu)|k|)/sqrt(mu)
struct DispersionResult {
    double omega_measured = 0.0;
    double omega_exact = 0.0;
    double rel_error = 0.0;
};
DispersionResult measure_dispersion(double mu, int k, int nx, int nz, double Lx = 2.0 * M_PI);

// CLI entry points; return process exit codes (0 ok, 2 config error, 3 numerical failure)
int cmd_simulate(const std::string& config_path, const std::string& out_override = "");
int cmd_divcurl_check(const std::string& config_path);
int cmd_dispersion(const std::string& config_path);
int cmd_justify(const std::string& config_path, const std::string& out_override = "",
                int threads = 0);
int cmd_hamiltonian(const std::string& config_path);

}  // namespace vws
