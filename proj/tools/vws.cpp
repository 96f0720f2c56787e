// CLI driver: simulate | divcurl-check | dispersion | justify | hamiltonian

#include "CLI11.hpp"
#include "vws/io_cli.hpp"

#include <cstdlib>

int main(int argc, char** argv) {
    CLI::App app{"free-surface water waves with vorticity (pseudospectral strip solver)"};
    app.require_subcommand(1);

    std::string config, out_dir;
    int threads = 0;
    if (const char* env = std::getenv("VWS_THREADS")) threads = std::atoi(env);

    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--config", config, "path to the JSON config")->required();
        if (with_out) sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--threads", threads, "worker threads for sweeps");
    };

    CLI::App* sim = app.add_subcommand("simulate", "run the full model to T");
    add_common(sim, true);
    CLI::App* dcc = app.add_subcommand("divcurl-check", "manufactured-solution table");
    add_common(dcc, false);
    CLI::App* disp = app.add_subcommand("dispersion", "standing-wave frequency check");
    add_common(disp, false);
    CLI::App* jus = app.add_subcommand("justify", "shallow-water justification sweep");
    add_common(jus, true);
    CLI::App* ham = app.add_subcommand("hamiltonian", "Hamiltonian structure checks");
    add_common(ham, false);

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) return vws::cmd_simulate(config, out_dir);
    if (dcc->parsed()) return vws::cmd_divcurl_check(config);
    if (disp->parsed()) return vws::cmd_dispersion(config);
    if (jus->parsed()) return vws::cmd_justify(config, out_dir, threads);
    if (ham->parsed()) return vws::cmd_hamiltonian(config);
    return 2;
}
