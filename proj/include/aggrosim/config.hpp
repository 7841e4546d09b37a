#ifndef AGGROSIM_CONFIG_HPP
#define AGGROSIM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "aggrosim/chemo.hpp"
#include "aggrosim/diffusion.hpp"
#include "aggrosim/grid.hpp"
#include "aggrosim/integrator.hpp"
#include "aggrosim/kernels.hpp"

namespace aggrosim {

/** Run configuration parsed from the sectioned key=value format:
 * [grid] [kernel] [diffusion] [chemo] [init] [stepper] [run], '#' comments,
 * unknown keys rejected with their line number. */
struct RunConfig {
    GridSpec grid{2, 8.0, 256};
    std::string kernel_spec = "newtonian";
    std::string diffusion_spec = "linear";
    std::string chemo_spec = "convolution";
    std::string a_spec = "const:1";
    std::string gamma_spec = "const:1";
    std::vector<GaussianSpec> init;
    StepperConfig stepper;
    double t_end = 10.0;
    int observe_every = 20;
    std::string out_dir;
    std::uint64_t seed = 0;
};

class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& msg, int line)
        : std::runtime_error("config line " + std::to_string(line) + ": " + msg), line_no(line) {}
    explicit ConfigError(const std::string& msg) : std::runtime_error("config: " + msg), line_no(0) {}
    int line_no;
};

/** Parses and validates; every component spec is instantiated once so that
 * invariant violations (e.g. gamma == 0 with d = 2 elliptic chemo) surface
 * here. */
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/** Canonical dump; parse(dump(cfg)) is a fixed point. */
std::string dump_config(const RunConfig& cfg);

Kernel make_kernel(const RunConfig& cfg);
DiffusionModel make_diffusion(const RunConfig& cfg);
ChemoModel make_chemo(const RunConfig& cfg);
ScalarField make_initial(const RunConfig& cfg);

}  // namespace aggrosim

#endif
