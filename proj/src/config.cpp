#include "aggrosim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aggrosim {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("malformed number '" + v + "'", line);
    }
}

long parse_int(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("malformed integer '" + v + "'", line);
    }
}

// "mass=1,center=(0,0),width=4"
GaussianSpec parse_gaussian(const std::string& v, int dim, int line) {
    GaussianSpec g;
    bool saw_mass = false, saw_width = false;
    std::size_t pos = 0;
    while (pos < v.size()) {
        std::size_t eq = v.find('=', pos);
        if (eq == std::string::npos) throw ConfigError("gaussian: expected key=value in '" + v + "'", line);
        std::string key = trim(v.substr(pos, eq - pos));
        std::size_t end;
        std::string val;
        if (key == "center") {
            std::size_t open = v.find('(', eq), close = v.find(')', eq);
            if (open == std::string::npos || close == std::string::npos)
                throw ConfigError("gaussian: center needs (..)", line);
            val = v.substr(open + 1, close - open - 1);
            end = close + 1;
            std::stringstream ss(val);
            std::string tok;
            int ax = 0;
            while (std::getline(ss, tok, ',')) {
                if (ax >= dim) throw ConfigError("gaussian: too many center coordinates", line);
                g.center[ax++] = parse_double(trim(tok), line);
            }
            if (ax != dim) throw ConfigError("gaussian: center needs dim coordinates", line);
        } else {
            end = v.find(',', eq);
            if (end == std::string::npos) end = v.size();
            val = trim(v.substr(eq + 1, end - eq - 1));
            if (key == "mass") {
                g.mass = parse_double(val, line);
                saw_mass = true;
            } else if (key == "width") {
                g.eps = parse_double(val, line);
                saw_width = true;
            } else {
                throw ConfigError("gaussian: unknown key '" + key + "'", line);
            }
        }
        pos = (end < v.size() && v[end] == ',') ? end + 1 : end;
    }
    if (!saw_mass || !saw_width) throw ConfigError("gaussian: needs mass=, center=, width=", line);
    if (!(g.mass > 0)) throw ConfigError("gaussian: mass must be > 0", line);
    if (!(g.eps > 0)) throw ConfigError("gaussian: width must be > 0", line);
    return g;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.init.clear();
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            section = line.substr(1, line.size() - 2);
            if (section != "grid" && section != "kernel" && section != "diffusion" &&
                section != "chemo" && section != "init" && section != "stepper" && section != "run")
                throw ConfigError("unknown section [" + section + "]", line_no);
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (section == "grid") {
            if (key == "dim") cfg.grid.dim = static_cast<int>(parse_int(val, line_no));
            else if (key == "half_width") cfg.grid.half_width = parse_double(val, line_no);
            else if (key == "cells") cfg.grid.cells_per_axis = static_cast<int>(parse_int(val, line_no));
            else throw ConfigError("unknown key '" + key + "' in [grid]", line_no);
        } else if (section == "kernel") {
            if (key == "kernel") cfg.kernel_spec = val;
            else throw ConfigError("unknown key '" + key + "' in [kernel]", line_no);
        } else if (section == "diffusion") {
            if (key == "diffusion") cfg.diffusion_spec = val;
            else throw ConfigError("unknown key '" + key + "' in [diffusion]", line_no);
        } else if (section == "chemo") {
            if (key == "chemo") cfg.chemo_spec = val;
            else if (key == "a") cfg.a_spec = val;
            else if (key == "gamma") cfg.gamma_spec = val;
            else throw ConfigError("unknown key '" + key + "' in [chemo]", line_no);
        } else if (section == "init") {
            if (key == "gaussian") cfg.init.push_back(parse_gaussian(val, cfg.grid.dim, line_no));
            else throw ConfigError("unknown key '" + key + "' in [init]", line_no);
        } else if (section == "stepper") {
            auto& st = cfg.stepper;
            if (key == "cfl_advect") st.cfl_advect = parse_double(val, line_no);
            else if (key == "diff_theta") st.diff_theta = parse_double(val, line_no);
            else if (key == "dt_max") st.dt_max = parse_double(val, line_no);
            else if (key == "dt_min") st.dt_min = parse_double(val, line_no);
            else if (key == "blowup_linf_factor") st.blowup_linf_factor = parse_double(val, line_no);
            else if (key == "blowup_lp") st.blowup_lp = parse_double(val, line_no);
            else if (key == "picard_sweeps") st.picard_sweeps = static_cast<int>(parse_int(val, line_no));
            else if (key == "cg_tol") st.cg_tol = parse_double(val, line_no);
            else if (key == "elliptic_tol") st.elliptic_tol = parse_double(val, line_no);
            else if (key == "boundary_mass_tol") st.boundary_mass_tol = parse_double(val, line_no);
            else throw ConfigError("unknown key '" + key + "' in [stepper]", line_no);
        } else if (section == "run") {
            if (key == "t_end") cfg.t_end = parse_double(val, line_no);
            else if (key == "observe_every") cfg.observe_every = static_cast<int>(parse_int(val, line_no));
            else if (key == "out") cfg.out_dir = val;
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val, line_no));
            else throw ConfigError("unknown key '" + key + "' in [run]", line_no);
        } else {
            throw ConfigError("key outside of any section", line_no);
        }
    }
    // defaults and validation
    if (cfg.init.empty()) cfg.init.push_back(GaussianSpec{1.0, {0, 0, 0}, 1.0});
    cfg.grid.validate();
    cfg.stepper.validate();
    double total_mass = 0.0;
    for (const auto& b : cfg.init) total_mass += b.mass;
    if (!(total_mass > 0)) throw ConfigError("total initial mass must be > 0");
    if (!(cfg.t_end >= 0)) throw ConfigError("t_end must be >= 0");
    // instantiate every component once so invariants surface at parse time
    make_kernel(cfg);
    make_diffusion(cfg);
    make_chemo(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream o;
    o << "[grid]\n";
    o << "dim = " << cfg.grid.dim << "\n";
    o << "half_width = " << fmt(cfg.grid.half_width) << "\n";
    o << "cells = " << cfg.grid.cells_per_axis << "\n";
    o << "[kernel]\n";
    o << "kernel = " << cfg.kernel_spec << "\n";
    o << "[diffusion]\n";
    o << "diffusion = " << cfg.diffusion_spec << "\n";
    o << "[chemo]\n";
    o << "chemo = " << cfg.chemo_spec << "\n";
    o << "a = " << cfg.a_spec << "\n";
    o << "gamma = " << cfg.gamma_spec << "\n";
    o << "[init]\n";
    for (const auto& b : cfg.init) {
        o << "gaussian = mass=" << fmt(b.mass) << ",center=(" << fmt(b.center[0]) << ","
          << fmt(b.center[1]);
        if (cfg.grid.dim == 3) o << "," << fmt(b.center[2]);
        o << "),width=" << fmt(b.eps) << "\n";
    }
    o << "[stepper]\n";
    const auto& st = cfg.stepper;
    o << "cfl_advect = " << fmt(st.cfl_advect) << "\n";
    o << "diff_theta = " << fmt(st.diff_theta) << "\n";
    o << "dt_max = " << fmt(st.dt_max) << "\n";
    o << "dt_min = " << fmt(st.dt_min) << "\n";
    o << "blowup_linf_factor = " << fmt(st.blowup_linf_factor) << "\n";
    o << "blowup_lp = " << fmt(st.blowup_lp) << "\n";
    o << "picard_sweeps = " << st.picard_sweeps << "\n";
    o << "cg_tol = " << fmt(st.cg_tol) << "\n";
    o << "elliptic_tol = " << fmt(st.elliptic_tol) << "\n";
    o << "boundary_mass_tol = " << fmt(st.boundary_mass_tol) << "\n";
    o << "[run]\n";
    o << "t_end = " << fmt(cfg.t_end) << "\n";
    o << "observe_every = " << cfg.observe_every << "\n";
    if (!cfg.out_dir.empty()) o << "out = " << cfg.out_dir << "\n";
    o << "seed = " << cfg.seed << "\n";
    return o.str();
}

Kernel make_kernel(const RunConfig& cfg) { return parse_kernel_spec(cfg.kernel_spec, cfg.grid.dim); }

DiffusionModel make_diffusion(const RunConfig& cfg) { return parse_diffusion_spec(cfg.diffusion_spec); }

ChemoModel make_chemo(const RunConfig& cfg) {
    if (cfg.chemo_spec == "convolution") return ChemoModel::convolution(make_kernel(cfg));
    if (cfg.chemo_spec == "elliptic") {
        ScalarField a = parse_coefficient_spec(cfg.a_spec, cfg.grid);
        ScalarField gamma = parse_coefficient_spec(cfg.gamma_spec, cfg.grid);
        try {
            return ChemoModel::elliptic(std::move(a), std::move(gamma));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    throw ConfigError("chemo must be 'convolution' or 'elliptic', got '" + cfg.chemo_spec + "'");
}

ScalarField make_initial(const RunConfig& cfg) { return gaussian_field(cfg.grid, cfg.init); }

}  // namespace aggrosim
