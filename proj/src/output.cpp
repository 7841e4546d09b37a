#include "aggrosim/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aggrosim {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("hash: cannot open " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& series) {
    std::ostringstream o;
    o << "t,mass,linf,l2,lp_guard,m2,free_energy,dissipation,entropy,interaction\n";
    for (const auto& r : series) {
        o << fmt(r.t) << ',' << fmt(r.mass) << ',' << fmt(r.linf) << ',' << fmt(r.l2) << ','
          << fmt(r.lp_guard) << ',' << fmt(r.m2) << ',' << fmt(r.free_energy) << ','
          << fmt(r.dissipation) << ',' << fmt(r.entropy) << ',' << fmt(r.interaction) << '\n';
    }
    return o.str();
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("output: cannot open " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("output: short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

OutputManifest write_outputs(const std::vector<DiagnosticsRecord>& series,
                             const std::vector<std::pair<std::string, ScalarField>>& snapshots,
                             const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    OutputManifest man;

    std::string csv = diagnostics_csv(series);
    atomic_write(dir + "/diagnostics.csv", csv);
    man.files.emplace_back("diagnostics.csv", fnv1a64(csv.data(), csv.size()));

    for (const auto& [name, field] : snapshots) {
        const std::string path = dir + "/" + name;
        write_snapshot(field, path + ".tmp");
        fs::rename(path + ".tmp", path);
        man.files.emplace_back(name, fnv1a64_file(path));
    }

    std::ostringstream mo;
    for (const auto& [name, hash] : man.files) {
        char hex[32];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
        mo << hex << "  " << name << "\n";
    }
    atomic_write(dir + "/MANIFEST.txt", mo.str());
    return man;
}

std::string verify_trials_jsonl(const std::vector<VerifyTrial>& trials) {
    std::ostringstream o;
    for (const auto& t : trials) {
        o << "{\"check\":\"" << t.check << "\",\"seed\":" << t.seed << ",\"lhs\":" << fmt(t.lhs)
          << ",\"rhs\":" << fmt(t.rhs) << ",\"ok\":" << (t.ok ? "true" : "false") << "}\n";
    }
    return o.str();
}

std::string verify_trials_csv(const std::vector<VerifyTrial>& trials) {
    std::ostringstream o;
    o << "trial,seed,lhs,rhs,ratio\n";
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& t = trials[i];
        o << i << ',' << t.seed << ',' << fmt(t.lhs) << ',' << fmt(t.rhs) << ','
          << fmt(t.rhs != 0 ? t.lhs / t.rhs : 0.0) << '\n';
    }
    return o.str();
}

}  // namespace aggrosim
