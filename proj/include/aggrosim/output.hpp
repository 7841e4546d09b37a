#ifndef AGGROSIM_OUTPUT_HPP
#define AGGROSIM_OUTPUT_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aggrosim/chemo.hpp"
#include "aggrosim/diagnostics.hpp"
#include "aggrosim/grid.hpp"

namespace aggrosim {

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);

/** Serializes the diagnostics ledger in the fixed column order
 * t,mass,linf,l2,lp_guard,m2,free_energy,dissipation,entropy,interaction. */
std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& series);

/** Atomic write (write to <path>.tmp, fsync-free rename); no partially
 * written file survives an error. */
void atomic_write(const std::string& path, const std::string& content);

struct OutputManifest {
    std::vector<std::pair<std::string, std::uint64_t>> files;  // name, fnv1a64
};

/** Writes diagnostics.csv, the snapshot files and MANIFEST.txt under dir;
 * returns the manifest. Deterministic given identical series/snapshots. */
OutputManifest write_outputs(const std::vector<DiagnosticsRecord>& series,
                             const std::vector<std::pair<std::string, ScalarField>>& snapshots,
                             const std::string& dir);

std::string verify_trials_jsonl(const std::vector<VerifyTrial>& trials);
std::string verify_trials_csv(const std::vector<VerifyTrial>& trials);

}  // namespace aggrosim

#endif
