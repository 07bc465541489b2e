#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "asym/serialize.hpp"

namespace asym {

inline constexpr std::uint64_t kDefaultSeed = 11;

const char* tool_version() noexcept;

struct SuiteOptions {
    std::uint64_t seed = kDefaultSeed;
    double tol_feasible = 1e-7;
    double tol_infeasible = 1e-5;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string summary;
    io::Json details;
    /// Measured by the runner; never written to artifacts.
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

inline constexpr int kCriterionCount = 9;

/// Criteria 1..9: Fisher monotonicity, cloning chain, time-translation and
/// cyclic infeasibility suites, permutation control, block decomposition,
/// ladder degradation, clock limit, coherence non-creation.
CriterionResult run_criterion(int id, const SuiteOptions& options);

/// Writes files below a run directory and remembers their checksums.
class ArtifactWriter {
public:
    struct Artifact {
        std::string path;
        std::string sha256;
        std::size_t bytes = 0;
    };

    explicit ArtifactWriter(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }
    void write(const std::string& relative, const std::string& content);
    const std::vector<Artifact>& artifacts() const noexcept { return artifacts_; }

    /// Writes manifest.json: tool version, config hash, the config itself, the
    /// caller's summary and every artifact with its checksum. Returns the path.
    std::filesystem::path write_manifest(const std::string& command, const io::Json& config, const io::Json& summary);

private:
    std::filesystem::path root_;
    std::vector<Artifact> artifacts_;
};

struct SuiteRun {
    std::vector<CriterionResult> results;
    std::filesystem::path manifest;
    bool all_pass = false;
};

/// Runs criteria 1..9 in order, writing one JSON file per criterion and a
/// manifest. `progress` is called after each criterion when set.
SuiteRun run_suite(const SuiteOptions& options, const std::filesystem::path& out,
                   const std::function<void(const CriterionResult&)>& progress = {});

}  // namespace asym
