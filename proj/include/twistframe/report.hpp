#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistframe/frames.hpp"
#include "twistframe/heisenberg.hpp"

namespace twistframe::cli {

using ordered_json = nlohmann::ordered_json;

/// Flat run configuration; serializes round-trip stable. Flags override
/// values loaded from a JSON config file.
struct Config {
    double phase_half_width = 8.0;
    int phase_per_unit = 32;
    bool phase_midpoint = true;
    double t_half_width = 4.0;
    int t_per_unit = 16;

    int m_radius = 256;       // lattice sum |m| <= M
    int r_radius = 8;         // bracket sum |r| <= R
    int l_max = 4;
    int k_max = 2;
    int m_max = 2;

    double division_eps = 1e-6;
    double condition_c_threshold = 1e-6;
    std::vector<int> radii = {2, 4, 8, 16};

    std::string out_dir = ".";
    int threads = 1;
    bool timing = false;

    ordered_json to_json() const;
    static Config from_json(const ordered_json& j);
};

struct ResultRow {
    std::string name;
    double value = 0.0;
    double tol = 0.0;
    std::string provenance;
};

struct VerdictRow {
    std::string name;
    std::string status;
};

struct Report {
    std::string command;
    Config config;
    std::vector<ResultRow> results;
    std::vector<VerdictRow> verdicts;
    std::vector<std::string> files;
    std::optional<double> seconds;

    ordered_json to_json() const;
};

/// Deterministic text emitters (fixed float formatting, ordered keys).
void write_json_file(const std::filesystem::path& path, const ordered_json& j);
void write_weight_csv(const std::filesystem::path& path,
                      const spectral::WeightSamples& w);
void write_g_csv(const std::filesystem::path& path,
                 const heisenberg::GSamples& g);
void write_gram_csv(const std::filesystem::path& path,
                    const twisted::GramSection& g);
void write_kernel_csv(const std::filesystem::path& path,
                      const weyl::KernelMatrix& k);
/// JSON sidecar for a kernel CSV: grids, lambda, build provenance.
void write_kernel_sidecar(const std::filesystem::path& path,
                          const weyl::KernelMatrix& k);

/// Named generators used by the CLI: unit-square, rect, gaussian, comb.
SampledFunction make_generator(const std::string& name, const Config& cfg);

/// Entry point behind main(): parses argv, runs a subcommand pipeline,
/// writes the report and data files. Returns 0 on success, 1 on usage
/// errors, 2 on mathematical refusals.
int run(int argc, const char* const* argv);

}  // namespace twistframe::cli
