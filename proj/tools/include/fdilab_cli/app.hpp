#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fdilab/lrd_detector.hpp"
#include "fdilab/synth_data.hpp"

namespace fdilab::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kInfeasibleAttack = 3,
    kNumericalFailure = 4,
};

struct CommonOptions {
    std::string case_path = "rts24";  // file path or name of a bundled case
    std::filesystem::path out = ".";
    std::uint64_t seed = 0;
};

struct ValidateArgs {
    CommonOptions common;
};

struct SimulateArgs {
    CommonOptions common;
    TrajectoryConfig trajectory;
};

struct AttackArgs {
    CommonOptions common;
    bool multiplicative = false;
    // Multiplicative
    BusId bus = 0;
    double phase = 0.0;
    double gain = 1.0;
    // Additive
    std::vector<BusId> targets;
    std::vector<std::string> controlled;  // "pmu4" or channel labels such as "I4-3"
    double magnitude = 0.1;
    // Source measurements; simulated from `trajectory` when empty.
    std::filesystem::path measurements;
    TrajectoryConfig trajectory;
    double noise_sigma = 0.0;
    double alpha = 0.05;
};

struct DetectArgs {
    CommonOptions common;
    std::filesystem::path measurements;  // default: <out>/Wbar.csv, else <out>/W.csv
    std::string detectors = "all";       // conventional | enhanced | lrd | all
    LrdConfig lrd;
    std::string lambda_sweep;            // "lo:hi:steps", empty for none
    double noise_sigma = 0.0;
    double alpha = 0.05;
};

struct ReportArgs {
    CommonOptions common;
};

/// Resolves a case argument: an existing file, or the name of a bundled case
/// ("rts24", "case6.grid").
std::filesystem::path resolve_case_path(const std::string& name);

int cmd_validate(const ValidateArgs& args, std::ostream& out);
int cmd_simulate(const SimulateArgs& args, std::ostream& out);
int cmd_attack(const AttackArgs& args, std::ostream& out);
int cmd_detect(const DetectArgs& args, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& args, std::ostream& out);

/// Parses argv, runs the selected command and maps failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "lo:hi:steps".
std::vector<double> parse_lambda_sweep(const std::string& text);

} // namespace fdilab::cli
