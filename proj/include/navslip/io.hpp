#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "navslip/harness.hpp"
#include "navslip/spectral_scalar.hpp"

namespace navslip {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Field snapshots (layout in docs/snapshot_format.md)

struct FieldSnapshot {
    double time = 0.0;
    std::vector<SpectralScalar> fields;
};

/// Bad magic, unsupported version, truncation or inconsistent sizes.
class SnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

FieldSnapshot make_snapshot(double time, const VelocityState& v);
FieldSnapshot make_snapshot(double time, const BoussinesqState& s);
void write_snapshot(const std::filesystem::path& path, const FieldSnapshot& snap);
FieldSnapshot read_snapshot(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// CSV

/// %.17g, enough to round-trip every double.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a column; throws std::out_of_range if absent.
    std::size_t column(std::string_view name) const;
    /// Parsed numeric column; empty cells become NaN.
    std::vector<double> numbers(std::string_view name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Throws std::runtime_error on unreadable files or ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Configuration

enum class ExperimentKind { SingleRun, Sweep, BoussinesqSweep, EpsilonSweep, LagrangianCheck, Budget };

std::string_view to_string(ExperimentKind k);
bool is_sweep(ExperimentKind k);

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::SingleRun;
    int nx = 32, ny = 32, nz = 32;
    double dt = 1e-3;
    double t_end = 1.0;
    int snapshot_interval = 1;
    double nu = 1e-2;
    double epsilon = 0.0;
    std::vector<double> nus;
    std::vector<double> epsilons;
    DataKind data_class = DataKind::Shear;
    std::optional<double> perturbation_r;
    std::uint64_t perturbation_pattern = 1;
    std::uint64_t seed = 1;
    double amplitude = 1.0;
    bool advection = true;
    bool strict_cfl = false;
    int particles_interior = 64;
    int particles_per_wall = 16;
    int threads = 1;
    std::string output;
    /// Acceptance thresholds, key without the "assert." prefix.
    std::map<std::string, double> asserts;

    Grid grid() const { return Grid(nx, ny, nz); }
    DataClass data() const;
    SolverConfig solver() const;
};

/// Parses key = value text. Unknown keys, bad values and contract
/// violations are all collected into one ValidationError.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Sorted key = value lines of every setting that affects results; the
/// output directory and thread count are left out.
std::string canonical_text(const ExperimentConfig& c);
/// SHA-256 of canonical_text.
std::string run_id(const ExperimentConfig& c);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Orchestration

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2, kExitAcceptance = 3 };

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
    std::string detail;
};

struct DispatchOptions {
    std::filesystem::path output;  // run directory; chosen from the root when empty
    std::filesystem::path output_root = "runs";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool strict = false;
    std::string config_path;
};

struct DispatchResult {
    int exit_code = kExitOk;
    std::filesystem::path run_dir;
    std::vector<Check> checks;
    std::vector<std::string> warnings;
    std::string error;
};

/// Runs the experiment, writes its CSV/snapshot artifacts and manifest.json
/// into a fresh run directory, and evaluates the configured thresholds from
/// the written CSVs.
DispatchResult dispatch(ExperimentConfig config, const DispatchOptions& options, std::ostream& log);

/// Threshold checks recomputed from the CSVs of a run directory.
std::vector<Check> evaluate_checks(const ExperimentConfig& config,
                                   const std::filesystem::path& run_dir);

struct VerifyReport {
    std::vector<std::string> problems;  // missing or corrupt artifacts
    std::vector<Check> checks;
    int exit_code = kExitOk;
};

/// Recomputes artifact checksums and thresholds without re-running.
VerifyReport verify_run(const std::filesystem::path& run_dir);

/// Rate table over several sweep run directories.
struct ReportRow {
    std::filesystem::path run_dir;
    std::string experiment, data_class;
    std::optional<double> perturbation_r;
    std::size_t rows = 0;
    std::optional<RateFit> sup, grad, rho;
    double expected_sup = 2.0, expected_grad = 1.0;
    std::vector<std::string> notes;
};
std::vector<ReportRow> report_sweeps(const std::vector<std::filesystem::path>& run_dirs);
void print_report(const std::vector<ReportRow>& rows, std::ostream& out);

}  // namespace navslip
