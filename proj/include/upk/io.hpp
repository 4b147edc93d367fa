#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "upk/problem.hpp"
#include "upk/solver.hpp"
#include "upk/verify.hpp"

namespace upk {

/// A loaded config file: the problem, the mesh (dt unset) and the scheme settings.
///
///   [domain]  d, L, T, S
///   [flux]    a, phi_1 .. phi_d             (quoted expressions)
///   [source]  beta, tau, gamma, b1          (optional section)
///   [data]    u0_1, u0_2, uS_2
///   [grid]    Nx, Ns, snapshot_stride
///   [scheme]  flux_kind (eo | lf), epsilon, cfl_safety
///   [output]  dir, report
///
/// '#' starts a comment outside quotes. Keys are unique within a section and order does not matter.
struct Config {
    ProblemSpec spec;
    Grid grid;
    RunOptions run;
    double epsilon = 0.0;
    std::string output_dir = "out";
    std::string report_path = "report.csv";
};

/// Throws ParseError (line, column) for syntax, unknown or missing keys and sections, bad values;
/// ValidationError when the problem violates an invariant.
Config parse_config(std::string_view text);
/// As parse_config; IoError when the file cannot be read.
Config load_config(const std::filesystem::path& path);

inline constexpr std::uint32_t kFieldFormatVersion = 1;

/// "UPKF", u32 version, u32 d, u32 Nx, u32 Ns, f64 t, then Nx^d Ns f64 values; all little-endian.
std::string encode_field(const Field& f);
/// Throws FormatError on bad magic, version, header or payload length.
Field decode_field(std::string_view bytes);

void write_field(const std::filesystem::path& path, const Field& f);
Field read_field(const std::filesystem::path& path);

/// One UPKF file per snapshot, index.csv (step, t, file, energy integrals), meta.txt with the run
/// parameters and tau_minus.upkf / tau_plus.upkf when present. Round-trips exactly.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& dir);

/// Header "check,measured,bound,tolerance,pass,context-hash" and one row per report.
std::string format_report_csv(const std::vector<VerificationReport>& reports);
void write_report_csv(const std::filesystem::path& path, const std::vector<VerificationReport>& reports);

}  // namespace upk
