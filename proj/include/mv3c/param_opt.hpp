#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mv3c/codestream.hpp"
#include "mv3c/volume_io.hpp"

namespace mv3c {

enum class OracleKind { builtin_psnr, builtin_mae, external_command };

// Quality scorer for reconstructed volumes; higher is better. The external
// kind runs `command_template` with {orig} and {recon} substituted (tokens
// split on whitespace, no shell); when no placeholder occurs the two paths
// are appended. The command must exit 0 and print one decimal number.
struct OracleSpec {
  OracleKind kind = OracleKind::builtin_psnr;
  std::string command_template;
  double epsilon = 0.005;      // max tolerated relative degradation
  double timeout_sec = 600.0;
};

OracleSpec oracle_from_string(const std::string& text, double epsilon);

struct SweepRow {
  double candidate_qs = 0.0;
  double achieved_cr = 0.0;
  double score = 0.0;
  bool admissible = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<double> selected_qs;  // empty means "none admissible"
  double reference_score = 0.0;       // uncompressed baseline
};

// Uniform-QS ladder: every subband gets the candidate step; the selected QS
// is the largest candidate whose score degrades by at most epsilon relative
// to the uncompressed reference. Scores aggregate over volumes by mean.
SweepResult lower_corner_sweep(std::span<const Volume> volumes, const EncodeOptions& cfg,
                               std::span<const double> candidates, const OracleSpec& oracle);

// Varies only the subband with the smallest delta (ties broken toward the
// highest subband index, i.e. finest detail), all others fixed at q_min.
SweepResult upper_corner_sweep(std::span<const Volume> volumes, const EncodeOptions& cfg,
                               double q_min, std::span<const double> candidates,
                               const OracleSpec& oracle);

// Scores a reconstruction on disk against the original (raw + sidecar pair
// paths). Builtins compute in-process; the external kind spawns the command.
double run_oracle(const OracleSpec& oracle, const std::string& orig_path,
                  const std::string& recon_path);

}  // namespace mv3c
