#include "mv3c/param_opt.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>

namespace mv3c {

namespace {

double builtin_score(OracleKind kind, const Volume& orig, const Volume& recon) {
  if (kind == OracleKind::builtin_psnr) return compute_metrics(orig, recon).psnr_db;
  // negative mean absolute error, so that higher stays better
  if (!(orig.dims == recon.dims)) fail(ErrorKind::usage, "oracle: volume dims do not match");
  double acc = 0.0;
  for (std::size_t i = 0; i < orig.voxel_count(); ++i)
    acc += std::abs(orig.value_at(i) - recon.value_at(i));
  return -acc / static_cast<double>(orig.voxel_count());
}

std::vector<std::string> build_argv(const std::string& tmpl, const std::string& orig,
                                    const std::string& recon) {
  std::vector<std::string> args;
  std::istringstream in(tmpl);
  std::string tok;
  bool substituted = false;
  while (in >> tok) {
    std::size_t pos;
    while ((pos = tok.find("{orig}")) != std::string::npos) {
      tok.replace(pos, 6, orig);
      substituted = true;
    }
    while ((pos = tok.find("{recon}")) != std::string::npos) {
      tok.replace(pos, 7, recon);
      substituted = true;
    }
    args.push_back(tok);
  }
  if (args.empty()) fail(ErrorKind::oracle, "oracle: empty command template");
  if (!substituted) {
    args.push_back(orig);
    args.push_back(recon);
  }
  return args;
}

struct ChildResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;
};

ChildResult run_child(const std::vector<std::string>& args, double timeout_sec) {
  int pipefd[2];
  if (pipe(pipefd) != 0) fail(ErrorKind::oracle, "oracle: pipe() failed");

  pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    fail(ErrorKind::oracle, "oracle: fork() failed");
  }
  if (pid == 0) {
    dup2(pipefd[1], STDOUT_FILENO);
    close(pipefd[0]);
    close(pipefd[1]);
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    _exit(127);
  }

  close(pipefd[1]);
  ChildResult res;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(timeout_sec));
  char buf[4096];
  bool open = true;
  while (open) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      res.timed_out = true;
      kill(pid, SIGKILL);
      break;
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    struct pollfd pfd{pipefd[0], POLLIN, 0};
    int rc = poll(&pfd, 1, static_cast<int>(std::min<long long>(ms, 60000)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) continue;
    ssize_t n = read(pipefd[0], buf, sizeof(buf));
    if (n <= 0)
      open = false;
    else
      res.output.append(buf, static_cast<std::size_t>(n));
  }
  close(pipefd[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  return res;
}

double parse_score(const std::string& output) {
  std::istringstream in(output);
  std::string tok;
  if (!(in >> tok)) fail(ErrorKind::oracle, "oracle: empty output");
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(tok, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::oracle, "oracle: non-numeric output '" + output + "'");
  }
  if (used != tok.size()) fail(ErrorKind::oracle, "oracle: non-numeric output '" + output + "'");
  return value;
}

// Scratch directory for handing volumes to external oracles.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "mv3c-oracle-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) fail(ErrorKind::oracle, "oracle: mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

struct SweepContext {
  const OracleSpec& oracle;
  std::optional<TempDir> dir;
  std::vector<std::string> orig_paths;

  explicit SweepContext(std::span<const Volume> volumes, const OracleSpec& o) : oracle(o) {
    if (o.kind != OracleKind::external_command) return;
    dir.emplace();
    for (std::size_t i = 0; i < volumes.size(); ++i) {
      std::string p = dir->file("orig_" + std::to_string(i) + ".raw");
      write_raw(volumes[i], p, p + ".meta");
      orig_paths.push_back(p);
    }
  }

  double score(std::size_t vol_idx, const Volume& orig, const Volume& recon) {
    if (oracle.kind != OracleKind::external_command) return builtin_score(oracle.kind, orig, recon);
    std::string p = dir->file("recon_" + std::to_string(vol_idx) + ".raw");
    write_raw(recon, p, p + ".meta");
    return run_oracle(oracle, orig_paths[vol_idx], p);
  }
};

void check_candidates(std::span<const double> candidates) {
  if (candidates.empty()) fail(ErrorKind::usage, "sweep: no candidates");
  double prev = 0.0;
  for (double q : candidates) {
    if (!(q >= 1.0)) fail(ErrorKind::usage, "sweep: candidates must be >= 1");
    if (!(q > prev)) fail(ErrorKind::usage, "sweep: candidates must be strictly ascending");
    prev = q;
  }
}

// Largest candidate whose mean score degrades by at most epsilon relative to
// the reference; degradation is unit-free across oracle scales.
SweepResult select_from_rows(std::vector<SweepRow> rows, double reference, double epsilon) {
  SweepResult res;
  res.reference_score = reference;
  double denom = std::max(std::abs(reference), 1e-12);
  for (auto& row : rows) {
    double degradation = (reference - row.score) / denom;
    row.admissible = degradation <= epsilon;
    if (row.admissible) res.selected_qs = row.candidate_qs;
  }
  res.rows = std::move(rows);
  return res;
}

SweepResult run_sweep(std::span<const Volume> volumes, std::span<const double> candidates,
                      const OracleSpec& oracle,
                      const std::function<EncodeResult(const Volume&, double)>& encode_candidate) {
  check_candidates(candidates);
  if (volumes.empty()) fail(ErrorKind::usage, "sweep: no volumes");

  SweepContext ctx(volumes, oracle);

  double ref_acc = 0.0;
  for (std::size_t i = 0; i < volumes.size(); ++i) ref_acc += ctx.score(i, volumes[i], volumes[i]);
  double reference = ref_acc / static_cast<double>(volumes.size());

  std::vector<SweepRow> rows;
  rows.reserve(candidates.size());
  for (double q : candidates) {
    double score_acc = 0.0;
    std::size_t orig_bytes = 0, stream_bytes = 0;
    for (std::size_t i = 0; i < volumes.size(); ++i) {
      EncodeResult enc = encode_candidate(volumes[i], q);
      Volume recon = decode(enc.stream);
      score_acc += ctx.score(i, volumes[i], recon);
      orig_bytes += original_byte_size(volumes[i]);
      stream_bytes += enc.stream.size();
    }
    SweepRow row;
    row.candidate_qs = q;
    row.achieved_cr = static_cast<double>(orig_bytes) / static_cast<double>(stream_bytes);
    row.score = score_acc / static_cast<double>(volumes.size());
    rows.push_back(row);
  }
  return select_from_rows(std::move(rows), reference, oracle.epsilon);
}

}  // namespace

OracleSpec oracle_from_string(const std::string& text, double epsilon) {
  OracleSpec spec;
  spec.epsilon = epsilon;
  if (text == "psnr" || text == "builtin-psnr") {
    spec.kind = OracleKind::builtin_psnr;
  } else if (text == "mae" || text == "builtin-mae") {
    spec.kind = OracleKind::builtin_mae;
  } else if (text.rfind("cmd:", 0) == 0) {
    spec.kind = OracleKind::external_command;
    spec.command_template = text.substr(4);
    if (spec.command_template.empty()) fail(ErrorKind::usage, "oracle: empty command");
  } else {
    fail(ErrorKind::usage, "unknown oracle spec '" + text + "' (expected psnr, mae or cmd:...)");
  }
  return spec;
}

double run_oracle(const OracleSpec& oracle, const std::string& orig_path,
                  const std::string& recon_path) {
  if (oracle.kind != OracleKind::external_command) {
    Volume orig = read_raw(orig_path, orig_path + ".meta");
    Volume recon = read_raw(recon_path, recon_path + ".meta");
    return builtin_score(oracle.kind, orig, recon);
  }
  auto args = build_argv(oracle.command_template, orig_path, recon_path);
  ChildResult child = run_child(args, oracle.timeout_sec);
  if (child.timed_out)
    fail(ErrorKind::oracle, "oracle: command timed out after " +
                                std::to_string(oracle.timeout_sec) + " s");
  if (child.exit_code != 0)
    fail(ErrorKind::oracle, "oracle: command exited with code " +
                                std::to_string(child.exit_code) + ", output: '" + child.output +
                                "'");
  return parse_score(child.output);
}

SweepResult lower_corner_sweep(std::span<const Volume> volumes, const EncodeOptions& cfg,
                               std::span<const double> candidates, const OracleSpec& oracle) {
  return run_sweep(volumes, candidates, oracle, [&](const Volume& v, double q) {
    EncodeOptions opt = cfg;
    opt.uniform_qs = q;
    opt.plan_override.reset();
    opt.target_cr.reset();
    opt.gamma.reset();
    return encode(v, opt);
  });
}

SweepResult upper_corner_sweep(std::span<const Volume> volumes, const EncodeOptions& cfg,
                               double q_min, std::span<const double> candidates,
                               const OracleSpec& oracle) {
  if (!(q_min >= 1.0)) fail(ErrorKind::usage, "sweep: q_min must be >= 1");
  return run_sweep(volumes, candidates, oracle, [&](const Volume& v, double q) {
    // Locate the least important subband for this volume.
    Decomposition d = forward(v, cfg.wavelet, cfg.levels, cfg.threads);
    std::vector<SubbandStats> stats = compute_si(d);
    std::size_t target = 0;
    for (std::size_t i = 1; i < stats.size(); ++i)
      if (stats[i].delta <= stats[target].delta) target = i;  // ties -> highest index

    std::vector<double> steps(stats.size(), q_min);
    steps[target] = std::max(q, 1.0);
    EncodeOptions opt = cfg;
    opt.uniform_qs.reset();
    opt.plan_override = std::move(steps);
    opt.target_cr.reset();
    opt.gamma.reset();
    return encode(v, opt);
  });
}

}  // namespace mv3c
