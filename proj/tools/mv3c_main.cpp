// mv3c command-line tool: analyze / encode / decode / metrics / sweep.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mv3c/codestream.hpp"
#include "mv3c/param_opt.hpp"
#include "mv3c/volume_io.hpp"

using json = nlohmann::json;

namespace {

using namespace mv3c;

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Volume load_volume(const std::string& path) {
  if (ends_with(path, ".nii")) return read_nifti(path);
  return read_raw(path, path + ".meta");
}

void save_volume(const Volume& v, const std::string& path) {
  write_raw(v, path, path + ".meta");
}

std::vector<std::uint8_t> load_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::format, "cannot open file: " + path);
  in.seekg(0, std::ios::end);
  auto len = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> buf(len);
  if (len && !in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(len)))
    fail(ErrorKind::format, "short read: " + path);
  return buf;
}

void save_stream(const std::vector<std::uint8_t>& bytes, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::format, "cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::format, "write failed: " + path);
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("MV3C_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::vector<double> parse_candidates(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorKind::usage, "bad candidate value '" + item + "'");
    }
  }
  if (out.empty()) fail(ErrorKind::usage, "no candidates given");
  return out;
}

struct CommonFlags {
  std::string wavelet = "cdf-9-7";
  std::uint32_t levels = 3;
  int threads = 0;
};

// ---- analyze ----

struct AnalyzeArgs {
  std::string input;
  std::string grad_path;
  bool as_json = false;
  CommonFlags common;
};

int cmd_analyze(const AnalyzeArgs& args) {
  Volume v = load_volume(args.input);
  WaveletKind kind = wavelet_from_name(args.common.wavelet);
  Decomposition d = forward(v, kind, args.common.levels, resolve_threads(args.common.threads));
  std::vector<SubbandStats> stats = compute_si(d);

  std::vector<double> importance;
  if (!args.grad_path.empty()) {
    GradientVolume g = gradient_from_volume(read_raw(args.grad_path, args.grad_path + ".meta"));
    auto scores = importance_scores(d, g);
    importance.resize(scores.size());
    for (const auto& [n, score] : scores) importance[n] = score;
  }

  if (args.as_json) {
    json out;
    out["dims"] = {v.dims.nx, v.dims.ny, v.dims.nz};
    out["dtype"] = dtype_name(v.dtype);
    out["wavelet"] = wavelet_name(kind);
    out["levels"] = args.common.levels;
    out["subbands"] = json::array();
    for (std::size_t i = 0; i < stats.size(); ++i) {
      const auto& sb = d.subbands[i];
      json row;
      row["n"] = sb.index;
      row["level"] = sb.level;
      row["orientation"] = orientation_code(sb.orient);
      row["dims"] = {sb.dims.nx, sb.dims.ny, sb.dims.nz};
      row["count"] = stats[i].count;
      row["mean"] = stats[i].mean;
      row["delta"] = stats[i].delta;
      row["laplace_b"] = stats[i].laplace_b;
      if (!importance.empty()) row["importance"] = importance[i];
      out["subbands"].push_back(std::move(row));
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  std::cout << "input: " << args.input << "  dims " << v.dims.nx << "x" << v.dims.ny << "x"
            << v.dims.nz << "  dtype " << dtype_name(v.dtype) << "\n";
  std::cout << "wavelet " << wavelet_name(kind) << ", levels " << args.common.levels << ", "
            << stats.size() << " subbands\n";
  std::cout << std::left << std::setw(4) << "n" << std::setw(6) << "level" << std::setw(7)
            << "orient" << std::setw(15) << "dims" << std::setw(10) << "count" << std::setw(14)
            << "delta" << std::setw(14) << "laplace_b";
  if (!importance.empty()) std::cout << std::setw(14) << "importance";
  std::cout << "\n";
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto& sb = d.subbands[i];
    std::ostringstream dims;
    dims << sb.dims.nx << "x" << sb.dims.ny << "x" << sb.dims.nz;
    std::cout << std::left << std::setw(4) << sb.index << std::setw(6) << sb.level << std::setw(7)
              << orientation_code(sb.orient) << std::setw(15) << dims.str() << std::setw(10)
              << stats[i].count << std::setw(14) << std::setprecision(6) << stats[i].delta
              << std::setw(14) << stats[i].laplace_b;
    if (!importance.empty()) std::cout << std::setw(14) << importance[i];
    std::cout << "\n";
  }
  return 0;
}

// ---- encode ----

struct EncodeArgs {
  std::string input, output;
  double q_min = 1.0, q_max = 16.0;
  double target_cr = 0.0;
  double cr_tol = 0.05;
  double uniform_qs = 0.0;
  CommonFlags common;
};

int cmd_encode(const EncodeArgs& args) {
  Volume v = load_volume(args.input);
  EncodeOptions opt;
  opt.wavelet = wavelet_from_name(args.common.wavelet);
  opt.levels = args.common.levels;
  opt.q_min = args.q_min;
  opt.q_max = args.q_max;
  opt.cr_tolerance = args.cr_tol;
  opt.threads = resolve_threads(args.common.threads);
  if (args.uniform_qs > 0.0) opt.uniform_qs = args.uniform_qs;
  if (args.target_cr > 0.0) opt.target_cr = args.target_cr;

  EncodeResult res = encode(v, opt);
  save_stream(res.stream, args.output);

  std::cout << "subbands:\n";
  std::cout << std::left << std::setw(4) << "n" << std::setw(6) << "level" << std::setw(7)
            << "orient" << std::setw(14) << "delta" << std::setw(12) << "qs" << std::setw(10)
            << "bytes" << "\n";
  auto layout = band_layout(v.dims, opt.levels);
  for (std::size_t i = 0; i < res.header.bands.size(); ++i) {
    std::cout << std::left << std::setw(4) << layout[i].index << std::setw(6) << layout[i].level
              << std::setw(7) << orientation_code(layout[i].orient) << std::setw(14)
              << std::setprecision(6) << res.header.bands[i].delta << std::setw(12)
              << res.header.bands[i].qs << std::setw(10) << res.header.bands[i].payload_bytes
              << "\n";
  }
  if (res.plan.is_uniform())
    std::cout << "plan: uniform";
  else
    std::cout << "plan: nlm a=" << res.plan.params->a << " b=" << res.plan.params->b << " qmin="
              << opt.q_min << " qmax=" << opt.q_max;
  std::cout << " gamma=" << res.plan.gamma << "\n";
  std::cout << "wrote " << args.output << ": " << res.stream.size() << " bytes, CR="
            << std::setprecision(4) << res.achieved_cr << "\n";
  return 0;
}

// ---- decode ----

int cmd_decode(const std::string& input, const std::string& output, int threads) {
  auto stream = load_stream(input);
  Volume v = decode(stream, resolve_threads(threads));
  save_volume(v, output);
  std::cout << "wrote " << output << ": " << v.dims.nx << "x" << v.dims.ny << "x" << v.dims.nz
            << " " << dtype_name(v.dtype) << "\n";
  return 0;
}

// ---- metrics ----

int cmd_metrics(const std::string& orig_path, const std::string& recon_path,
                const std::string& stream_path) {
  Volume orig = load_volume(orig_path);
  Volume recon = load_volume(recon_path);
  Metrics m = compute_metrics(orig, recon);
  std::cout << "MSE:  " << std::setprecision(9) << m.mse << "\n";
  std::cout << "PSNR: " << std::setprecision(6) << m.psnr_db << " dB\n";
  if (!stream_path.empty()) {
    auto stream = load_stream(stream_path);
    std::cout << "CR:   " << std::setprecision(5) << compression_rate(orig, stream.size()) << "\n";
  }
  return 0;
}

// ---- sweep ----

struct SweepArgs {
  std::string mode;  // lower | upper
  std::string input;
  std::string candidates = "1,2,4,8,16,32";
  std::string oracle = "psnr";
  double epsilon = 0.005;
  double q_min = 1.0;
  bool as_json = false;
  CommonFlags common;
};

int cmd_sweep(const SweepArgs& args) {
  Volume v = load_volume(args.input);
  EncodeOptions cfg;
  cfg.wavelet = wavelet_from_name(args.common.wavelet);
  cfg.levels = args.common.levels;
  cfg.threads = resolve_threads(args.common.threads);
  OracleSpec oracle = oracle_from_string(args.oracle, args.epsilon);
  std::vector<double> candidates = parse_candidates(args.candidates);

  SweepResult res;
  std::vector<Volume> volumes;
  volumes.push_back(std::move(v));
  if (args.mode == "lower")
    res = lower_corner_sweep(volumes, cfg, candidates, oracle);
  else if (args.mode == "upper")
    res = upper_corner_sweep(volumes, cfg, args.q_min, candidates, oracle);
  else
    fail(ErrorKind::usage, "sweep mode must be 'lower' or 'upper'");

  if (args.as_json) {
    json out;
    out["mode"] = args.mode;
    out["oracle"] = args.oracle;
    out["epsilon"] = args.epsilon;
    out["reference_score"] = res.reference_score;
    out["rows"] = json::array();
    for (const auto& row : res.rows) {
      out["rows"].push_back({{"qs", row.candidate_qs},
                             {"cr", row.achieved_cr},
                             {"score", row.score},
                             {"admissible", row.admissible}});
    }
    if (res.selected_qs)
      out["selected_qs"] = *res.selected_qs;
    else
      out["selected_qs"] = nullptr;
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  std::cout << "reference score: " << std::setprecision(8) << res.reference_score << "\n";
  std::cout << std::left << std::setw(10) << "qs" << std::setw(12) << "cr" << std::setw(16)
            << "score" << "admissible\n";
  for (const auto& row : res.rows)
    std::cout << std::left << std::setw(10) << row.candidate_qs << std::setw(12)
              << std::setprecision(5) << row.achieved_cr << std::setw(16) << std::setprecision(8)
              << row.score << (row.admissible ? "yes" : "no") << "\n";
  if (res.selected_qs)
    std::cout << "selected QS = " << *res.selected_qs << "\n";
  else
    std::cout << "selected QS = none admissible\n";
  return 0;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--levels", flags.levels, "decomposition levels")->default_val(3);
  cmd->add_option("--wavelet", flags.wavelet, "legall-5-3 or cdf-9-7")->default_val("cdf-9-7");
  cmd->add_option("--threads", flags.threads, "worker thread cap (MV3C_THREADS as fallback)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mv3c: machine-vision-guided volumetric codec"};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "per-subband statistics of a volume");
  analyze->add_option("input", analyze_args.input, "volume (.nii or raw with .meta sidecar)")
      ->required();
  analyze->add_option("--grad", analyze_args.grad_path, "gradient volume (float32 raw)");
  analyze->add_flag("--json", analyze_args.as_json, "machine-readable output");
  add_common(analyze, analyze_args.common);

  EncodeArgs encode_args;
  auto* enc = app.add_subcommand("encode", "compress a volume to an MV3C stream");
  enc->add_option("input", encode_args.input)->required();
  enc->add_option("output", encode_args.output)->required();
  enc->add_option("--qmin", encode_args.q_min)->default_val(1.0);
  enc->add_option("--qmax", encode_args.q_max)->default_val(16.0);
  enc->add_option("--target-cr", encode_args.target_cr, "binary-search gamma for this CR");
  enc->add_option("--cr-tol", encode_args.cr_tol, "relative CR tolerance")->default_val(0.05);
  enc->add_option("--uniform-qs", encode_args.uniform_qs, "bypass NLM with one step everywhere");
  add_common(enc, encode_args.common);

  std::string dec_in, dec_out;
  int dec_threads = 0;
  auto* dec = app.add_subcommand("decode", "decompress an MV3C stream");
  dec->add_option("input", dec_in)->required();
  dec->add_option("output", dec_out)->required();
  dec->add_option("--threads", dec_threads);

  std::string met_orig, met_recon, met_stream;
  auto* met = app.add_subcommand("metrics", "MSE/PSNR between two volumes");
  met->add_option("original", met_orig)->required();
  met->add_option("reconstructed", met_recon)->required();
  met->add_option("--stream", met_stream, "codestream file, adds CR");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "corner-case QS sweeps against a quality oracle");
  sweep->add_option("mode", sweep_args.mode, "lower or upper")->required();
  sweep->add_option("input", sweep_args.input)->required();
  sweep->add_option("--candidates", sweep_args.candidates, "ascending comma-separated QS list");
  sweep->add_option("--oracle", sweep_args.oracle, "psnr, mae, or cmd:<template>");
  sweep->add_option("--epsilon", sweep_args.epsilon, "max relative degradation")->default_val(0.005);
  sweep->add_option("--qmin", sweep_args.q_min, "fixed QS for non-varied subbands (upper mode)")
      ->default_val(1.0);
  sweep->add_flag("--json", sweep_args.as_json);
  add_common(sweep, sweep_args.common);

  try {
    app.parse(argc, argv);
    if (*analyze) return cmd_analyze(analyze_args);
    if (*enc) return cmd_encode(encode_args);
    if (*dec) return cmd_decode(dec_in, dec_out, dec_threads);
    if (*met) return cmd_metrics(met_orig, met_recon, met_stream);
    if (*sweep) return cmd_sweep(sweep_args);
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mv3c::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mv3c::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
