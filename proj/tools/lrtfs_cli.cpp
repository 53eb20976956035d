// Command-line front end: decompose | multilayer | cs.
//
// Every run writes its outputs plus a manifest.json capturing the full
// configuration; `--replay manifest.json` reproduces a run bit-identically.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "lrtfs/compressive.hpp"
#include "lrtfs/io.hpp"
#include "lrtfs/multilayer.hpp"
#include "lrtfs/signal.hpp"
#include "lrtfs/solver.hpp"
#include "lrtfs/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lrtfs;

namespace {

constexpr const char* kBuildVersion = "lrtfs 1.0.0";

std::uint64_t default_seed() {
  if (const char* env = std::getenv("LRTFS_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 1;
}

struct CommonArgs {
  std::string input_wav;
  std::string synthetic;
  std::string out_dir = "lrtfs_out";
  double sample_rate = 22050.0;
  double duration_s = 15.6;
  double noise_snr_db = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = default_seed();
};

// "start:end:count", log-spaced
std::vector<double> parse_lambda_grid(const std::string& text) {
  double start = 0.0, end = 0.0;
  int count = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d", &start, &end, &count) != 3) {
    throw CLI::ValidationError("--lambda-grid", "expected start:end:count");
  }
  return log_spaced(start, end, count);
}

// "lo..hi" (log-spaced, 6 points), "lo..hi:count", or a single value
std::vector<double> parse_ratios(const std::string& text) {
  double lo = 0.0, hi = 0.0;
  int count = 6;
  if (std::sscanf(text.c_str(), "%lf..%lf:%d", &lo, &hi, &count) == 3 ||
      std::sscanf(text.c_str(), "%lf..%lf", &lo, &hi) == 2) {
    return log_spaced(hi, lo, count);
  }
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf%c", &lo, &tail) == 1) return {lo};
  throw CLI::ValidationError("--ratios", "expected lo..hi[:count] or a single value");
}

struct LoadedSignal {
  SignalBuffer buffer;
  std::vector<VectorXd> components;  // ground truth when synthetic
  std::string input_hash;
  json descriptor;
};

LoadedSignal load_input(const CommonArgs& args) {
  LoadedSignal sig;
  if (!args.input_wav.empty()) {
    sig.buffer = read_wav(args.input_wav);
    sig.input_hash = hash_file(args.input_wav);
    sig.descriptor = {{"wav", args.input_wav}};
    return sig;
  }
  if (args.synthetic.empty()) {
    throw CLI::ValidationError("input", "either --input or --synthetic is required");
  }

  const Index t = static_cast<Index>(args.duration_s * args.sample_rate);
  if (args.synthetic == "fournotes") {
    SyntheticSpec spec = fournotes_preset(args.duration_s);
    spec.seed = args.seed;
    SyntheticResult res = synthesize(spec, t, args.sample_rate);
    sig.buffer = res.buffer;
    sig.components = std::move(res.components);
  } else if (args.synthetic == "rank2") {
    SyntheticSpec spec = rank2_preset(args.seed);
    SyntheticResult res = synthesize(spec, t, args.sample_rate);
    sig.buffer = res.buffer;
    sig.components = std::move(res.components);
  } else if (args.synthetic == "tonalclick") {
    TonalClickSignal tc = make_tonal_click(t, args.sample_rate, args.seed);
    sig.buffer = tc.mix;
    sig.components = {tc.tonal, tc.click};
  } else {
    throw CLI::ValidationError("--synthetic", "unknown preset: " + args.synthetic);
  }
  sig.descriptor = {{"synthetic", args.synthetic},
                    {"sample_rate", args.sample_rate},
                    {"duration_s", args.duration_s},
                    {"seed", args.seed}};
  if (!std::isnan(args.noise_snr_db)) {
    sig.buffer = add_noise(sig.buffer, args.noise_snr_db, args.seed + 0x5eed);
    sig.descriptor["noise_snr_db"] = args.noise_snr_db;
  }
  const auto& samples = sig.buffer.samples;
  sig.input_hash = fnv1a_hex(samples.data(), static_cast<size_t>(samples.size()) * 8);
  return sig;
}

void write_solution_bundle(const LRTFSSolution& sol, const GaborDictionary& dict,
                           double sample_rate, const fs::path& dir,
                           std::vector<std::string>& outputs) {
  fs::create_directories(dir / "components");
  save_grid(sol.alpha, dict.mode, dict.signal_len, (dir / "alpha").string());
  save_nmf(sol.model, (dir / "nmf").string());
  write_trace_csv(sol.trace, (dir / "trace.csv").string());
  write_wav(SignalBuffer{sol.reconstruction, sample_rate, "reconstruction"},
            (dir / "reconstruction.wav").string());
  const auto components = reconstruct_components(sol, dict);
  for (size_t k = 0; k < components.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "k%02zu.wav", k + 1);
    write_wav(SignalBuffer{components[k], sample_rate, name},
              (dir / "components" / name).string());
    outputs.push_back((dir / "components" / name).string());
  }
  for (const char* f : {"alpha.json", "alpha.bin", "nmf.json", "nmf.w.bin", "nmf.h.bin",
                        "trace.csv", "reconstruction.wav"}) {
    outputs.push_back((dir / f).string());
  }
}

json solver_config_json(const SolverConfig& cfg) {
  return json{{"k", cfg.k},
              {"lambda_target", cfg.lambda_target},
              {"lambda_schedule", cfg.lambdas()},
              {"tol_outer", cfg.tol_outer},
              {"tol_inner_isa", cfg.tol_inner_isa},
              {"tol_inner_nmf", cfg.tol_inner_nmf},
              {"max_outer", cfg.max_outer},
              {"max_inner", cfg.max_inner},
              {"accel", cfg.accel}};
}

int finish_run(const std::string& command, const std::vector<std::string>& argv,
               const json& config, const std::string& input_hash, double seconds,
               std::vector<std::string> outputs, const fs::path& out_dir) {
  {
    std::ofstream cfg_out(out_dir / "config.json");
    cfg_out << config.dump(2) << "\n";
    outputs.push_back((out_dir / "config.json").string());
  }
  RunManifest manifest;
  manifest.command = command;
  manifest.argv = argv;
  manifest.config_json = config.dump();
  manifest.input_hash = input_hash;
  manifest.build_version = kBuildVersion;
  manifest.total_seconds = seconds;
  manifest.outputs = std::move(outputs);
  write_manifest(manifest, (out_dir / "manifest.json").string());
  return 0;
}

}  // namespace

int run_decompose(const CommonArgs& common, const SolverConfig& solver_cfg, int window,
                  double overlap, const std::vector<std::string>& argv) {
  const auto start = std::chrono::steady_clock::now();
  LoadedSignal sig = load_input(common);
  const fs::path dir(common.out_dir);
  fs::create_directories(dir);

  GaborDictionary dict =
      build_tight_gabor(window, overlap, sig.buffer.samples.size(), GaborMode::real_half);

  std::vector<std::string> outputs;
  const CoefficientGrid y = analysis(dict, sig.buffer.samples);

  std::vector<std::pair<double, double>> snr_by_lambda;
  LRTFSSolution best;
  double best_snr = -std::numeric_limits<double>::infinity();
  const bool have_truth = !sig.components.empty();
  VectorXd clean = VectorXd::Zero(sig.buffer.samples.size());
  for (const auto& c : sig.components) clean += c;

  LRTFSSolution sol = solve(sig.buffer.samples, dict, solver_cfg,
                            [&](const LRTFSSolution& snapshot) {
                              const VectorXd& ref = have_truth ? clean : sig.buffer.samples;
                              const double snr = output_snr_db(ref, snapshot.reconstruction);
                              snr_by_lambda.push_back({snapshot.lambda_used, snr});
                              if (snr > best_snr) {
                                best_snr = snr;
                                best = snapshot;
                              }
                            });
  best.trace = sol.trace;

  // bundle for the best-SNR lambda; the final solution's trace covers the run
  write_solution_bundle(best, dict, sig.buffer.sample_rate, dir, outputs);

  {
    std::ofstream out(dir / "snr_vs_lambda.csv");
    out << "lambda,output_snr_db\n";
    char line[80];
    for (const auto& [lambda, snr] : snr_by_lambda) {
      std::snprintf(line, sizeof(line), "%.10g,%.6f\n", lambda, snr);
      out << line;
    }
    outputs.push_back((dir / "snr_vs_lambda.csv").string());
  }

  // spectrogram dumps on a common dB scale, referenced to the analysis peak
  const MatrixXd analysis_power = y.cwiseAbs2();
  const double reference = analysis_power.maxCoeff();
  write_db_csv(analysis_power, reference, (dir / "analysis_power_db.csv").string());
  write_db_csv(best.alpha.cwiseAbs2(), reference, (dir / "alpha_power_db.csv").string());
  outputs.push_back((dir / "analysis_power_db.csv").string());
  outputs.push_back((dir / "alpha_power_db.csv").string());

  json config = {{"solver", solver_config_json(solver_cfg)},
                 {"window", window},
                 {"overlap", overlap},
                 {"input", sig.descriptor}};
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return finish_run("decompose", argv, config, sig.input_hash, seconds, std::move(outputs), dir);
}

int run_multilayer(const CommonArgs& common, const SLRConfig& slr_cfg, int window_a, int window_b,
                   double overlap, const std::vector<std::string>& argv) {
  const auto start = std::chrono::steady_clock::now();
  LoadedSignal sig = load_input(common);
  const fs::path dir(common.out_dir);
  fs::create_directories(dir / "layer_a");
  fs::create_directories(dir / "layer_b");

  const Index t = sig.buffer.samples.size();
  LayerSpec spec_a{build_tight_gabor(window_a, overlap, t, GaborMode::real_half),
                   LayerPrior::low_rank, slr_cfg.base.k};
  LayerSpec spec_b{build_tight_gabor(window_b, overlap, t, GaborMode::real_half),
                   LayerPrior::sparse};

  SLRSolution sol = solve_slr(sig.buffer.samples, spec_a, spec_b, slr_cfg);

  std::vector<std::string> outputs;
  write_solution_bundle(sol.layer_a, spec_a.dict, sig.buffer.sample_rate, dir / "layer_a",
                        outputs);
  save_grid(sol.alpha_b, GaborMode::real_half, t, (dir / "layer_b" / "alpha").string());
  write_wav(SignalBuffer{sol.reconstruction_b, sig.buffer.sample_rate, "layer_b"},
            (dir / "layer_b" / "reconstruction.wav").string());
  write_trace_csv(sol.trace, (dir / "trace.csv").string());
  outputs.push_back((dir / "layer_b" / "alpha.json").string());
  outputs.push_back((dir / "layer_b" / "alpha.bin").string());
  outputs.push_back((dir / "layer_b" / "reconstruction.wav").string());
  outputs.push_back((dir / "trace.csv").string());

  json config = {{"solver", solver_config_json(slr_cfg.base)},
                 {"mu", slr_cfg.mu},
                 {"window_a", window_a},
                 {"window_b", window_b},
                 {"overlap", overlap},
                 {"input", sig.descriptor}};
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return finish_run("multilayer", argv, config, sig.input_hash, seconds, std::move(outputs), dir);
}

int run_cs(const CommonArgs& common, SweepConfig sweep_cfg, int window, double overlap,
           int num_seeds, const std::vector<std::string>& argv) {
  const auto start = std::chrono::steady_clock::now();
  LoadedSignal sig = load_input(common);
  const fs::path dir(common.out_dir);
  fs::create_directories(dir);

  sweep_cfg.seeds.clear();
  for (int i = 0; i < num_seeds; ++i) sweep_cfg.seeds.push_back(common.seed + i);

  GaborDictionary dict =
      build_tight_gabor(window, overlap, sig.buffer.samples.size(), GaborMode::real_half);
  auto rows = sweep(sig.buffer.samples, dict, sweep_cfg);
  write_sweep_csv(rows, (dir / "results.csv").string());

  std::vector<std::string> method_names;
  for (CSMethod m : sweep_cfg.methods) method_names.push_back(method_name(m));
  json config = {{"window", window},
                 {"overlap", overlap},
                 {"ratios", sweep_cfg.ratios},
                 {"methods", method_names},
                 {"seeds", sweep_cfg.seeds},
                 {"noise_var", sweep_cfg.noise_var},
                 {"k", sweep_cfg.cs.base.k},
                 {"lambda_schedule", sweep_cfg.cs.lambda_schedule},
                 {"input", sig.descriptor}};
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return finish_run("cs", argv, config, sig.input_hash, seconds,
                    {(dir / "results.csv").string()}, dir);
}

int dispatch(int argc, char** argv_raw) {
  CLI::App app{"Low-rank time-frequency synthesis toolkit"};
  app.require_subcommand(1);
  std::vector<std::string> argv(argv_raw, argv_raw + argc);

  CommonArgs common;
  auto add_common = [&common](CLI::App* cmd) {
    cmd->add_option("--input", common.input_wav, "input WAV file (mono)");
    cmd->add_option("--synthetic", common.synthetic,
                    "synthetic preset: fournotes | rank2 | tonalclick");
    cmd->add_option("--out", common.out_dir, "output directory");
    cmd->add_option("--sr", common.sample_rate, "sample rate for synthetic input");
    cmd->add_option("--duration", common.duration_s, "duration for synthetic input (s)");
    cmd->add_option("--noise-snr", common.noise_snr_db, "add noise at this input SNR (dB)");
    cmd->add_option("--seed", common.seed, "base random seed (env LRTFS_SEED)");
  };

  // decompose
  SolverConfig solver_cfg = SolverConfig::denoising_default();
  int window = 1024;
  double overlap = 0.5;
  std::string lambda_grid;
  CLI::App* dec = app.add_subcommand("decompose", "single-layer decomposition over a lambda grid");
  add_common(dec);
  dec->add_option("--k", solver_cfg.k, "NMF rank");
  dec->add_option("--win", window, "window length (samples)");
  dec->add_option("--overlap", overlap, "window overlap fraction");
  dec->add_option("--lambda-grid", lambda_grid, "start:end:count, log-spaced");
  dec->add_option("--max-outer", solver_cfg.max_outer, "outer iteration cap per lambda");
  dec->add_option("--max-inner", solver_cfg.max_inner, "inner iteration cap");
  dec->add_option("--tol", solver_cfg.tol_outer, "outer relative-change tolerance");
  solver_cfg.variance_floor_rel = 1e-3;
  dec->add_option("--variance-floor", solver_cfg.variance_floor_rel,
                  "relative variance floor for the shrinkage (0 = off)");

  // multilayer
  SLRConfig slr_cfg;
  slr_cfg.base = SolverConfig::denoising_default();
  int window_a = 1024, window_b = 128;
  std::string ml_lambda_grid;
  CLI::App* ml = app.add_subcommand("multilayer", "sparse + low-rank two-layer decomposition");
  add_common(ml);
  ml->add_option("--k", slr_cfg.base.k, "NMF rank of the tonal layer");
  ml->add_option("--mu", slr_cfg.mu, "layer balance in [0, 1]");
  ml->add_option("--win-a", window_a, "tonal-layer window (samples)");
  ml->add_option("--win-b", window_b, "transient-layer window (samples)");
  ml->add_option("--overlap", overlap, "window overlap fraction");
  ml->add_option("--lambda-grid", ml_lambda_grid, "start:end:count, log-spaced");
  ml->add_option("--max-outer", slr_cfg.base.max_outer, "outer iteration cap per lambda");

  // cs
  SweepConfig sweep_cfg;
  std::string ratios_text = "0.01..0.1:6";
  std::string methods_text = "lrtfs,sbl,l1";
  bool include_oracles = false;
  int num_seeds = 1;
  int cs_window = 512;
  std::string cs_lambda_grid;
  CLI::App* cs = app.add_subcommand("cs", "compressive-sensing recovery sweep");
  add_common(cs);
  cs->add_option("--ratios", ratios_text, "measurement ratios lo..hi[:count] or single value");
  cs->add_option("--ratio", ratios_text, "alias of --ratios for a single value");
  cs->add_option("--methods", methods_text, "comma-separated: lrtfs,sbl,l1");
  cs->add_option("--method", methods_text, "alias of --methods");
  cs->add_flag("--include-oracles", include_oracles, "add both oracle recoveries");
  cs->add_option("--seeds", num_seeds, "number of seeds (base seed, base+1, ...)");
  cs->add_option("--k", sweep_cfg.cs.base.k, "NMF rank");
  cs->add_option("--win", cs_window, "window length (samples)");
  cs->add_option("--overlap", overlap, "window overlap fraction");
  cs->add_option("--lambda-grid", cs_lambda_grid, "start:end:count, log-spaced");
  cs->add_option("--noise-var", sweep_cfg.noise_var, "measurement noise variance");
  cs->add_option("--jobs", sweep_cfg.jobs, "parallel sweep workers");
  bool row_artifacts = false;
  cs->add_flag("--row-artifacts", row_artifacts, "write each row's best reconstruction");
  cs->add_option("--max-outer", sweep_cfg.cs.base.max_outer, "outer iteration cap per lambda");
  cs->add_option("--max-inner", sweep_cfg.cs.base.max_inner, "inner iteration cap");

  // replay
  std::string replay_path;
  CLI::App* replay = app.add_subcommand("replay", "re-run a recorded manifest");
  replay->add_option("manifest", replay_path, "manifest.json path")->required();
  std::string replay_out;
  replay->add_option("--out", replay_out, "override the output directory");

  try {
    app.parse(argc, argv_raw);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints the requested help, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nRun with --help for usage." << std::endl;
    return 2;
  }

  if (dec->parsed()) {
    if (!lambda_grid.empty()) {
      solver_cfg.lambda_schedule = parse_lambda_grid(lambda_grid);
      solver_cfg.lambda_target = solver_cfg.lambda_schedule.back();
    }
    return run_decompose(common, solver_cfg, window, overlap, argv);
  }
  if (ml->parsed()) {
    if (!ml_lambda_grid.empty()) {
      slr_cfg.base.lambda_schedule = parse_lambda_grid(ml_lambda_grid);
      slr_cfg.base.lambda_target = slr_cfg.base.lambda_schedule.back();
    }
    return run_multilayer(common, slr_cfg, window_a, window_b, overlap, argv);
  }
  if (cs->parsed()) {
    if (row_artifacts) {
      sweep_cfg.artifact_dir = common.out_dir;
      sweep_cfg.artifact_sample_rate = common.sample_rate;
      fs::create_directories(common.out_dir);
    }
    sweep_cfg.ratios = parse_ratios(ratios_text);
    sweep_cfg.methods.clear();
    std::stringstream ss(methods_text);
    std::string token;
    while (std::getline(ss, token, ',')) {
      if (!token.empty()) sweep_cfg.methods.push_back(method_from_name(token));
    }
    if (include_oracles) {
      sweep_cfg.methods.push_back(CSMethod::oracle_variance);
      sweep_cfg.methods.push_back(CSMethod::oracle_nmf);
    }
    if (!cs_lambda_grid.empty()) sweep_cfg.cs.lambda_schedule = parse_lambda_grid(cs_lambda_grid);
    return run_cs(common, sweep_cfg, cs_window, overlap, num_seeds, argv);
  }
  if (replay->parsed()) {
    RunManifest manifest = read_manifest(replay_path);
    std::vector<std::string> forwarded = manifest.argv;
    if (!replay_out.empty()) {
      for (size_t i = 0; i + 1 < forwarded.size(); ++i) {
        if (forwarded[i] == "--out") forwarded[i + 1] = replay_out;
      }
    }
    std::vector<char*> cargv;
    for (auto& s : forwarded) cargv.push_back(s.data());
    return dispatch(static_cast<int>(cargv.size()), cargv.data());
  }
  return 0;
}

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << std::endl;
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
