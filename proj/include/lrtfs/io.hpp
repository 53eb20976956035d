#pragma once

#include <string>
#include <vector>

#include "lrtfs/gabor.hpp"
#include "lrtfs/isnmf.hpp"
#include "lrtfs/solver.hpp"
#include "lrtfs/types.hpp"

namespace lrtfs {

/// Grid serialization: `<base>.json` header {F_rows, N, T, layout, mode} plus
/// `<base>.bin`, raw little-endian float64 interleaved (re, im) in freq-major
/// (column-major) order.
void save_grid(const CoefficientGrid& grid, GaborMode mode, Index signal_len,
               const std::string& base_path);

struct LoadedGrid {
  CoefficientGrid grid;
  GaborMode mode;
  Index signal_len;
};
LoadedGrid load_grid(const std::string& base_path);

/// Factor serialization: `<base>.json` header {F_rows, K, N} plus
/// `<base>.w.bin` / `<base>.h.bin`, row-major little-endian float64.
void save_nmf(const NMFModel& model, const std::string& base_path);
NMFModel load_nmf(const std::string& base_path);

/// trace.csv with header iteration,lambda,objective,residual_norm.
void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

/// Matrix dump in dB (10 log10(value + eps) - 10 log10(reference)), one CSV
/// row per frequency channel.
void write_db_csv(const MatrixXd& power, double reference, const std::string& path);

/// FNV-1a 64-bit content hash, hex-encoded.
std::string fnv1a_hex(const void* data, size_t size);
std::string hash_file(const std::string& path);

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config_json;  ///< full configuration snapshot
  std::string input_hash;
  std::string build_version;
  double total_seconds = 0.0;
  std::vector<std::string> outputs;
};

/// Written atomically (temp file + rename) at the end of a run.
void write_manifest(const RunManifest& manifest, const std::string& path);
RunManifest read_manifest(const std::string& path);

}  // namespace lrtfs
