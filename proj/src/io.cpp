#include "lrtfs/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace lrtfs {

namespace {

using nlohmann::json;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_doubles(std::ofstream& out, const double* data, size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
}

void read_doubles(std::ifstream& in, double* data, size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
  if (static_cast<size_t>(in.gcount()) != count * 8) {
    throw std::runtime_error("truncated binary payload");
  }
}

}  // namespace

void save_grid(const CoefficientGrid& grid, GaborMode mode, Index signal_len,
               const std::string& base_path) {
  json header = {{"F_rows", grid.rows()},
                 {"N", grid.cols()},
                 {"T", signal_len},
                 {"layout", "freq-major"},
                 {"mode", mode == GaborMode::real_half ? "real" : "complex"}};
  write_file(base_path + ".json", header.dump(2) + "\n");

  std::ofstream out(base_path + ".bin", std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + base_path + ".bin");
  for (Index n = 0; n < grid.cols(); ++n) {
    for (Index f = 0; f < grid.rows(); ++f) {
      const double pair[2] = {grid(f, n).real(), grid(f, n).imag()};
      write_doubles(out, pair, 2);
    }
  }
  if (!out) throw std::runtime_error("write failed: " + base_path + ".bin");
}

LoadedGrid load_grid(const std::string& base_path) {
  const json header = json::parse(read_file(base_path + ".json"));
  LoadedGrid loaded;
  const Index rows = header.at("F_rows").get<Index>();
  const Index cols = header.at("N").get<Index>();
  loaded.signal_len = header.at("T").get<Index>();
  loaded.mode = header.at("mode").get<std::string>() == "real" ? GaborMode::real_half
                                                               : GaborMode::complex_full;
  if (header.at("layout").get<std::string>() != "freq-major") {
    throw std::runtime_error("unsupported grid layout in " + base_path);
  }

  std::ifstream in(base_path + ".bin", std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + base_path + ".bin");
  loaded.grid.resize(rows, cols);
  for (Index n = 0; n < cols; ++n) {
    for (Index f = 0; f < rows; ++f) {
      double pair[2];
      read_doubles(in, pair, 2);
      loaded.grid(f, n) = Complex(pair[0], pair[1]);
    }
  }
  return loaded;
}

void save_nmf(const NMFModel& model, const std::string& base_path) {
  json header = {{"F_rows", model.W.rows()}, {"K", model.W.cols()}, {"N", model.H.cols()}};
  write_file(base_path + ".json", header.dump(2) + "\n");

  auto dump_row_major = [](const MatrixXd& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        const double v = m(i, j);
        out.write(reinterpret_cast<const char*>(&v), 8);
      }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
  };
  dump_row_major(model.W, base_path + ".w.bin");
  dump_row_major(model.H, base_path + ".h.bin");
}

NMFModel load_nmf(const std::string& base_path) {
  const json header = json::parse(read_file(base_path + ".json"));
  const Index rows = header.at("F_rows").get<Index>();
  const Index k = header.at("K").get<Index>();
  const Index cols = header.at("N").get<Index>();

  auto load_row_major = [](Index r, Index c, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    MatrixXd m(r, c);
    for (Index i = 0; i < r; ++i) {
      for (Index j = 0; j < c; ++j) {
        double v;
        read_doubles(in, &v, 1);
        m(i, j) = v;
      }
    }
    return m;
  };
  NMFModel model;
  model.W = load_row_major(rows, k, base_path + ".w.bin");
  model.H = load_row_major(k, cols, base_path + ".h.bin");
  return model;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "iteration,lambda,objective,residual_norm\n";
  char line[160];
  for (const TraceRow& row : trace) {
    std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.10g\n", row.outer_index, row.lambda,
                  row.objective, row.residual_norm);
    out << line;
  }
}

void write_db_csv(const MatrixXd& power, double reference, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const double ref_db = 10.0 * std::log10(std::max(reference, kEpsNmf));
  char cell[48];
  for (Index f = 0; f < power.rows(); ++f) {
    for (Index n = 0; n < power.cols(); ++n) {
      const double db = 10.0 * std::log10(power(f, n) + kEpsNmf) - ref_db;
      std::snprintf(cell, sizeof(cell), n + 1 < power.cols() ? "%.4f," : "%.4f\n", db);
      out << cell;
    }
  }
}

std::string fnv1a_hex(const void* data, size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string hash_file(const std::string& path) {
  const std::string content = read_file(path);
  return fnv1a_hex(content.data(), content.size());
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  json j = {{"command", manifest.command},
            {"argv", manifest.argv},
            {"config", json::parse(manifest.config_json.empty() ? "{}" : manifest.config_json)},
            {"input_hash", manifest.input_hash},
            {"build_version", manifest.build_version},
            {"total_seconds", manifest.total_seconds},
            {"outputs", manifest.outputs}};
  const std::string tmp = path + ".tmp";
  write_file(tmp, j.dump(2) + "\n");
  std::filesystem::rename(tmp, path);
}

RunManifest read_manifest(const std::string& path) {
  const json j = json::parse(read_file(path));
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.config_json = j.at("config").dump();
  m.input_hash = j.at("input_hash").get<std::string>();
  m.build_version = j.at("build_version").get<std::string>();
  m.total_seconds = j.at("total_seconds").get<double>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

}  // namespace lrtfs
