#include "shellflow/runio.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace shellflow {

namespace fs = std::filesystem;

namespace {

void append_g17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("io: cannot write " + file.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const fs::path& file) {
  std::string text = "t";
  const int N = traj.states[0].n_shells();
  for (int n = 1; n <= N; ++n) {
    text += ",re_u" + std::to_string(n) + ",im_u" + std::to_string(n);
  }
  text += "\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    append_g17(text, traj.times[i]);
    for (int n = 1; n <= N; ++n) {
      const cplx v = traj.states[i].at(n);
      text += ',';
      append_g17(text, v.real());
      text += ',';
      append_g17(text, v.imag());
    }
    text += '\n';
  }
  write_text(file, text);
}

void write_path_binary(const HilbertPath& path, const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("io: cannot write " + file.string());
  const char magic[4] = {'S', 'F', 'N', 'B'};
  const std::uint32_t version = 1;
  const double hurst = path.meta.hurst;
  const double horizon = path.horizon();
  const std::uint64_t m = path.n_cells();
  const std::uint64_t dim = static_cast<std::uint64_t>(path.dim());
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&hurst), sizeof hurst);
  out.write(reinterpret_cast<const char*>(&horizon), sizeof horizon);
  out.write(reinterpret_cast<const char*>(&m), sizeof m);
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  const auto raw = path.raw();
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(double)));
}

HilbertPath read_path_binary(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("io: cannot read " + file.string());
  char magic[4];
  std::uint32_t version = 0;
  double hurst = 0, horizon = 0;
  std::uint64_t m = 0, dim = 0;
  in.read(magic, 4);
  if (std::memcmp(magic, "SFNB", 4) != 0)
    throw std::runtime_error("io: bad magic in " + file.string());
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&hurst), sizeof hurst);
  in.read(reinterpret_cast<char*>(&horizon), sizeof horizon);
  in.read(reinterpret_cast<char*>(&m), sizeof m);
  in.read(reinterpret_cast<char*>(&dim), sizeof dim);
  HilbertPath path(horizon, m, static_cast<int>(dim), PathKind::sampled);
  path.meta.hurst = hurst;
  std::vector<double> vals((m + 1) * dim);
  in.read(reinterpret_cast<char*>(vals.data()),
          static_cast<std::streamsize>(vals.size() * sizeof(double)));
  if (!in) throw std::runtime_error("io: truncated path file " + file.string());
  for (std::size_t j = 0; j <= m; ++j)
    for (std::uint64_t c = 0; c < dim; ++c)
      path.value(j, static_cast<int>(c)) = vals[j * dim + c];
  return path;
}

void write_path_csv(const HilbertPath& path, const fs::path& file) {
  std::string text = "t";
  for (int c = 1; c <= path.dim(); ++c) text += ",w" + std::to_string(c);
  text += '\n';
  for (std::size_t j = 0; j <= path.n_cells(); ++j) {
    append_g17(text, path.dt() * static_cast<double>(j));
    for (int c = 0; c < path.dim(); ++c) {
      text += ',';
      append_g17(text, path.value(j, c));
    }
    text += '\n';
  }
  write_text(file, text);
}

std::string file_digest(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("io: cannot digest " + file.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof buf);
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

fs::path make_run_dir(std::uint64_t seed) {
  const char* env = std::getenv("SHELLFLOW_OUT");
  fs::path root = env ? fs::path(env) : fs::path("runs");
  const auto now = std::chrono::system_clock::now();
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                      now.time_since_epoch())
                      .count();
  const std::time_t secs = static_cast<std::time_t>(us / 1000000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char stamp[64];
  std::snprintf(stamp, sizeof stamp, "%04d%02d%02dT%02d%02d%02d.%06ldZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<long>(us % 1000000));
  fs::path dir = root / (std::string(stamp) + "-" + std::to_string(seed));
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const fs::path& run_dir, const Config& cfg,
                    std::uint64_t seed, bool pass, double wall_ms,
                    const std::vector<fs::path>& outputs,
                    const std::string& extra_json) {
  nlohmann::json j;
  j["version"] = kVersionTag;
  j["seed"] = seed;
  j["pass"] = pass;
  j["wall_ms"] = wall_ms;
  nlohmann::json cj = nlohmann::json::object();
  for (const auto& [k, v] : cfg.entries()) cj[k] = v;
  j["config"] = cj;
  nlohmann::json digests = nlohmann::json::object();
  for (const auto& f : outputs) digests[f.filename().string()] = file_digest(f);
  j["outputs"] = digests;
  j["extra"] = nlohmann::json::parse(extra_json);
  std::ofstream out(run_dir / "manifest.json");
  out << j.dump(2) << "\n";
}

}  // namespace shellflow
