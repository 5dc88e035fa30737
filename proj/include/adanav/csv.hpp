#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "adanav/errors.hpp"
#include "adanav/learn.hpp"
#include "adanav/spectral.hpp"

namespace adanav {

// 12 significant digits, locale-independent. Infinities serialize as
// "inf"/"-inf" so files round-trip without locale or platform drift.
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline double parse_number(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw ConfigError("malformed number field '" + s + "'");
  return v;
}

// Writes via a sibling temp file and renames into place, so a crash never
// leaves a truncated CSV behind.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw ConfigError("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline constexpr const char* kCorrelationHeader =
    "kernel,beta,entropy_nats,spectral_gap,mixing_lower_bound";

inline std::string correlation_csv(const std::vector<CorrelationRecord>& records) {
  std::string out = kCorrelationHeader;
  out += '\n';
  for (const CorrelationRecord& r : records) {
    out += r.kernel_name;
    out += ',';
    out += format_number(r.beta);
    out += ',';
    out += format_number(r.entropy);
    out += ',';
    out += format_number(r.gap);
    out += ',';
    out += format_number(r.mixing_lower_bound);
    out += '\n';
  }
  return out;
}

inline constexpr const char* kLearningCurveHeader =
    "seed,episode,t_c,entropy_nats,episode_return,cumulative_samples,"
    "goal_reached";

inline std::string learning_curve_csv(std::uint64_t seed,
                                      const std::vector<EpisodeRecord>& episodes) {
  std::string out = kLearningCurveHeader;
  out += '\n';
  for (const EpisodeRecord& e : episodes) {
    out += std::to_string(seed);
    out += ',';
    out += std::to_string(e.episode);
    out += ',';
    out += std::to_string(e.t_c);
    out += ',';
    out += format_number(e.entropy);
    out += ',';
    out += format_number(e.episode_return);
    out += ',';
    out += std::to_string(e.cumulative_samples);
    out += ',';
    out += e.goal_reached ? "1" : "0";
    out += '\n';
  }
  return out;
}

struct LearningCurve {
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> episodes;
};

inline LearningCurve read_learning_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kLearningCurveHeader)
    throw ConfigError(path.string() + ": unexpected learning-curve header");
  LearningCurve curve;
  bool have_seed = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 7)
      throw ConfigError(path.string() + ": expected 7 fields, got " +
                        std::to_string(f.size()));
    const std::uint64_t seed = std::stoull(f[0]);
    if (!have_seed) {
      curve.seed = seed;
      have_seed = true;
    } else if (seed != curve.seed) {
      throw ConfigError(path.string() + ": mixed seeds in one file");
    }
    EpisodeRecord rec;
    rec.episode = std::stoi(f[1]);
    rec.t_c = std::stoi(f[2]);
    rec.entropy = parse_number(f[3]);
    rec.episode_return = parse_number(f[4]);
    rec.cumulative_samples = std::stoll(f[5]);
    rec.goal_reached = f[6] == "1";
    curve.episodes.push_back(rec);
  }
  return curve;
}

}  // namespace adanav
