#pragma once

#include <bit>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ocdl/cdl.hpp"
#include "ocdl/metrics.hpp"
#include "ocdl/signal_model.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

static_assert(std::endian::native == std::endian::little, "raw sample files are little-endian");

using json = nlohmann::json;

// Shortest decimal string that parses back to the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("fmt_double: conversion failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error("parse_double: bad number '" + std::string(s) + "'");
  return v;
}

inline long parse_long(std::string_view s) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error("parse_long: bad integer '" + std::string(s) + "'");
  return v;
}

inline void write_raw_f64(const std::filesystem::path& path, const Vec& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline Vec read_raw_f64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  auto bytes = static_cast<long>(in.tellg());
  if (bytes % sizeof(double) != 0) throw std::runtime_error("truncated sample file: " + path.string());
  in.seekg(0);
  Vec v(bytes / sizeof(double));
  in.read(reinterpret_cast<char*>(v.data()), bytes);
  if (!in) throw std::runtime_error("read failed: " + path.string());
  return v;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

// --- CSV -------------------------------------------------------------------

// Writes RFC 4180 style lines (CRLF); readers accept plain LF too.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path.string());
  }

  void row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << "\r\n";
  }

  ~CsvWriter() { out_.flush(); }

 private:
  std::ofstream out_;
};

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                                      const std::vector<std::string>& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      if (fields != header) throw std::runtime_error(path.string() + ": unexpected header");
      first = false;
      continue;
    }
    if (fields.size() != header.size()) throw std::runtime_error(path.string() + ": ragged row");
    rows.push_back(std::move(fields));
  }
  if (first) throw std::runtime_error(path.string() + ": missing header");
  return rows;
}

// --- signals ----------------------------------------------------------------

inline void save_signal(const std::filesystem::path& dir, const DiscreteSignal& sig) {
  write_raw_f64(dir / "signal.f64", sig.samples);
  write_json_file(dir / "signal.json", json{{"length", sig.samples.size()}, {"fs", sig.fs}});
}

inline DiscreteSignal load_signal(const std::filesystem::path& dir) {
  json meta = read_json_file(dir / "signal.json");
  DiscreteSignal sig{read_raw_f64(dir / "signal.f64"), meta.at("fs").get<double>()};
  if (sig.samples.size() != meta.at("length").get<long>())
    throw std::runtime_error("signal.f64 length does not match sidecar");
  if (sig.fs <= 0.0) throw std::runtime_error("signal sidecar: fs must be positive");
  return sig;
}

// --- template sets -----------------------------------------------------------

struct TemplateSet {
  Dictionary dict;
  double fs = 0.0;
};

inline void save_templates(const std::filesystem::path& dir, const TemplateSet& set,
                           const std::string& stem = "templates") {
  validate_dictionary(set.dict);
  const int L = set.dict.length();
  Vec flat(static_cast<long>(set.dict.num_templates()) * L);
  for (int c = 0; c < set.dict.num_templates(); ++c) flat.segment(static_cast<long>(c) * L, L) = set.dict.templates[c].samples;
  write_raw_f64(dir / (stem + ".f64"), flat);
  write_json_file(dir / (stem + ".json"),
                  json{{"count", set.dict.num_templates()}, {"length", L}, {"fs", set.fs}});
}

inline TemplateSet load_templates(const std::filesystem::path& dir, const std::string& stem = "templates") {
  json meta = read_json_file(dir / (stem + ".json"));
  int C = meta.at("count").get<int>();
  int L = meta.at("length").get<int>();
  TemplateSet set;
  set.fs = meta.at("fs").get<double>();
  Vec flat = read_raw_f64(dir / (stem + ".f64"));
  if (flat.size() != static_cast<long>(C) * L) throw std::runtime_error(stem + ".f64 size does not match sidecar");
  for (int c = 0; c < C; ++c) set.dict.templates.push_back(Template{flat.segment(static_cast<long>(c) * L, L)});
  validate_dictionary(set.dict);
  return set;
}

// --- event trains ------------------------------------------------------------

inline void save_events(const std::filesystem::path& path, const EventTrain& train) {
  CsvWriter csv(path);
  csv.row({"source", "time_seconds", "amplitude"});
  for (const auto& e : train.events)
    csv.row({std::to_string(e.source), fmt_double(e.time), fmt_double(e.amplitude)});
}

inline EventTrain load_events(const std::filesystem::path& path, double duration) {
  EventTrain train;
  train.duration = duration;
  for (const auto& row : read_csv(path, {"source", "time_seconds", "amplitude"}))
    train.events.push_back(Event{static_cast<int>(parse_long(row[0])), parse_double(row[1]), parse_double(row[2])});
  return train;
}

// --- sparse codes --------------------------------------------------------------

struct CodesFile {
  std::vector<SparseCode> codes;
  long W = 0;
  int L = 0;
  int K = 1;
};

inline void save_codes(const std::filesystem::path& dir, const std::vector<SparseCode>& codes,
                       long W, int L) {
  int K = codes.empty() ? 1 : codes[0].K;
  CsvWriter csv(dir / "codes.csv");
  csv.row({"window", "source", "sub_grid", "lag", "time_samples", "amplitude"});
  for (const auto& code : codes)
    for (const auto& e : code.events) {
      double pos = static_cast<double>(code.window_index) * W + e.lag + (L - 1) / 2.0 +
                   static_cast<double>(e.shift) / code.K;
      csv.row({std::to_string(code.window_index), std::to_string(e.source), std::to_string(e.shift),
               std::to_string(e.lag), fmt_double(pos), fmt_double(e.amplitude)});
    }
  write_json_file(dir / "codes.json", json{{"windows", codes.size()}, {"W", W}, {"L", L}, {"K", K}});
}

inline CodesFile load_codes(const std::filesystem::path& dir) {
  json meta = read_json_file(dir / "codes.json");
  CodesFile file;
  file.W = meta.at("W").get<long>();
  file.L = meta.at("L").get<int>();
  file.K = meta.at("K").get<int>();
  long J = meta.at("windows").get<long>();
  file.codes.assign(J, SparseCode{});
  for (long j = 0; j < J; ++j) {
    file.codes[j].window_index = static_cast<int>(j);
    file.codes[j].K = file.K;
  }
  for (const auto& row : read_csv(dir / "codes.csv",
                                  {"window", "source", "sub_grid", "lag", "time_samples", "amplitude"})) {
    long j = parse_long(row[0]);
    if (j < 0 || j >= J) throw std::runtime_error("codes.csv: window index out of range");
    file.codes[j].events.push_back(CodeEvent{static_cast<int>(parse_long(row[1])),
                                             static_cast<int>(parse_long(row[2])),
                                             static_cast<int>(parse_long(row[3])), parse_double(row[5])});
  }
  return file;
}

// --- run reports ---------------------------------------------------------------

inline void save_trace(const std::filesystem::path& path, const std::vector<CdlIteration>& trace,
                       int num_templates) {
  CsvWriter csv(path);
  std::vector<std::string> header{"iteration", "reconstruction_error"};
  for (int c = 0; c < num_templates; ++c) header.push_back("err_" + std::to_string(c));
  header.push_back("csc_seconds");
  header.push_back("cdu_seconds");
  csv.row(header);
  for (size_t i = 0; i < trace.size(); ++i) {
    std::vector<std::string> row{std::to_string(i + 1), fmt_double(trace[i].reconstruction_error)};
    for (int c = 0; c < num_templates; ++c)
      row.push_back(trace[i].template_err.empty() ? "" : fmt_double(trace[i].template_err[c]));
    row.push_back(fmt_double(trace[i].csc_seconds));
    row.push_back(fmt_double(trace[i].cdu_seconds));
    csv.row(row);
  }
}

inline void save_bench(const std::filesystem::path& path, const std::vector<BenchRecord>& records) {
  CsvWriter csv(path);
  csv.row({"method", "T_seconds", "events_per_source", "total_events", "median_seconds", "trials"});
  for (const auto& r : records)
    csv.row({method_name(r.method), fmt_double(r.T), std::to_string(r.events_per_source),
             std::to_string(r.total_events), fmt_double(r.median_seconds), std::to_string(r.trials)});
}

inline json hit_report_json(const HitReport& report) {
  json j;
  j["defined"] = report.defined;
  j["average_hit_error_samples"] = report.defined ? json(report.average) : json();
  j["matched"] = report.matched.size();
  j["unmatched_true"] = report.unmatched_true;
  j["unmatched_est"] = report.unmatched_est;
  json per = json::array();
  for (size_t c = 0; c < report.per_source_average.size(); ++c)
    per.push_back(json{{"source", c},
                       {"matched", report.per_source_matched[c]},
                       {"average", report.per_source_matched[c] > 0 ? json(report.per_source_average[c]) : json()}});
  j["per_source"] = per;
  return j;
}

}  // namespace ocdl
