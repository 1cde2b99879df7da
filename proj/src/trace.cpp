#include "sls/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sls/errors.hpp"
#include "sls/util.hpp"

namespace sls {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Strict numeric cell parse; leading/trailing spaces tolerated.
bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

RawTrace parse_trace_csv(const std::string& text, TraceKind kind,
                         const std::string& origin) {
  RawTrace trace;
  trace.kind = kind;

  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line))
    throw EmptyTrace(origin + ": empty file");
  ++line_no;
  auto header = split_csv_line(line);
  if (header.size() < 2)
    throw ParseError(origin + ":1: header must be `time,<ch1>,...`");
  trace.channel_names.assign(header.begin() + 1, header.end());
  if (!trace.channel_names.empty() && !trace.channel_names.back().empty() &&
      trace.channel_names.back().back() == '\r')
    trace.channel_names.back().pop_back();
  const std::size_t n_ch = trace.channel_names.size();

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != n_ch + 1)
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": expected " + std::to_string(n_ch + 1) + " cells, got " +
                       std::to_string(cells.size()));
    double t;
    if (!parse_double(cells[0], t))
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": non-numeric time cell `" + cells[0] + "`");
    std::vector<double> row(n_ch);
    bool finite = std::isfinite(t);
    for (std::size_t c = 0; c < n_ch; ++c) {
      if (!parse_double(cells[c + 1], row[c]))
        throw ParseError(origin + ":" + std::to_string(line_no) +
                         ": non-numeric value cell `" + cells[c + 1] + "`");
      finite = finite && std::isfinite(row[c]);
    }
    if (!finite) {
      // Instrument exports commonly contain sentinel NaN/Inf rows; drop them.
      ++trace.dropped_nonfinite;
      continue;
    }
    trace.times.push_back(t);
    trace.values.push_back(std::move(row));
  }

  if (trace.times.size() < 3)
    throw EmptyTrace(origin + ": fewer than 3 usable rows (" +
                     std::to_string(trace.times.size()) + ")");
  for (std::size_t i = 1; i < trace.times.size(); ++i)
    if (!(trace.times[i] > trace.times[i - 1]))
      throw NonMonotoneTime(origin + ": time not strictly increasing at row " +
                            std::to_string(i + 1));
  return trace;
}

RawTrace ingest_trace(const std::string& path, TraceKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trace_csv(buf.str(), kind, path);
}

std::string trace_to_csv(const RawTrace& trace) {
  std::string out = "time";
  for (const auto& name : trace.channel_names) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (std::size_t p = 0; p < trace.times.size(); ++p) {
    out += format_double(trace.times[p]);
    for (double v : trace.values[p]) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

void write_trace_csv(const RawTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << trace_to_csv(trace);
}

}  // namespace sls
