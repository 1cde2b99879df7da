#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sls {

enum class TraceKind { LightScattering, RefractiveIndex };

// Timestamped detector readings straight from an instrument export.
// `values[p][ch]` is the reading of channel `ch` at time point `p`.
struct RawTrace {
  std::vector<double> times;               // seconds, strictly increasing
  std::vector<std::vector<double>> values; // one row per time point
  std::vector<std::string> channel_names;
  TraceKind kind = TraceKind::LightScattering;
  std::size_t dropped_nonfinite = 0;       // rows discarded at ingestion

  std::size_t size() const { return times.size(); }
  std::size_t channels() const { return values.empty() ? 0 : values.front().size(); }
};

// Parses the trace CSV layout: header `time,<ch1>,<ch2>,...`, then one row
// per time point. Rows containing non-finite numeric readings are dropped
// (their count is reported on the result); non-numeric cells are a ParseError
// with the offending line number. Throws EmptyTrace for < 3 usable rows and
// NonMonotoneTime when times do not strictly increase.
RawTrace ingest_trace(const std::string& path, TraceKind kind);

// Parse from an in-memory CSV body (same contract as ingest_trace).
RawTrace parse_trace_csv(const std::string& text, TraceKind kind,
                         const std::string& origin = "<memory>");

// Serializes with shortest round-trip formatting: re-ingesting reproduces
// times and values bit-exactly for finite inputs.
std::string trace_to_csv(const RawTrace& trace);
void write_trace_csv(const RawTrace& trace, const std::string& path);

}  // namespace sls
