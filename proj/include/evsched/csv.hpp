// SPDX-License-Identifier: Apache-2.0
#pragma once

// CSV schemas used by the harness and the CLI:
//
//   series  : slot,value                      (per-slot inputs, 1-based slots)
//   profile : ev,slot,kw                      (re-ingestible, full precision)
//   trace   : slot,load_pu,temp_c,faa,joule_kwh
//
// Numbers in re-ingestible files are written with the shortest representation
// that parses back to the identical double. Header rows are mandatory, lines
// end with LF, decimals use '.'.

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "evsched/errors.hpp"
#include "evsched/scenario.hpp"
#include "evsched/thermal.hpp"

namespace evsched {

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

inline std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

namespace detail {

inline double parse_double_field(std::string_view text, long line) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError("not a number: '" + std::string(text) + "'", line);
    return value;
}

inline long parse_index_field(std::string_view text, long line) {
    long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || value < 1)
        throw ParseError("not a positive index: '" + std::string(text) + "'", line);
    return value;
}

inline std::vector<std::string_view> split_fields(std::string_view row) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = row.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(row.substr(start));
            return fields;
        }
        fields.push_back(row.substr(start, comma - start));
        start = comma + 1;
    }
}

/// Reads every line, strips one trailing CR if present, skips the final
/// empty line of LF-terminated files.
inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace detail

/// Reads a slot,value series; slots must run 1..T consecutively.
inline std::vector<double> read_series_csv(const std::string& path) {
    const std::vector<std::string> lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError("empty series file: " + path, 1);
    if (lines.front() != "slot,value")
        throw ParseError("expected header 'slot,value' in " + path, 1);
    std::vector<double> values;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        const long line_no = static_cast<long>(n + 1);
        const auto fields = detail::split_fields(lines[n]);
        if (fields.size() != 2) throw ParseError("expected 2 fields in " + path, line_no);
        const long slot = detail::parse_index_field(fields[0], line_no);
        if (slot != static_cast<long>(values.size()) + 1)
            throw ParseError("slots must be consecutive from 1 in " + path, line_no);
        values.push_back(detail::parse_double_field(fields[1], line_no));
    }
    if (values.empty()) throw ParseError("series has no data rows: " + path, 1);
    return values;
}

inline void write_series_csv(const std::string& path, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << "slot,value\n";
    for (std::size_t t = 0; t < values.size(); ++t)
        out << (t + 1) << ',' << format_double(values[t]) << '\n';
}

inline void write_profile_csv(std::ostream& out, const ChargingProfile& v) {
    out << "ev,slot,kw\n";
    for (std::size_t i = 0; i < v.ev_count(); ++i)
        for (std::size_t t = 0; t < v.slot_count(); ++t)
            out << (i + 1) << ',' << (t + 1) << ',' << format_double(v.at(i, t)) << '\n';
}

inline void write_profile_csv(const std::string& path, const ChargingProfile& v) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    write_profile_csv(out, v);
}

/// Reads an ev,slot,kw profile. Rows must cover every (ev, slot) pair of the
/// stated dimensions exactly once, in any order.
inline ChargingProfile read_profile_csv(const std::string& path, double delta_h) {
    const std::vector<std::string> lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError("empty profile file: " + path, 1);
    if (lines.front() != "ev,slot,kw")
        throw ParseError("expected header 'ev,slot,kw' in " + path, 1);

    std::size_t evs = 0, slots = 0;
    struct Entry {
        std::size_t ev, slot;
        double kw;
    };
    std::vector<Entry> entries;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        const long line_no = static_cast<long>(n + 1);
        const auto fields = detail::split_fields(lines[n]);
        if (fields.size() != 3) throw ParseError("expected 3 fields in " + path, line_no);
        Entry e{};
        e.ev = static_cast<std::size_t>(detail::parse_index_field(fields[0], line_no));
        e.slot = static_cast<std::size_t>(detail::parse_index_field(fields[1], line_no));
        e.kw = detail::parse_double_field(fields[2], line_no);
        if (e.kw < 0.0) throw ParseError("negative charging power in " + path, line_no);
        evs = std::max(evs, e.ev);
        slots = std::max(slots, e.slot);
        entries.push_back(e);
    }
    if (entries.empty()) throw ParseError("profile has no data rows: " + path, 1);
    if (entries.size() != evs * slots)
        throw ParseError("profile rows do not fill an " + std::to_string(evs) + "x" +
                             std::to_string(slots) + " matrix",
                         static_cast<long>(lines.size()));
    ChargingProfile v(evs, slots, delta_h);
    std::vector<bool> seen(evs * slots, false);
    for (const Entry& e : entries) {
        const std::size_t idx = (e.ev - 1) * slots + (e.slot - 1);
        if (seen[idx]) throw ParseError("duplicate (ev, slot) pair in " + path, 1);
        seen[idx] = true;
        v.set(e.ev - 1, e.slot - 1, e.kw);
    }
    return v;
}

inline void write_trace_csv(std::ostream& out, const LoadSeries& loads, const StateTrace& trace) {
    out << "slot,load_pu,temp_c,faa,joule_kwh\n";
    for (std::size_t t = 0; t < trace.size(); ++t) {
        char faa_buf[32];
        std::snprintf(faa_buf, sizeof(faa_buf), "%.6g", trace.faa[t]);
        out << (t + 1) << ',' << format_fixed(loads.slots_pu[t], 6) << ','
            << format_fixed(trace.temps_c[t], 2) << ',' << faa_buf << ','
            << format_fixed(trace.joule_kwh[t], 3) << '\n';
    }
}

inline void write_trace_csv(const std::string& path, const LoadSeries& loads,
                            const StateTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    write_trace_csv(out, loads, trace);
}

}  // namespace evsched
