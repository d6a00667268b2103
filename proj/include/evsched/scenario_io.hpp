// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scenario files: a human-readable `key = value` config holding the scalars
// and the EV demand list, referencing two CSV series (non-EV demand in kW,
// ambient in degC) by paths relative to the config file. '#' starts a
// comment. save_scenario/load_scenario round-trip exactly.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "evsched/csv.hpp"
#include "evsched/scenario.hpp"

namespace evsched {

namespace detail {

inline std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    return text;
}

inline std::vector<double> parse_double_list(std::string_view text, long line) {
    std::vector<double> values;
    for (std::string_view field : split_fields(text)) values.push_back(parse_double_field(trim(field), line));
    return values;
}

inline bool parse_bool_field(std::string_view text, long line) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ParseError("expected true or false, got '" + std::string(text) + "'", line);
}

}  // namespace detail

/// Parses and validates a scenario config plus the two series it references.
inline Scenario load_scenario(const std::string& path) {
    namespace fs = std::filesystem;
    const std::vector<std::string> lines = detail::read_lines(path);
    Scenario s;
    s.nonev_kw.clear();
    s.demands_kwh.clear();

    long declared_slots = -1;
    std::string nonev_csv, ambient_csv;
    std::map<std::string, long, std::less<>> seen;

    for (std::size_t n = 0; n < lines.size(); ++n) {
        const long line_no = static_cast<long>(n + 1);
        std::string_view line = lines[n];
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
        const std::string key{detail::trim(line.substr(0, eq))};
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (auto [it, inserted] = seen.emplace(key, line_no); !inserted)
            throw ParseError("duplicate key '" + key + "'", line_no);

        if (key == "slots")
            declared_slots = detail::parse_index_field(value, line_no);
        else if (key == "delta_h")
            s.delta_h = detail::parse_double_field(value, line_no);
        else if (key == "nominal_kw")
            s.nominal_kw = detail::parse_double_field(value, line_no);
        else if (key == "v_max_kw")
            s.v_max_kw = detail::parse_double_field(value, line_no);
        else if (key == "demands_kwh")
            s.demands_kwh = detail::parse_double_list(value, line_no);
        else if (key == "nonev_csv")
            nonev_csv = std::string(value);
        else if (key == "ambient_csv")
            ambient_csv = std::string(value);
        else if (key == "a")
            s.thermal.a = detail::parse_double_field(value, line_no);
        else if (key == "b1")
            s.thermal.b1 = detail::parse_double_field(value, line_no);
        else if (key == "b2")
            s.thermal.b2 = detail::parse_double_field(value, line_no);
        else if (key == "amb_gain")
            s.thermal.amb_gain = detail::parse_double_field(value, line_no);
        else if (key == "amb_offset_c")
            s.thermal.amb_offset = detail::parse_double_field(value, line_no);
        else if (key == "x0_c")
            s.thermal.x0 = detail::parse_double_field(value, line_no);
        else if (key == "u0_pu")
            s.thermal.u0 = detail::parse_double_field(value, line_no);
        else if (key == "x_max_c")
            s.thermal.x_max = detail::parse_double_field(value, line_no);
        else if (key == "alpha")
            s.thermal.alpha = detail::parse_double_field(value, line_no);
        else if (key == "beta")
            s.thermal.beta = detail::parse_double_field(value, line_no);
        else if (key == "joule_k_pu")
            s.joule.k_pu = detail::parse_double_field(value, line_no);
        else if (key == "cost_kind") {
            if (value == "zero")
                s.memoryless.kind = CostKind::zero;
            else if (value == "quadratic")
                s.memoryless.kind = CostKind::quadratic;
            else
                throw ParseError("cost_kind must be zero or quadratic", line_no);
        } else if (key == "cost_coefficient")
            s.memoryless.coefficient = detail::parse_double_field(value, line_no);
        else if (key == "fold_beta")
            s.memoryless.fold_beta = detail::parse_bool_field(value, line_no);
        else
            throw ParseError("unknown key '" + key + "'", line_no);
    }

    if (declared_slots < 1) throw ValidationError(path + ": missing or invalid 'slots'");
    if (nonev_csv.empty()) throw ValidationError(path + ": missing 'nonev_csv'");
    if (ambient_csv.empty()) throw ValidationError(path + ": missing 'ambient_csv'");

    const fs::path dir = fs::path(path).parent_path();
    s.nonev_kw = read_series_csv((dir / nonev_csv).string());
    s.ambient.slots_c = read_series_csv((dir / ambient_csv).string());
    if (s.nonev_kw.size() != static_cast<std::size_t>(declared_slots))
        throw ValidationError(path + ": non-EV series has " + std::to_string(s.nonev_kw.size()) +
                              " slots, config declares " + std::to_string(declared_slots));
    if (s.ambient.size() != static_cast<std::size_t>(declared_slots))
        throw ValidationError(path + ": ambient series has " + std::to_string(s.ambient.size()) +
                              " slots, config declares " + std::to_string(declared_slots));
    s.joule.base_kw = s.nominal_kw;
    s.validate();
    return s;
}

/// Writes the config beside `<stem>.nonev.csv` and `<stem>.ambient.csv`.
inline void save_scenario(const std::string& path, const Scenario& s) {
    namespace fs = std::filesystem;
    const fs::path cfg(path);
    const std::string stem = cfg.stem().string();
    const std::string nonev_name = stem + ".nonev.csv";
    const std::string ambient_name = stem + ".ambient.csv";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << "# evsched scenario\n";
    out << "slots = " << s.slot_count() << '\n';
    out << "delta_h = " << format_double(s.delta_h) << '\n';
    out << "nominal_kw = " << format_double(s.nominal_kw) << '\n';
    out << "v_max_kw = " << format_double(s.v_max_kw) << '\n';
    if (!s.demands_kwh.empty()) {
        out << "demands_kwh = ";
        for (std::size_t i = 0; i < s.demands_kwh.size(); ++i)
            out << (i ? "," : "") << format_double(s.demands_kwh[i]);
        out << '\n';
    }
    out << "a = " << format_double(s.thermal.a) << '\n';
    out << "b1 = " << format_double(s.thermal.b1) << '\n';
    out << "b2 = " << format_double(s.thermal.b2) << '\n';
    out << "amb_gain = " << format_double(s.thermal.amb_gain) << '\n';
    out << "amb_offset_c = " << format_double(s.thermal.amb_offset) << '\n';
    out << "x0_c = " << format_double(s.thermal.x0) << '\n';
    out << "u0_pu = " << format_double(s.thermal.u0) << '\n';
    out << "x_max_c = " << format_double(s.thermal.x_max) << '\n';
    out << "alpha = " << format_double(s.thermal.alpha) << '\n';
    out << "beta = " << format_double(s.thermal.beta) << '\n';
    out << "joule_k_pu = " << format_double(s.joule.k_pu) << '\n';
    out << "cost_kind = " << (s.memoryless.kind == CostKind::zero ? "zero" : "quadratic") << '\n';
    out << "cost_coefficient = " << format_double(s.memoryless.coefficient) << '\n';
    out << "fold_beta = " << (s.memoryless.fold_beta ? "true" : "false") << '\n';
    out << "nonev_csv = " << nonev_name << '\n';
    out << "ambient_csv = " << ambient_name << '\n';

    const fs::path dir = cfg.parent_path();
    write_series_csv((dir / nonev_name).string(), s.nonev_kw);
    write_series_csv((dir / ambient_name).string(), s.ambient.slots_c);
}

}  // namespace evsched
