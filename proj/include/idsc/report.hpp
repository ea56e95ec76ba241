#pragma once

// Report emitters. Every report carries the resolved config (including seed
// and fixture version) and its rows as strings; exact values are "p/q".
//
// CSV layout:
//   # idsc <command>
//   # key=value            (one line per config entry)
//   col1,col2,...
//   v1,v2,...
//   # summary key=value    (one line per summary entry)
//   # ok=true|false

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "idsc/enclosure.hpp"
#include "idsc/errors.hpp"
#include "idsc/rational.hpp"

namespace idsc {

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(const std::string& s)
{
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw usage_error("format must be csv or json, got '" + s + "'");
}

inline std::string fmt_bool(bool b) { return b ? "true" : "false"; }

/// Fixed-point decimal for the Monte Carlo columns, the only inexact output.
inline std::string fmt_decimal(double v, int digits = 10)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

/// Exact value as "p/q"; an enclosure as "[lo;hi]" so CSV stays one column.
inline std::string fmt_bounds(const Bounds& b)
{
    if (b.is_exact()) return to_string(b.lower);
    return "[" + to_string(b.lower) + ";" + to_string(b.upper) + "]";
}

class Report {
public:
    using Entries = std::vector<std::pair<std::string, std::string>>;

    explicit Report(std::string command) : command_(std::move(command)) {}

    void config(std::string key, std::string value) { config_.emplace_back(std::move(key), std::move(value)); }
    void columns(std::vector<std::string> cols) { columns_ = std::move(cols); }
    void row(std::vector<std::string> cells)
    {
        IDSC_ENSURE(cells.size() == columns_.size(), "report row width differs from header");
        rows_.push_back(std::move(cells));
    }
    void summary(std::string key, std::string value) { summary_.emplace_back(std::move(key), std::move(value)); }
    void fail() { ok_ = false; }
    void require(bool cond) { ok_ = ok_ && cond; }

    bool ok() const { return ok_; }
    const std::string& command() const { return command_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    const Entries& summary_entries() const { return summary_; }

    void write_csv(std::ostream& os) const
    {
        os << "# idsc " << command_ << '\n';
        for (const auto& [k, v] : config_) os << "# " << k << '=' << v << '\n';
        write_csv_line(os, columns_);
        for (const auto& r : rows_) write_csv_line(os, r);
        for (const auto& [k, v] : summary_) os << "# summary " << k << '=' << v << '\n';
        os << "# ok=" << fmt_bool(ok_) << '\n';
    }

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["command"] = command_;
        j["config"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : config_) j["config"][k] = v;
        j["columns"] = columns_;
        j["rows"] = rows_;
        j["summary"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : summary_) j["summary"][k] = v;
        j["ok"] = ok_;
        return j;
    }

    void write(std::ostream& os, ReportFormat f) const
    {
        if (f == ReportFormat::csv)
            write_csv(os);
        else
            os << to_json().dump(2) << '\n';
    }

private:
    static std::string csv_cell(const std::string& s)
    {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        return out + "\"";
    }
    static void write_csv_line(std::ostream& os, const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_cell(cells[i]);
        os << '\n';
    }

    std::string command_;
    Entries config_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
    Entries summary_;
    bool ok_ = true;
};

} // namespace idsc
