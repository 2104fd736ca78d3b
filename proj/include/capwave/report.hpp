#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "capwave/error.hpp"

// Tabular results, run manifests and gnuplot data. Everything written here is a pure function of
// its inputs (no clocks), so identical runs produce byte-identical files.

namespace capwave {

inline constexpr int schema_version = 1;
inline constexpr const char* artifact_version = "1.0.0";

struct Column {
    std::string name;
    std::string tag;   // what the column measures; written into the header as name:tag
    std::string unit;  // recorded in the manifest
};

using Cell = std::variant<double, long long, std::string>;

class Table {
public:
    Table() = default;
    explicit Table(std::vector<Column> cols) : cols_(std::move(cols)) {
        for (const auto& c : cols_)
            if ((c.name + c.tag).find_first_of(",\n\"") != std::string::npos)
                throw PreconditionError("table: header '" + c.name + "' needs quoting");
    }

    void add_row(std::vector<Cell> row) {
        if (row.size() != cols_.size()) throw PreconditionError("table: row width does not match the header");
        rows_.push_back(std::move(row));
    }

    const std::vector<Column>& columns() const { return cols_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < cols_.size(); ++i)
            if (cols_[i].name == name) return i;
        throw PreconditionError("table: no column '" + name + "'");
    }

    double number(std::size_t row, const std::string& name) const {
        const Cell& c = rows_.at(row)[column_index(name)];
        if (const auto* d = std::get_if<double>(&c)) return *d;
        if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
        throw PreconditionError("table: column '" + name + "' is not numeric");
    }

    static std::string format(const Cell& c) {
        if (const auto* d = std::get_if<double>(&c)) {
            if (std::isnan(*d)) return "nan";
            if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", *d);
            return buf;
        }
        if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
        return std::get<std::string>(c);
    }

    std::string to_csv() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < cols_.size(); ++i)
            os << (i ? "," : "") << cols_[i].name << (cols_[i].tag.empty() ? "" : ":" + cols_[i].tag);
        os << '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format(r[i]);
            os << '\n';
        }
        return os.str();
    }

    nlohmann::json column_json() const {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& c : cols_) a.push_back({{"name", c.name}, {"tag", c.tag}, {"unit", c.unit}});
        return a;
    }

private:
    std::vector<Column> cols_;
    std::vector<std::vector<Cell>> rows_;
};

/// Write through a sibling temporary and rename, so readers never see a half-written file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot write " + tmp);
        os << content;
        os.flush();
        if (!os) throw ConfigError("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

struct Manifest {
    std::string subcommand;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string status = "ok";  // ok | config_error | numerical_failure
    std::string message;
    nlohmann::json outputs = nlohmann::json::array();
    nlohmann::json summary = nlohmann::json::object();

    void add_output(const std::string& file, const Table* t = nullptr) {
        nlohmann::json o{{"file", file}};
        if (t) o["columns"] = t->column_json();
        outputs.push_back(o);
    }

    nlohmann::json to_json() const {
        return {{"schema_version", schema_version},
                {"artifact_version", artifact_version},
                {"subcommand", subcommand},
                {"seed", seed},
                {"status", status},
                {"message", message},
                {"config", config},
                {"outputs", outputs},
                {"summary", summary}};
    }

    void write(const std::filesystem::path& dir) const { write_atomic(dir / "manifest.json", to_json().dump(2) + "\n"); }
};

// ---------------------------------------------------------------------------
// Plot data

enum class PlotKind { DecayLogLog, EnergyDrift, OrderFit };

inline PlotKind parse_plot_kind(const std::string& s) {
    if (s == "decay") return PlotKind::DecayLogLog;
    if (s == "energy") return PlotKind::EnergyDrift;
    if (s == "order-fit") return PlotKind::OrderFit;
    throw ConfigError("unknown plot kind '" + s + "' (decay, energy, order-fit)");
}

/// Whitespace-separated data plus a gnuplot script stub. Expected columns:
///   decay:     t, sup_norm                      -> t sup_norm (plotted on log axes)
///   energy:    t, energy (or E_physical)        -> t drift, drift = |E - E0| / |E0|
///   order-fit: log_param, log_peak, fit_line    -> copied as is
/// Returns the two paths written.
inline std::vector<std::filesystem::path> emit_plot_data(const Table& report, PlotKind kind,
                                                         const std::filesystem::path& dir, const std::string& stem) {
    if (report.empty()) throw PreconditionError("emit_plot_data: empty report");
    std::ostringstream data, script;
    const auto dat = dir / (stem + ".dat");
    const auto gp = dir / (stem + ".gp");
    auto num = [](double v) { return Table::format(Cell{v}); };
    switch (kind) {
        case PlotKind::DecayLogLog: {
            data << "# t sup_norm\n";
            for (std::size_t i = 0; i < report.rows().size(); ++i)
                data << num(report.number(i, "t")) << ' ' << num(report.number(i, "sup_norm")) << '\n';
            script << "set logscale xy\nset xlabel 't'\nset ylabel 'sup norm'\n"
                   << "plot '" << dat.filename().string() << "' using 1:2 with linespoints title 'sup norm'\n";
            break;
        }
        case PlotKind::EnergyDrift: {
            data << "# t drift\n";
            std::string col = "energy";
            for (const auto& c : report.columns())
                if (c.name == "E_physical") col = c.name;
            const double e0 = report.number(0, col);
            for (std::size_t i = 0; i < report.rows().size(); ++i) {
                const double e = report.number(i, col);
                data << num(report.number(i, "t")) << ' ' << num(e0 != 0.0 ? std::abs(e - e0) / std::abs(e0) : std::abs(e - e0))
                     << '\n';
            }
            script << "set xlabel 't'\nset ylabel 'relative energy drift'\n"
                   << "plot '" << dat.filename().string() << "' using 1:2 with lines title 'drift'\n";
            break;
        }
        case PlotKind::OrderFit: {
            data << "# log_param log_maxval fit_line\n";
            for (std::size_t i = 0; i < report.rows().size(); ++i)
                data << num(report.number(i, "log_param")) << ' ' << num(report.number(i, "log_peak")) << ' '
                     << num(report.number(i, "fit_line")) << '\n';
            script << "set xlabel 'log s'\nset ylabel 'log max |m|'\n"
                   << "plot '" << dat.filename().string() << "' using 1:2 with points title 'samples', '' using 1:3 with lines title 'fit'\n";
            break;
        }
    }
    write_atomic(dat, data.str());
    write_atomic(gp, script.str());
    return {dat, gp};
}

} // namespace capwave
