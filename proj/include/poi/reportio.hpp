// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// CSV emission and rendering for experiment outputs.  Every CSV starts with
// one comment header carrying the config hash, the seed, and a timestamp;
// replay comparisons exclude that line and the body is byte-stable.

#pragma once

#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "poi/attacker.hpp"
#include "poi/costbench.hpp"

namespace poi::report {

inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << h;
    return os.str();
}

inline std::string csv_header(const std::string& tool, const std::string& config_hash,
                              uint64_t seed) {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    std::ostringstream os;
    os << "# poi " << tool << " config_hash=" << config_hash << " seed=" << seed
       << " generated=" << buf << "\n";
    return os.str();
}

// Stable numeric formatting for replayable CSV bodies.
inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

// Body of a CSV file without its comment header.
inline std::string csv_body(const std::string& text) {
    if (!text.empty() && text[0] == '#') {
        size_t nl = text.find('\n');
        return nl == std::string::npos ? std::string() : text.substr(nl + 1);
    }
    return text;
}

inline std::string header_field(const std::string& text, const std::string& key) {
    if (text.empty() || text[0] != '#') return {};
    size_t nl = text.find('\n');
    std::string header = text.substr(0, nl);
    size_t pos = header.find(key + "=");
    if (pos == std::string::npos) return {};
    size_t start = pos + key.size() + 1;
    size_t end = header.find(' ', start);
    return header.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << content;
    if (!out) throw std::runtime_error(path + ": write failed");
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// ---- attack CSVs ---------------------------------------------------------------

inline std::string attack_runs_csv(const std::string& dataset,
                                   const std::vector<attack::AdvantageReport>& cells) {
    std::ostringstream os;
    os << "dataset,p,strategy,policy,biases_hidden,run,acc_attacked,acc_baseline,adv\n";
    for (const auto& c : cells)
        for (size_t r = 0; r < c.runs; ++r)
            os << dataset << "," << fmt(c.p) << "," << leak::strategy_name(c.strategy) << ","
               << c.policy << "," << (c.biases_hidden ? 1 : 0) << "," << r << ","
               << fmt(c.acc_attacked[r]) << "," << fmt(c.acc_baseline_runs[r]) << ","
               << fmt(c.adv_runs[r]) << "\n";
    return os.str();
}

inline std::string attack_aggregate_csv(const std::string& dataset,
                                        const std::vector<attack::AdvantageReport>& cells) {
    std::ostringstream os;
    os << "dataset,p,strategy,policy,biases_hidden,runs,acc_full,acc_baseline,adv_mean,adv_std\n";
    for (const auto& c : cells)
        os << dataset << "," << fmt(c.p) << "," << leak::strategy_name(c.strategy) << ","
           << c.policy << "," << (c.biases_hidden ? 1 : 0) << "," << c.runs << ","
           << fmt(c.acc_full) << "," << fmt(c.acc_baseline) << "," << fmt(c.adv_mean) << ","
           << fmt(c.adv_std) << "\n";
    return os.str();
}

// ---- CSV parsing (for `report`) --------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(tok);
    return out;
}

inline std::vector<attack::AdvantageReport> parse_aggregate_csv(const std::string& body) {
    std::istringstream in(body);
    std::string line;
    std::getline(in, line);  // column header
    std::vector<attack::AdvantageReport> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() < 10) throw std::runtime_error("aggregate CSV: malformed row");
        attack::AdvantageReport c;
        c.p = std::stod(f[1]);
        c.strategy = leak::strategy_from_name(f[2]);
        c.policy = f[3];
        c.biases_hidden = f[4] == "1";
        c.runs = std::stoul(f[5]);
        c.acc_full = std::stod(f[6]);
        c.acc_baseline = std::stod(f[7]);
        c.adv_mean = std::stod(f[8]);
        c.adv_std = std::stod(f[9]);
        cells.push_back(std::move(c));
    }
    return cells;
}

inline std::vector<bench::OverheadReport> parse_overhead_csv(const std::string& body) {
    std::istringstream in(body);
    std::string line;
    std::getline(in, line);
    std::vector<bench::OverheadReport> reports;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() < 8) throw std::runtime_error("overhead CSV: malformed row");
        if (reports.empty() || reports.back().layer != f[0]) {
            bench::OverheadReport rep;
            rep.layer = f[0];
            rep.mode = f[1] == "rescale-all" ? pack::EvalMode::rescale_all
                                             : pack::EvalMode::relin_only;
            rep.table.provenance = "(from csv)";
            rep.table.ciph_mult = rep.table.rescale = rep.table.relinearization = 1.0;
            reports.push_back(std::move(rep));
        }
        bench::OverheadPoint pt;
        pt.p = std::stod(f[2]);
        pt.ops.plain_mults = std::stoull(f[3]);
        pt.ops.ciph_mults = std::stoull(f[4]);
        pt.ops.relins = std::stoull(f[5]);
        pt.ops.rescales = std::stoull(f[6]);
        pt.factor = std::stod(f[7]);
        reports.back().points.push_back(pt);
    }
    return reports;
}

// ---- rendered tables -----------------------------------------------------------

// "mean (std)" grid in percentage points: rows are p values, columns are
// attacker policies, one block per (dataset, strategy).
inline std::string render_advantage_table(const std::vector<attack::AdvantageReport>& cells) {
    std::map<std::pair<std::string, std::string>,
             std::map<double, std::map<std::string, std::pair<double, double>>>>
        blocks;  // (strategy) -> p -> policy -> (mean, std)
    std::vector<std::string> policies;
    for (const auto& c : cells) {
        auto key = std::make_pair(leak::strategy_name(c.strategy), std::string());
        blocks[key][c.p][c.policy] = {c.adv_mean, c.adv_std};
        if (std::find(policies.begin(), policies.end(), c.policy) == policies.end())
            policies.push_back(c.policy);
    }
    std::ostringstream os;
    for (const auto& [key, rows] : blocks) {
        os << "== " << key.first << " selection ==\n";
        os << std::left << std::setw(6) << "p";
        for (const auto& pol : policies) os << std::setw(18) << pol;
        os << "\n";
        for (const auto& [p, row] : rows) {
            std::ostringstream pv;
            pv << std::fixed << std::setprecision(1) << p;
            os << std::left << std::setw(6) << pv.str();
            for (const auto& pol : policies) {
                auto it = row.find(pol);
                if (it == row.end()) {
                    os << std::setw(18) << "-";
                    continue;
                }
                std::ostringstream cell;
                cell << std::fixed << std::setprecision(1) << 100.0 * it->second.first << " ("
                     << std::fixed << std::setprecision(1) << 100.0 * it->second.second << ")";
                os << std::setw(18) << cell.str();
            }
            os << "\n";
        }
    }
    return os.str();
}

// Overhead grid: p against the multiplicative overhead factor.
inline std::string render_overhead_table(const bench::OverheadReport& rep) {
    std::ostringstream os;
    os << "== " << rep.layer << " ["
       << (rep.mode == pack::EvalMode::relin_only ? "relin-only" : "rescale-all")
       << ", costs: " << rep.table.provenance << "] ==\n";
    os << std::left << std::setw(6) << "p" << std::setw(12) << "factor" << "\n";
    for (const auto& pt : rep.points) {
        std::ostringstream pv, fv;
        pv << std::fixed << std::setprecision(1) << pt.p;
        fv << std::fixed << std::setprecision(2) << pt.factor;
        os << std::left << std::setw(6) << pv.str() << std::setw(12) << fv.str() << "\n";
    }
    return os.str();
}

}  // namespace poi::report
