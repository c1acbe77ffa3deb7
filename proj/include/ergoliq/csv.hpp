#pragma once

// CSV artifacts: fixed 9-significant-digit floats, fixed column order, '\n'
// line endings; readers for the calibration inputs with line-numbered errors.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ergoliq/calibration.hpp"
#include "ergoliq/errors.hpp"

namespace ergoliq::csv {

inline std::string format_number(double v) {
    if (v == 0) v = 0; // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Row-at-a-time writer into an in-memory buffer.
class Writer {
public:
    explicit Writer(const std::vector<std::string>& header) { row(header); }

    Writer& row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
        return *this;
    }

    std::string str() const { return out_.str(); }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + path);
        f << out_.str();
        if (!f) throw DataError("write failed for " + path);
    }

private:
    std::ostringstream out_;
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.emplace_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

struct Record {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Parses CSV text whose header must equal `header`. Blank lines are skipped.
inline std::vector<Record> parse(std::string_view text, const std::vector<std::string>& header) {
    std::vector<Record> records;
    std::size_t line_no = 0;
    bool seen_header = false;
    std::size_t pos = 0;
    // Strip a UTF-8 byte order mark.
    if (text.starts_with("\xEF\xBB\xBF")) pos = 3;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (trim(raw).empty()) continue;
        auto fields = split(raw);
        if (!seen_header) {
            if (fields != header) {
                std::string expected;
                for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
                throw DataError("header must be '" + expected + "'", line_no);
            }
            seen_header = true;
            continue;
        }
        if (fields.size() != header.size())
            throw DataError("expected " + std::to_string(header.size()) + " fields, found " +
                                std::to_string(fields.size()),
                            line_no);
        records.push_back({line_no, std::move(fields)});
    }
    if (!seen_header) throw DataError("missing header row", 1);
    return records;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline double to_number(const std::string& field, std::size_t line, std::string_view column) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(field, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != field.size() || !std::isfinite(v))
        throw DataError("column '" + std::string(column) + "': not a finite number: '" + field + "'", line);
    return v;
}

// ---------------------------------------------------------------------------
// Calibration inputs
// ---------------------------------------------------------------------------

inline std::vector<LiquidationRecord> parse_liquidations(std::string_view text) {
    std::vector<LiquidationRecord> out;
    for (const auto& r : parse(text, {"time", "size"})) {
        LiquidationRecord rec{to_number(r.fields[0], r.line, "time"), to_number(r.fields[1], r.line, "size")};
        if (!(rec.size > 0)) throw DataError("column 'size': must be > 0", r.line);
        if (!out.empty() && rec.time < out.back().time)
            throw DataError("column 'time': must be nondecreasing", r.line);
        out.push_back(rec);
    }
    return out;
}

/// Rows are grouped by (snapshot_time, side) in order of first appearance;
/// levels are ordered best first.
inline std::vector<BookSnapshot> parse_book(std::string_view text) {
    std::vector<BookSnapshot> out;
    std::vector<std::size_t> first_line;
    std::map<std::pair<double, int>, std::size_t> index;
    for (const auto& r : parse(text, {"snapshot_time", "side", "price", "volume", "mid"})) {
        const double time = to_number(r.fields[0], r.line, "snapshot_time");
        std::string side = r.fields[1];
        std::transform(side.begin(), side.end(), side.begin(), [](unsigned char c) { return std::tolower(c); });
        BookSide s;
        if (side == "bid") s = BookSide::Bid;
        else if (side == "ask") s = BookSide::Ask;
        else throw DataError("column 'side': expected bid or ask, got '" + r.fields[1] + "'", r.line);
        const double price = to_number(r.fields[2], r.line, "price");
        const double volume = to_number(r.fields[3], r.line, "volume");
        const double mid = to_number(r.fields[4], r.line, "mid");
        if (!(volume > 0)) throw DataError("column 'volume': must be > 0", r.line);

        const auto key = std::make_pair(time, static_cast<int>(s));
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, out.size()).first;
            out.push_back({time, s, {}, mid});
            first_line.push_back(r.line);
        } else if (out[it->second].mid != mid) {
            throw DataError("column 'mid': differs within one snapshot", r.line);
        }
        out[it->second].levels.push_back({price, volume});
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& snap = out[i];
        const bool ask = snap.side == BookSide::Ask;
        std::stable_sort(snap.levels.begin(), snap.levels.end(), [ask](const BookLevel& a, const BookLevel& b) {
            return ask ? a.price < b.price : a.price > b.price;
        });
        try {
            validate(snap);
        } catch (const DataError& e) {
            throw DataError(std::string("snapshot starting here: ") + e.what(), first_line[i]);
        }
    }
    return out;
}

inline std::vector<FlowInterval> parse_flow(std::string_view text) {
    std::vector<FlowInterval> out;
    for (const auto& r : parse(text, {"net_flow", "delta_mid"}))
        out.push_back({to_number(r.fields[0], r.line, "net_flow"), to_number(r.fields[1], r.line, "delta_mid")});
    return out;
}

} // namespace ergoliq::csv
