// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/ledger.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sensim::ledger {

bool operator==(const LedgerRow& a, const LedgerRow& b) {
    const bool rss_eq = (a.has_rss() == b.has_rss()) && (!a.has_rss() || a.rss_dbm == b.rss_dbm);
    return a.node == b.node && a.tower == b.tower && a.sample_time == b.sample_time &&
           a.arrival_time == b.arrival_time && a.latency_s == b.latency_s && rss_eq &&
           a.battery_pct == b.battery_pct && a.payload == b.payload;
}

std::int32_t latency_seconds(UnixMs sample, UnixMs arrival) {
    if (arrival < sample) {
        throw std::invalid_argument("ingest: arrival precedes sample");
    }
    return std::int32_t((arrival - sample) / kMsPerSecond);
}

std::uint32_t IdTable::intern(std::string_view id) {
    const std::string key(id);
    const auto it = index_.find(key);
    if (it != index_.end()) {
        return it->second;
    }
    const auto i = std::uint32_t(ids_.size());
    ids_.push_back(key);
    index_.emplace(key, i);
    return i;
}

std::optional<std::uint32_t> IdTable::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

float quantize_pct(double pct) { return float(std::round(pct * 100.0) / 100.0); }

LedgerRow ingest(std::uint32_t node, std::int32_t tower, UnixMs sample, UnixMs arrival, std::optional<double> rss,
                 double battery_pct, std::uint64_t payload) {
    LedgerRow r;
    r.node = node;
    r.tower = tower;
    r.sample_time = sample;
    r.arrival_time = arrival;
    r.latency_s = latency_seconds(sample, arrival);
    if (rss) {
        r.rss_dbm = float(*rss);
    }
    r.battery_pct = quantize_pct(battery_pct);
    r.payload = payload;
    return r;
}

namespace {

/// Timestamp formatting with a one-entry day cache; rows arrive roughly in time order.
class IsoWriter {
public:
    char* put(char* out, UnixMs t) {
        const std::int64_t day = utc_day_index(t);
        if (day != day_) {
            day_ = day;
            const CivilDate c = to_civil(day * kMsPerDay);
            std::snprintf(prefix_, sizeof prefix_, "%04d-%02u-%02uT", c.year, c.month, c.day);
        }
        std::memcpy(out, prefix_, 11);
        out += 11;
        std::int64_t ms = t - day * kMsPerDay;
        const int h = int(ms / kMsPerHour);
        ms -= h * kMsPerHour;
        const int m = int(ms / kMsPerMinute);
        ms -= m * kMsPerMinute;
        const int s = int(ms / kMsPerSecond);
        ms -= s * kMsPerSecond;
        out = two(out, h);
        *out++ = ':';
        out = two(out, m);
        *out++ = ':';
        out = two(out, s);
        *out++ = '.';
        *out++ = char('0' + ms / 100);
        *out++ = char('0' + ms / 10 % 10);
        *out++ = char('0' + ms % 10);
        *out++ = 'Z';
        return out;
    }

private:
    static char* two(char* o, int v) {
        *o++ = char('0' + v / 10);
        *o++ = char('0' + v % 10);
        return o;
    }
    std::int64_t day_ = std::numeric_limits<std::int64_t>::min();
    char prefix_[32] = {};
};

char* put_pct(char* out, float pct) {
    // pct holds a 2-decimal value; print it from the rounded integer hundredths.
    long long h = std::llround(double(pct) * 100.0);
    if (h < 0) {
        *out++ = '-';
        h = -h;
    }
    out = std::to_chars(out, out + 24, h / 100).ptr;
    *out++ = '.';
    *out++ = char('0' + h % 100 / 10);
    *out++ = char('0' + h % 10);
    return out;
}

char* put_rss(char* out, float rss) {
    if (std::isnan(rss)) {
        return out;
    }
    const double r = double(rss);
    if (r == std::round(r)) {
        return std::to_chars(out, out + 24, static_cast<long long>(r)).ptr;
    }
    return std::to_chars(out, out + 32, rss).ptr; // shortest form round-trips the float
}

char* put_row(char* o, const Ledger& l, const LedgerRow& r, IsoWriter& iso) {
    const std::string& node = l.nodes[r.node];
    std::memcpy(o, node.data(), node.size());
    o += node.size();
    *o++ = ',';
    const std::string_view tower = l.tower_id(r);
    std::memcpy(o, tower.data(), tower.size());
    o += tower.size();
    *o++ = ',';
    o = iso.put(o, r.sample_time);
    *o++ = ',';
    o = iso.put(o, r.arrival_time);
    *o++ = ',';
    o = std::to_chars(o, o + 16, r.latency_s).ptr;
    *o++ = ',';
    o = put_rss(o, r.rss_dbm);
    *o++ = ',';
    o = put_pct(o, r.battery_pct);
    *o++ = ',';
    o = std::to_chars(o, o + 24, r.payload).ptr;
    return o;
}

} // namespace

std::string format_row(const Ledger& ledger, const LedgerRow& row) {
    IsoWriter iso;
    std::string buf(512, '\0');
    char* end = put_row(buf.data(), ledger, row, iso);
    buf.resize(std::size_t(end - buf.data()));
    return buf;
}

void write_ledger(const Ledger& ledger, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) {
        throw std::runtime_error("cannot write ledger '" + path + "'");
    }
    std::vector<char> buf(1 << 20);
    std::size_t used = 0;
    auto drain = [&] {
        if (used && std::fwrite(buf.data(), 1, used, f) != used) {
            std::fclose(f);
            throw std::runtime_error("write failed for '" + path + "'");
        }
        used = 0;
    };
    std::memcpy(buf.data(), kHeader.data(), kHeader.size());
    used = kHeader.size();
    buf[used++] = '\n';
    IsoWriter iso;
    for (const auto& r : ledger.rows) {
        if (buf.size() - used < 1024) {
            drain();
        }
        char* end = put_row(buf.data() + used, ledger, r, iso);
        *end++ = '\n';
        used = std::size_t(end - buf.data());
    }
    drain();
    if (std::fclose(f) != 0) {
        throw std::runtime_error("close failed for '" + path + "'");
    }
}

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

template <class T>
bool parse_num(std::string_view s, T& v) {
    if (s.empty()) {
        return false;
    }
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool digits(std::string_view s, std::size_t pos, std::size_t n, int& v) {
    v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') {
            return false;
        }
        v = v * 10 + (s[i] - '0');
    }
    return true;
}

/// Fast path for the exact "YYYY-MM-DDTHH:MM:SS.mmmZ" layout the writer emits.
class IsoReader {
public:
    std::optional<UnixMs> get(std::string_view s) {
        if (s.size() == 24 && s[4] == '-' && s[7] == '-' && s[10] == 'T' && s[13] == ':' && s[16] == ':' &&
            s[19] == '.' && s[23] == 'Z') {
            if (s.substr(0, 10) != day_text_) {
                int y, mo, d;
                if (!digits(s, 0, 4, y) || !digits(s, 5, 2, mo) || !digits(s, 8, 2, d)) {
                    return std::nullopt;
                }
                const auto day = parse_iso8601(std::string(s.substr(0, 10)));
                if (!day) {
                    return std::nullopt;
                }
                day_text_.assign(s.substr(0, 10));
                day_ms_ = *day;
            }
            int h, m, sec, ms;
            if (!digits(s, 11, 2, h) || !digits(s, 14, 2, m) || !digits(s, 17, 2, sec) || !digits(s, 20, 3, ms) ||
                h > 23 || m > 59 || sec > 59) {
                return std::nullopt;
            }
            return day_ms_ + h * kMsPerHour + m * kMsPerMinute + sec * kMsPerSecond + ms;
        }
        return parse_iso8601(std::string(s));
    }

private:
    std::string day_text_;
    UnixMs day_ms_ = 0;
};

} // namespace

Ledger read_ledger(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) {
        throw std::runtime_error("cannot open ledger '" + path + "'");
    }
    std::string data;
    {
        std::vector<char> chunk(1 << 20);
        std::size_t n;
        while ((n = std::fread(chunk.data(), 1, chunk.size(), f)) > 0) {
            data.append(chunk.data(), n);
        }
        std::fclose(f);
    }
    Ledger out;
    std::string_view all(data);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= all.size()) {
            return false;
        }
        std::size_t e = all.find('\n', pos);
        if (e == std::string_view::npos) {
            e = all.size();
        }
        line = all.substr(pos, e - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        pos = e + 1;
        ++line_no;
        return true;
    };
    std::string_view line;
    if (!next_line(line) || line != kHeader) {
        fail(path, 1, "missing or unexpected ledger header");
    }
    out.rows.reserve(all.size() / 96 + 1);
    IsoReader iso;
    std::string_view f8[8];
    while (next_line(line)) {
        if (line.empty()) {
            continue;
        }
        std::size_t k = 0;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size() && k < 8; ++i) {
            if (i == line.size() || line[i] == ',') {
                f8[k++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (k != 8 || start <= line.size()) {
            fail(path, line_no, "expected 8 comma-separated fields");
        }
        LedgerRow r;
        if (f8[0].empty()) {
            fail(path, line_no, "empty node_id");
        }
        r.node = out.nodes.intern(f8[0]);
        r.tower = f8[1] == kUnknownTowerId ? kUnknownTower : std::int32_t(out.towers.intern(f8[1]));
        const auto s = iso.get(f8[2]);
        const auto a = iso.get(f8[3]);
        if (!s || !a) {
            fail(path, line_no, "bad timestamp");
        }
        r.sample_time = *s;
        r.arrival_time = *a;
        if (!parse_num(f8[4], r.latency_s)) {
            fail(path, line_no, "bad latency_s");
        }
        if (!f8[5].empty() && !parse_num(f8[5], r.rss_dbm)) {
            fail(path, line_no, "bad rss_dbm");
        }
        double pct;
        if (!parse_num(f8[6], pct)) {
            fail(path, line_no, "bad battery_pct");
        }
        r.battery_pct = quantize_pct(pct);
        if (!parse_num(f8[7], r.payload)) {
            fail(path, line_no, "bad payload");
        }
        out.rows.push_back(r);
    }
    return out;
}

} // namespace sensim::ledger
