#include "mei/io.hpp"

#include "mei/error.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace mei {

using nlohmann::json;

void IngestReport::accept()
{
    ++rows_read;
    ++rows_accepted;
}

void IngestReport::reject(std::size_t line_no, std::string reason)
{
    ++rows_read;
    ++rows_rejected;
    if (first_rejects.size() < kMaxListedRejects) first_rejects.emplace_back(line_no, std::move(reason));
}

// ---------------------------------------------------------------------------
// scalars

namespace {

template <class T>
std::optional<T> parse_number(std::string_view s)
{
    T value{};
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
    return value;
}

std::optional<int> parse_fixed_digits(std::string_view s)
{
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
    }
    return v;
}

std::string_view strip_cr(std::string_view line)
{
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

std::string_view strip_bom(std::string_view line)
{
    if (line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    return line;
}

void expect_header(std::istream& in, std::string_view expected, std::string_view what)
{
    std::string line;
    if (!std::getline(in, line)) throw IngestError(std::string(what) + ": empty input, missing header");
    auto got = strip_bom(strip_cr(line));
    if (got != expected) {
        throw IngestError(std::string(what) + ": expected header '" + std::string(expected) +
                          "', got '" + std::string(got) + "'");
    }
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open " + path.string());
    return in;
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view s)
{
    // YYYY-MM-DDTHH:MM:SSZ
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
        s[16] != ':' || s[19] != 'Z') {
        return std::nullopt;
    }
    auto y = parse_fixed_digits(s.substr(0, 4));
    auto mo = parse_fixed_digits(s.substr(5, 2));
    auto d = parse_fixed_digits(s.substr(8, 2));
    auto h = parse_fixed_digits(s.substr(11, 2));
    auto mi = parse_fixed_digits(s.substr(14, 2));
    auto sec = parse_fixed_digits(s.substr(17, 2));
    if (!y || !mo || !d || !h || !mi || !sec) return std::nullopt;
    if (*h > 23 || *mi > 59 || *sec > 59) return std::nullopt;

    using namespace std::chrono;
    const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                             day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days_since_epoch) * 86400 + *h * 3600 + *mi * 60 + *sec;
}

std::string format_iso8601(Timestamp ts)
{
    using namespace std::chrono;
    Timestamp days = ts / 86400;
    Timestamp rem = ts % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

std::string format_fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

std::string format_shortest(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

// ---------------------------------------------------------------------------
// stops

namespace {

constexpr std::string_view kStopsHeader = "user_id,lon,lat,start_ts,dwell_s";

}  // namespace

StopsIngest parse_stops(std::istream& in)
{
    if (!in) throw IngestError("stops: unreadable stream");
    expect_header(in, kStopsHeader, "stops");

    StopsIngest result;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = strip_cr(line);
        if (text.empty()) {
            result.report.reject(line_no, "empty row");
            continue;
        }
        const auto f = split_csv_line(text);
        if (f.size() != 5) {
            result.report.reject(line_no, "expected 5 fields, got " + std::to_string(f.size()));
            continue;
        }
        const auto lon = parse_number<double>(f[1]);
        const auto lat = parse_number<double>(f[2]);
        const auto ts = parse_iso8601(f[3]);
        const auto dwell = parse_number<std::int64_t>(f[4]);
        if (!lon || !lat) {
            result.report.reject(line_no, "unparseable coordinate");
            continue;
        }
        if (!ts) {
            result.report.reject(line_no, "start_ts is not ISO 8601 UTC");
            continue;
        }
        if (!dwell) {
            result.report.reject(line_no, "dwell_s is not an integer");
            continue;
        }
        StopRecord rec{f[0], *lon, *lat, *ts, *dwell};
        const auto violations = validate(rec);
        if (!violations.empty()) {
            const auto& v = violations.front();
            result.report.reject(line_no, v.field + ": " + v.rule);
            continue;
        }
        result.stops.push_back(std::move(rec));
        result.report.accept();
    }
    if (in.bad()) throw IngestError("stops: read error at line " + std::to_string(line_no));
    return result;
}

StopsIngest read_stops_file(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_stops(in);
}

void write_stops(std::ostream& out, std::span<const StopRecord> stops)
{
    std::string buf;
    buf.reserve(64 * 1024);
    buf.append(kStopsHeader).push_back('\n');
    for (const auto& s : stops) {
        buf.append(s.user_id).push_back(',');
        buf.append(format_shortest(s.lon)).push_back(',');
        buf.append(format_shortest(s.lat)).push_back(',');
        buf.append(format_iso8601(s.start_ts)).push_back(',');
        buf.append(std::to_string(s.dwell_s)).push_back('\n');
        if (buf.size() > 60 * 1024) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

// ---------------------------------------------------------------------------
// tracts

namespace {

Ring parse_ring(const json& coords, const std::string& where)
{
    if (!coords.is_array()) throw IngestError(where + ": ring is not an array");
    Ring ring;
    ring.reserve(coords.size());
    for (const auto& pt : coords) {
        if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number()) {
            throw IngestError(where + ": vertex is not a [lon, lat] pair");
        }
        ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    if (ring.size() < 4) throw IngestError(where + ": ring has fewer than 4 vertices");
    if (ring.front() != ring.back()) throw IngestError(where + ": unclosed ring");
    return ring;
}

Polygon parse_polygon(const json& coords, const std::string& where)
{
    if (!coords.is_array() || coords.empty()) throw IngestError(where + ": polygon has no rings");
    Polygon poly;
    for (std::size_t r = 0; r < coords.size(); ++r) {
        poly.rings.push_back(parse_ring(coords[r], where + " ring " + std::to_string(r)));
    }
    return poly;
}

double fraction_property(const json& props, const char* key, const std::string& where)
{
    auto it = props.find(key);
    if (it == props.end() || !it->is_number()) {
        throw IngestError(where + ": property " + key + " missing or not a number");
    }
    return it->get<double>();
}

json ring_to_json(const Ring& ring)
{
    json arr = json::array();
    for (const auto& p : ring) arr.push_back(json::array({p.lon, p.lat}));
    return arr;
}

}  // namespace

std::vector<CensusTract> parse_tracts(std::istream& in)
{
    if (!in) throw IngestError("tracts: unreadable stream");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IngestError(std::string("tracts: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
        !doc.contains("features") || !doc["features"].is_array()) {
        throw IngestError("tracts: expected a GeoJSON FeatureCollection");
    }

    std::vector<CensusTract> tracts;
    std::set<std::string> seen;
    const auto& features = doc["features"];
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& feat = features[i];
        const std::string where = "tracts: feature " + std::to_string(i);
        if (!feat.is_object()) throw IngestError(where + ": not an object");
        const auto props_it = feat.find("properties");
        if (props_it == feat.end() || !props_it->is_object()) {
            throw IngestError(where + ": missing properties");
        }
        const auto& props = *props_it;
        const auto geoid_it = props.find("GEOID");
        if (geoid_it == props.end() || !geoid_it->is_string()) {
            throw IngestError(where + ": missing GEOID (must be a string)");
        }

        CensusTract t;
        t.geoid = geoid_it->get<std::string>();
        t.county_fips = t.geoid.substr(0, 5);
        const auto pop_it = props.find("POP");
        if (pop_it == props.end() || !pop_it->is_number_integer()) {
            throw IngestError(where + ": property POP missing or not an integer");
        }
        t.population = pop_it->get<std::int64_t>();
        t.pct_minority = fraction_property(props, "PCT_MINORITY", where);
        t.pct_below_poverty200 = fraction_property(props, "PCT_POV200", where);

        const auto geom_it = feat.find("geometry");
        if (geom_it == feat.end() || !geom_it->is_object()) throw IngestError(where + ": missing geometry");
        const auto& geom = *geom_it;
        const std::string gtype = geom.value("type", "");
        if (!geom.contains("coordinates")) throw IngestError(where + ": geometry without coordinates");
        const auto& coords = geom["coordinates"];
        if (gtype == "Polygon") {
            t.geometry.parts.push_back(parse_polygon(coords, where));
        } else if (gtype == "MultiPolygon") {
            if (!coords.is_array() || coords.empty()) throw IngestError(where + ": empty MultiPolygon");
            for (std::size_t p = 0; p < coords.size(); ++p) {
                t.geometry.parts.push_back(parse_polygon(coords[p], where + " part " + std::to_string(p)));
            }
        } else {
            throw IngestError(where + ": non-polygonal geometry '" + gtype + "'");
        }

        const auto violations = validate(t);
        if (!violations.empty()) {
            throw IngestError(where + " (" + t.geoid + "): " + violations.front().field + " " +
                              violations.front().rule);
        }
        if (!seen.insert(t.geoid).second) throw IngestError(where + ": duplicate GEOID " + t.geoid);
        tracts.push_back(std::move(t));
    }
    return tracts;
}

std::vector<CensusTract> read_tracts_file(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_tracts(in);
}

void write_tracts(std::ostream& out, std::span<const CensusTract> tracts)
{
    // One feature per line keeps large files diffable.
    out << "{\"type\":\"FeatureCollection\",\"features\":[\n";
    for (std::size_t i = 0; i < tracts.size(); ++i) {
        const auto& t = tracts[i];
        json feat;
        feat["type"] = "Feature";
        feat["properties"] = {{"GEOID", t.geoid},
                              {"POP", t.population},
                              {"PCT_MINORITY", t.pct_minority},
                              {"PCT_POV200", t.pct_below_poverty200}};
        json coords = json::array();
        for (const auto& poly : t.geometry.parts) {
            json rings = json::array();
            for (const auto& ring : poly.rings) rings.push_back(ring_to_json(ring));
            coords.push_back(std::move(rings));
        }
        if (t.geometry.parts.size() == 1) {
            feat["geometry"] = {{"type", "Polygon"}, {"coordinates", coords[0]}};
        } else {
            feat["geometry"] = {{"type", "MultiPolygon"}, {"coordinates", coords}};
        }
        out << feat.dump() << (i + 1 < tracts.size() ? ",\n" : "\n");
    }
    out << "]}\n";
}

// ---------------------------------------------------------------------------
// hazard layers

HazardIngest parse_hazard(std::istream& in, HazardType type)
{
    const std::string what = "hazard_" + std::string(short_name(type));
    if (!in) throw IngestError(what + ": unreadable stream");
    expect_header(in, "geoid,value", what);

    HazardIngest result;
    result.layer.type = type;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = strip_cr(line);
        if (text.empty()) {
            result.report.reject(line_no, "empty row");
            continue;
        }
        const auto f = split_csv_line(text);
        if (f.size() != 2 || f[0].empty()) {
            result.report.reject(line_no, "expected 2 fields with a non-empty geoid");
            continue;
        }
        const auto v = parse_number<double>(f[1]);
        if (!v || !std::isfinite(*v)) {
            result.report.reject(line_no, "value is not a number");
            continue;
        }
        if (type == HazardType::heat) {
            if (*v < 0.0 || std::floor(*v) != *v) {
                result.report.reject(line_no, "heat-day count must be a non-negative integer");
                continue;
            }
        } else if (*v < 0.0 || *v > 1.0) {
            result.report.reject(line_no, "percentile outside [0, 1]");
            continue;
        }
        if (!result.layer.values.emplace(f[0], *v).second) {
            throw IngestError(what + ": duplicate geoid " + f[0] + " at line " + std::to_string(line_no));
        }
        result.report.accept();
    }
    return result;
}

HazardIngest read_hazard_file(const std::filesystem::path& path, HazardType type)
{
    auto in = open_input(path);
    return parse_hazard(in, type);
}

void write_hazard(std::ostream& out, const HazardLayer& layer)
{
    out << "geoid,value\n";
    for (const auto& [geoid, v] : layer.values) out << geoid << ',' << format_shortest(v) << '\n';
}

// ---------------------------------------------------------------------------
// reports

std::string render_csv(const CsvTable& table)
{
    std::string s;
    auto append_row = [&s](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s.push_back(',');
            s.append(row[i]);
        }
        s.push_back('\n');
    };
    append_row(table.header);
    for (const auto& row : table.rows) append_row(row);
    return s;
}

CsvTable parse_csv_table(std::istream& in)
{
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IngestError("csv: missing header");
    t.header = split_csv_line(strip_bom(strip_cr(line)));
    while (std::getline(in, line)) {
        const auto text = strip_cr(line);
        if (text.empty()) continue;
        t.rows.push_back(split_csv_line(text));
    }
    return t;
}

std::filesystem::path metadata_path(const std::filesystem::path& report)
{
    auto p = report;
    p += ".meta.json";
    return p;
}

std::size_t write_report(const CsvTable& table, const std::filesystem::path& dest,
                         std::string_view config_hash, const json& extra)
{
    const std::string body = render_csv(table);
    {
        std::ofstream out(dest, std::ios::binary | std::ios::trunc);
        if (!out) throw OutputError("cannot write " + dest.string());
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        if (!out) throw OutputError("write failed for " + dest.string());
    }

    json meta = extra.is_object() ? extra : json::object();
    meta["file"] = dest.filename().string();
    meta["config_hash"] = std::string(config_hash);
    meta["rows"] = table.rows.size();
    meta["columns"] = table.header;
    const std::string meta_text = meta.dump(2) + "\n";
    std::ofstream mout(metadata_path(dest), std::ios::binary | std::ios::trunc);
    if (!mout) throw OutputError("cannot write " + metadata_path(dest).string());
    mout.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
    if (!mout) throw OutputError("write failed for " + metadata_path(dest).string());
    return body.size();
}

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_fixed6(*v) : std::string(); }

std::vector<std::string> mei_header()
{
    std::vector<std::string> h{"geoid"};
    for (const char* prefix : {"mei_", "nonhome_share_", "nonhome_cond_", "class_"}) {
        for (HazardType hz : kHazards) h.push_back(prefix + std::string(short_name(hz)));
    }
    return h;
}

std::optional<double> optional_double(const std::string& s, std::size_t row, const char* col)
{
    if (s.empty()) return std::nullopt;
    auto v = parse_number<double>(s);
    if (!v) throw IngestError("mei: row " + std::to_string(row) + " column " + col + " is not a number");
    return v;
}

}  // namespace

CsvTable mei_table_csv(const MeiTable& table)
{
    CsvTable t;
    t.header = mei_header();
    for (const auto& r : table.rows) {
        std::vector<std::string> row{r.geoid};
        for (std::size_t h = 0; h < kHazardCount; ++h) row.push_back(optional_cell(r.mei[h]));
        for (std::size_t h = 0; h < kHazardCount; ++h) row.push_back(optional_cell(r.nonhome_share[h]));
        for (std::size_t h = 0; h < kHazardCount; ++h) row.push_back(optional_cell(r.nonhome_conditional[h]));
        for (std::size_t h = 0; h < kHazardCount; ++h) row.emplace_back(to_string(r.region[h]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

MeiTable parse_mei_csv(std::istream& in)
{
    const CsvTable csv = parse_csv_table(in);
    if (csv.header != mei_header()) throw IngestError("mei: unexpected header");
    MeiTable table;
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& f = csv.rows[i];
        if (f.size() != 13) throw IngestError("mei: row " + std::to_string(i + 2) + " has wrong field count");
        MeiRow r;
        r.geoid = f[0];
        for (std::size_t h = 0; h < kHazardCount; ++h) {
            r.mei[h] = optional_double(f[1 + h], i + 2, "mei");
            r.nonhome_share[h] = optional_double(f[4 + h], i + 2, "nonhome_share");
            r.nonhome_conditional[h] = optional_double(f[7 + h], i + 2, "nonhome_cond");
            auto cls = parse_region_class(f[10 + h]);
            if (!cls) throw IngestError("mei: row " + std::to_string(i + 2) + " has unknown class");
            r.region[h] = *cls;
        }
        table.rows.push_back(std::move(r));
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const MeiRow& a, const MeiRow& b) { return a.geoid < b.geoid; });
    return table;
}

MeiTable read_mei_file(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_mei_csv(in);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed)
{
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace mei
