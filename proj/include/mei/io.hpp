#pragma once
// Input parsers and report writers. Every byte-level format lives here.
//
//   stops.csv        user_id,lon,lat,start_ts,dwell_s   (start_ts ISO 8601 UTC)
//   tracts.geojson   FeatureCollection, properties GEOID, POP, PCT_MINORITY, PCT_POV200
//   hazard_<h>.csv   geoid,value
//
// Data rows are rejected and counted; structural problems throw IngestError.

#include "mei/model.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mei {

struct IngestReport {
    static constexpr std::size_t kMaxListedRejects = 10;

    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::size_t rows_rejected = 0;
    std::vector<std::pair<std::size_t, std::string>> first_rejects;  // (line_no, reason)

    void accept();
    void reject(std::size_t line_no, std::string reason);
};

struct StopsIngest {
    std::vector<StopRecord> stops;
    IngestReport report;
};

struct HazardIngest {
    HazardLayer layer;
    IngestReport report;
};

// ---- timestamps and number formatting ----

/// Parses "YYYY-MM-DDTHH:MM:SSZ".
std::optional<Timestamp> parse_iso8601(std::string_view s);
std::string format_iso8601(Timestamp ts);

/// Six decimal places, "-0.000000" normalized to "0.000000".
std::string format_fixed6(double v);
/// Shortest representation that parses back to the same double.
std::string format_shortest(double v);

/// Splits one CSV line; handles double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

// ---- inputs ----

StopsIngest parse_stops(std::istream& in);
StopsIngest read_stops_file(const std::filesystem::path& path);
void write_stops(std::ostream& out, std::span<const StopRecord> stops);

std::vector<CensusTract> parse_tracts(std::istream& in);
std::vector<CensusTract> read_tracts_file(const std::filesystem::path& path);
void write_tracts(std::ostream& out, std::span<const CensusTract> tracts);

/// Values only; the mask is left to hazard classification.
HazardIngest parse_hazard(std::istream& in, HazardType type);
HazardIngest read_hazard_file(const std::filesystem::path& path, HazardType type);
void write_hazard(std::ostream& out, const HazardLayer& layer);

// ---- reports ----

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// LF line endings, no quoting (report cells never contain separators).
std::string render_csv(const CsvTable& table);
CsvTable parse_csv_table(std::istream& in);

/// Path of the JSON metadata written next to a report file.
std::filesystem::path metadata_path(const std::filesystem::path& report);

/// Writes the CSV plus a "<name>.meta.json" sidecar holding the config hash,
/// row count, columns and any extra fields. Returns the CSV byte count.
std::size_t write_report(const CsvTable& table, const std::filesystem::path& dest,
                         std::string_view config_hash,
                         const nlohmann::json& extra = nlohmann::json::object());

CsvTable mei_table_csv(const MeiTable& table);
MeiTable parse_mei_csv(std::istream& in);
MeiTable read_mei_file(const std::filesystem::path& path);

/// FNV-1a 64-bit; used for config and input fingerprints.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace mei
