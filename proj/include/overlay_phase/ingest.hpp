#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "overlay_phase/core.hpp"

namespace overlay_phase {

enum class TraceFormat { Jsonl, Csv };

/// Picks the format from the file name, ignoring a trailing ".gz".
TraceFormat format_for(const std::filesystem::path& path);
TraceFormat parse_format(std::string_view name);

/// A rejected input line. Lines are 1-based.
struct Diagnostic {
    std::size_t line = 0;
    std::string reason;
};

/// Validated crawl records grouped per peer. Immutable once built.
class TraceStore {
public:
    TraceStore() = default;

    const std::map<std::string, PeerTrace>& traces() const { return traces_; }
    std::size_t peer_count() const { return traces_.size(); }
    std::size_t record_count() const { return record_count_; }
    bool empty() const { return traces_.empty(); }
    /// Earliest and latest timestamp, if any record exists.
    std::optional<std::pair<std::int64_t, std::int64_t>> time_range() const { return range_; }
    /// Software tag -> peers with at least one record carrying that tag.
    const std::map<std::string, std::set<std::string>>& software_index() const {
        return software_;
    }
    /// All records, ordered by peer then time.
    std::vector<CrawlRecord> records() const;

    friend class TraceStoreBuilder;

private:
    std::map<std::string, PeerTrace> traces_;
    std::size_t record_count_ = 0;
    std::optional<std::pair<std::int64_t, std::int64_t>> range_;
    std::map<std::string, std::set<std::string>> software_;
};

class TraceStoreBuilder {
public:
    /// Returns a rejection reason for duplicate (peer, t), otherwise stores the record.
    std::optional<std::string> add(CrawlRecord record);
    TraceStore build() &&;

private:
    std::map<std::string, std::map<std::int64_t, CrawlRecord>> pending_;
};

TraceStore make_store(std::vector<CrawlRecord> records);

struct ParseResult {
    TraceStore store;
    std::vector<Diagnostic> diagnostics;
};

/// Parses crawl records from text. Malformed lines become diagnostics.
ParseResult parse_crawl_text(std::string_view text, TraceFormat format);
/// Reads a file (gzip-compressed when it ends in ".gz"). Throws Input error
/// when the file cannot be read.
ParseResult parse_crawl_file(const std::filesystem::path& path, TraceFormat format);

std::string to_jsonl(const CrawlRecord& record);
std::string to_csv(const CrawlRecord& record);
inline constexpr std::string_view kCsvHeader = "peer,t,mode,sw,leaves,ultras";

void write_records(std::ostream& out, const std::vector<CrawlRecord>& records, TraceFormat format);
/// Writes a file, gzip-compressing when the name ends in ".gz".
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);
void write_store(const std::filesystem::path& path, const TraceStore& store, TraceFormat format);

/// Peer-trace filter. Software and mode act on records; min_records then drops
/// peers left with fewer records.
struct TraceFilter {
    std::optional<std::string> software;
    std::optional<PeerMode> mode;
    std::size_t min_records = 0;
};

TraceStore filter(const TraceStore& store, const TraceFilter& predicate);

}  // namespace overlay_phase
