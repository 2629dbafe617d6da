#include "overlay_phase/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include <json.hpp>
#include <zlib.h>

namespace overlay_phase {

using nlohmann::json;

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> id_list(const json& j, const char* field) {
    if (!j.is_array()) throw input_error(std::string("field '") + field + "' must be an array");
    std::vector<std::string> ids;
    ids.reserve(j.size());
    for (const auto& id : j) {
        if (id.is_string()) {
            ids.push_back(id.get<std::string>());
        } else if (id.is_number_integer()) {
            ids.push_back(std::to_string(id.get<std::int64_t>()));
        } else {
            throw input_error(std::string("field '") + field + "' holds a non-id value");
        }
    }
    return ids;
}

const json& field(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end()) throw input_error(std::string("missing field '") + name + "'");
    return *it;
}

CrawlRecord parse_json_line(std::string_view line) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error&) {
        throw input_error("malformed JSON");
    }
    if (!obj.is_object()) throw input_error("line is not a JSON object");
    const json& peer = field(obj, "peer");
    std::string peer_id = peer.is_string() ? peer.get<std::string>()
                          : peer.is_number_integer()
                              ? std::to_string(peer.get<std::int64_t>())
                              : throw input_error("field 'peer' must be a string");
    const json& t = field(obj, "t");
    if (!t.is_number_integer()) throw input_error("field 't' must be integer seconds");
    const json& mode = field(obj, "mode");
    if (!mode.is_string()) throw input_error("field 'mode' must be a string");
    const json& sw = field(obj, "sw");
    if (!sw.is_string()) throw input_error("field 'sw' must be a string");
    return CrawlRecord(std::move(peer_id), t.get<std::int64_t>(),
                       parse_mode(mode.get<std::string>()), sw.get<std::string>(),
                       id_list(field(obj, "leaves"), "leaves"),
                       id_list(field(obj, "ultras"), "ultras"));
}

std::vector<std::string> csv_ids(std::string_view cell) {
    std::vector<std::string> ids;
    cell = trim(cell);
    if (cell.empty()) return ids;
    for (auto& id : split(cell, ';')) ids.push_back(std::string(trim(id)));
    return ids;
}

CrawlRecord parse_csv_line(std::string_view line) {
    auto cells = split(line, ',');
    if (cells.size() != 6) {
        throw input_error("expected 6 CSV fields, found " + std::to_string(cells.size()));
    }
    const auto t_text = trim(cells[1]);
    std::int64_t t = 0;
    auto [ptr, ec] = std::from_chars(t_text.data(), t_text.data() + t_text.size(), t);
    if (ec != std::errc() || ptr != t_text.data() + t_text.size()) {
        throw input_error("field 't' must be integer seconds");
    }
    return CrawlRecord(std::string(trim(cells[0])), t, parse_mode(trim(cells[2])),
                       std::string(trim(cells[3])), csv_ids(cells[4]), csv_ids(cells[5]));
}

std::string join(const std::vector<std::string>& ids, char sep) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += sep;
        out += ids[i];
    }
    return out;
}

}  // namespace

TraceFormat format_for(const std::filesystem::path& path) {
    std::string name = path.filename().string();
    if (ends_with(name, ".gz")) name.resize(name.size() - 3);
    return ends_with(name, ".csv") ? TraceFormat::Csv : TraceFormat::Jsonl;
}

TraceFormat parse_format(std::string_view name) {
    if (name == "jsonl") return TraceFormat::Jsonl;
    if (name == "csv") return TraceFormat::Csv;
    throw input_error("unknown format '" + std::string(name) + "' (jsonl|csv)");
}

std::vector<CrawlRecord> TraceStore::records() const {
    std::vector<CrawlRecord> out;
    out.reserve(record_count_);
    for (const auto& [peer, trace] : traces_) {
        out.insert(out.end(), trace.records().begin(), trace.records().end());
    }
    return out;
}

std::optional<std::string> TraceStoreBuilder::add(CrawlRecord record) {
    auto& per_peer = pending_[record.peer_id()];
    const auto t = record.t();
    if (!per_peer.try_emplace(t, std::move(record)).second) {
        return "duplicate record for peer at t=" + std::to_string(t);
    }
    return std::nullopt;
}

TraceStore TraceStoreBuilder::build() && {
    TraceStore store;
    for (auto& [peer, by_time] : pending_) {
        if (by_time.empty()) continue;
        std::vector<CrawlRecord> records;
        records.reserve(by_time.size());
        for (auto& [t, r] : by_time) {
            store.software_[r.software()].insert(peer);
            records.push_back(std::move(r));
        }
        const auto lo = records.front().t();
        const auto hi = records.back().t();
        if (!store.range_) {
            store.range_ = std::pair{lo, hi};
        } else {
            store.range_->first = std::min(store.range_->first, lo);
            store.range_->second = std::max(store.range_->second, hi);
        }
        store.record_count_ += records.size();
        store.traces_.emplace(peer, PeerTrace(peer, std::move(records)));
    }
    pending_.clear();
    return store;
}

TraceStore make_store(std::vector<CrawlRecord> records) {
    TraceStoreBuilder builder;
    for (auto& r : records) {
        if (auto err = builder.add(std::move(r))) throw input_error(*err);
    }
    return std::move(builder).build();
}

ParseResult parse_crawl_text(std::string_view text, TraceFormat format) {
    TraceStoreBuilder builder;
    std::vector<Diagnostic> diagnostics;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (format == TraceFormat::Csv && line_no == 1 && line.rfind("peer,", 0) == 0) continue;
        try {
            CrawlRecord record = format == TraceFormat::Jsonl ? parse_json_line(line)
                                                              : parse_csv_line(line);
            if (auto err = builder.add(std::move(record))) {
                diagnostics.push_back({line_no, *err});
            }
        } catch (const Error& e) {
            diagnostics.push_back({line_no, e.what()});
        }
        if (end == text.size()) break;
    }
    return {std::move(builder).build(), std::move(diagnostics)};
}

std::string read_text_file(const std::filesystem::path& path) {
    // gzread passes uncompressed files through unchanged.
    gzFile file = gzopen(path.string().c_str(), "rb");
    if (!file) throw input_error("cannot read " + path.string());
    std::string text;
    char buffer[1 << 16];
    int n = 0;
    while ((n = gzread(file, buffer, sizeof buffer)) > 0) text.append(buffer, n);
    const bool failed = n < 0;
    gzclose(file);
    if (failed) throw input_error("cannot decode " + path.string());
    return text;
}

ParseResult parse_crawl_file(const std::filesystem::path& path, TraceFormat format) {
    if (!std::filesystem::is_regular_file(path)) throw input_error("cannot read " + path.string());
    return parse_crawl_text(read_text_file(path), format);
}

std::string to_jsonl(const CrawlRecord& record) {
    json obj;
    obj["peer"] = record.peer_id();
    obj["t"] = record.t();
    obj["mode"] = to_string(record.mode());
    obj["sw"] = record.software();
    obj["leaves"] = record.leaf_neighbors();
    obj["ultras"] = record.ultra_neighbors();
    return obj.dump();
}

std::string to_csv(const CrawlRecord& record) {
    std::ostringstream out;
    out << record.peer_id() << ',' << record.t() << ',' << to_string(record.mode()) << ','
        << record.software() << ',' << join(record.leaf_neighbors(), ';') << ','
        << join(record.ultra_neighbors(), ';');
    return out.str();
}

void write_records(std::ostream& out, const std::vector<CrawlRecord>& records,
                   TraceFormat format) {
    if (format == TraceFormat::Csv) out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << (format == TraceFormat::Jsonl ? to_jsonl(r) : to_csv(r)) << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (ends_with(path.string(), ".gz")) {
        gzFile file = gzopen(path.string().c_str(), "wb");
        if (!file) throw input_error("cannot write " + path.string());
        const int written = text.empty() ? 0 : gzwrite(file, text.data(), static_cast<unsigned>(text.size()));
        gzclose(file);
        if (!text.empty() && written <= 0) throw input_error("cannot write " + path.string());
        return;
    }
    std::FILE* file = std::fopen(path.string().c_str(), "wb");
    if (!file) throw input_error("cannot write " + path.string());
    const auto written = std::fwrite(text.data(), 1, text.size(), file);
    std::fclose(file);
    if (written != text.size()) throw input_error("cannot write " + path.string());
}

void write_store(const std::filesystem::path& path, const TraceStore& store, TraceFormat format) {
    std::ostringstream out;
    write_records(out, store.records(), format);
    write_text_file(path, out.str());
}

TraceStore filter(const TraceStore& store, const TraceFilter& predicate) {
    TraceStoreBuilder builder;
    for (const auto& [peer, trace] : store.traces()) {
        std::vector<const CrawlRecord*> kept;
        for (const auto& r : trace.records()) {
            if (predicate.software && r.software() != *predicate.software) continue;
            if (predicate.mode && r.mode() != *predicate.mode) continue;
            kept.push_back(&r);
        }
        if (kept.empty() || kept.size() < predicate.min_records) continue;
        for (const auto* r : kept) builder.add(*r);
    }
    return std::move(builder).build();
}

}  // namespace overlay_phase
