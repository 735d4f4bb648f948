#include "store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "error.hpp"

namespace hlucb {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(Label label) noexcept {
  return label == Label::Fake ? "fake" : "real";
}

Label label_from_string(const std::string& text) {
  if (text == "fake") return Label::Fake;
  if (text == "real") return Label::Real;
  fail(ErrorCode::Parse, "label must be 'fake' or 'real' (got '" + text + "')");
}

// ---------------------------------------------------------------------------

ItemManifest ItemManifest::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open manifest '" + path + "'");
  return parse(in, path);
}

ItemManifest ItemManifest::parse(std::istream& in, const std::string& source) {
  const csv::Table table = csv::parse(in, source);
  csv::require_header(table, {"id", "path", "method", "label", "instance"}, source);

  static const std::set<std::string> kMethods = {"method_a", "method_b", "real"};
  ItemManifest manifest;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    const auto where = source + ":" + std::to_string(row.line) + ": ";
    ManifestItem item;
    item.id = row.fields[0];
    item.path = row.fields[1];
    item.method = row.fields[2];
    item.instance = row.fields[4];
    if (item.id.empty()) fail(ErrorCode::Parse, where + "empty item id");
    if (!seen.insert(item.id).second) fail(ErrorCode::Parse, where + "duplicate item id '" + item.id + "'");
    if (!kMethods.count(item.method))
      fail(ErrorCode::Parse, where + "unknown method '" + item.method + "'");
    if (item.instance.empty()) fail(ErrorCode::Parse, where + "empty instance");
    try {
      item.label = label_from_string(row.fields[3]);
    } catch (const Error& e) {
      fail(ErrorCode::Parse, where + e.what());
    }
    manifest.by_instance_[item.instance].push_back(item);
    manifest.items_.push_back(std::move(item));
  }
  return manifest;
}

std::vector<std::string> ItemManifest::instances() const {
  std::vector<std::string> out;
  for (const auto& [name, items] : by_instance_) out.push_back(name);
  return out;
}

const std::vector<ManifestItem>& ItemManifest::instance_items(const std::string& instance) const {
  auto it = by_instance_.find(instance);
  if (it == by_instance_.end())
    fail(ErrorCode::InvalidArgument, "manifest has no items for instance '" + instance + "'");
  return it->second;
}

// ---------------------------------------------------------------------------

ordered_json to_json(const LogEvent& event) {
  ordered_json doc;
  if (const auto* issue = std::get_if<IssueEvent>(&event)) {
    doc["kind"] = "issue";
    doc["instance"] = issue->instance;
    doc["duel_id"] = issue->duel.id;
    doc["focal"] = issue->duel.focal;
    doc["opponent"] = issue->duel.opponent;
    doc["display_swap"] = issue->duel.display_swap;
  } else {
    const auto& rec = std::get<ComparisonRecord>(event);
    doc["kind"] = "comparison";
    doc["seq"] = rec.seq;
    doc["instance"] = rec.instance;
    doc["duel_id"] = rec.duel_id;
    doc["focal"] = rec.focal;
    doc["opponent"] = rec.opponent;
    doc["focal_won"] = rec.focal_won;
    doc["rater"] = rec.rater;
    doc["timestamp"] = rec.timestamp;
  }
  return doc;
}

LogEvent log_event_from_json(const json& doc) {
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "issue") {
    IssueEvent e;
    e.instance = doc.at("instance").get<std::string>();
    e.duel.id = doc.at("duel_id").get<std::uint64_t>();
    e.duel.focal = doc.at("focal").get<std::size_t>();
    e.duel.opponent = doc.at("opponent").get<std::size_t>();
    e.duel.display_swap = doc.at("display_swap").get<bool>();
    return e;
  }
  if (kind == "comparison") {
    ComparisonRecord r;
    r.seq = doc.at("seq").get<std::uint64_t>();
    r.instance = doc.at("instance").get<std::string>();
    r.duel_id = doc.at("duel_id").get<std::uint64_t>();
    r.focal = doc.at("focal").get<std::size_t>();
    r.opponent = doc.at("opponent").get<std::size_t>();
    r.focal_won = doc.at("focal_won").get<bool>();
    r.rater = doc.at("rater").get<std::string>();
    r.timestamp = doc.at("timestamp").get<std::int64_t>();
    return r;
  }
  fail(ErrorCode::Parse, "unknown event kind '" + kind + "'");
}

namespace {

struct LogScan {
  std::vector<LogEvent> events;
  std::uint64_t last_seq = 0;
  std::set<std::pair<std::string, std::uint64_t>> answered;
};

LogScan scan_log(std::istream& in, const std::string& source) {
  LogScan scan;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    if (in.eof()) fail(ErrorCode::Parse, where + "truncated record (no trailing newline)");
    LogEvent event;
    try {
      event = log_event_from_json(json::parse(line));
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, where + "malformed record: " + e.what());
    } catch (const Error& e) {
      fail(ErrorCode::Parse, where + e.what());
    }
    if (const auto* rec = std::get_if<ComparisonRecord>(&event)) {
      if (rec->seq != scan.last_seq + 1) {
        fail(ErrorCode::Parse, where + "sequence gap: expected " +
                                   std::to_string(scan.last_seq + 1) + ", found " +
                                   std::to_string(rec->seq));
      }
      if (!scan.answered.emplace(rec->instance, rec->duel_id).second)
        fail(ErrorCode::Parse, where + "duplicate comparison for duel " + std::to_string(rec->duel_id));
      scan.last_seq = rec->seq;
    }
    scan.events.push_back(std::move(event));
  }
  return scan;
}

}  // namespace

std::vector<LogEvent> read_log(std::istream& in, const std::string& source) {
  return scan_log(in, source).events;
}

std::vector<LogEvent> read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open log '" + path + "'");
  return read_log(in, path);
}

// ---------------------------------------------------------------------------

EventLog::EventLog(std::string path, int fd, bool durable)
    : path_(std::move(path)), fd_(fd), durable_(durable) {}

EventLog::EventLog(EventLog&& other) noexcept
    : path_(std::move(other.path_)),
      fd_(std::exchange(other.fd_, -1)),
      durable_(other.durable_),
      last_seq_(other.last_seq_),
      answered_(std::move(other.answered_)),
      recovered_(std::move(other.recovered_)) {}

EventLog& EventLog::operator=(EventLog&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    path_ = std::move(other.path_);
    fd_ = std::exchange(other.fd_, -1);
    durable_ = other.durable_;
    last_seq_ = other.last_seq_;
    answered_ = std::move(other.answered_);
    recovered_ = std::move(other.recovered_);
  }
  return *this;
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

EventLog EventLog::open(const std::string& path, bool durable) {
  LogScan scan;
  {
    std::ifstream in(path);
    if (in) scan = scan_log(in, path);
  }
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorCode::Io, "cannot open log '" + path + "': " + std::strerror(errno));
  EventLog log(path, fd, durable);
  log.last_seq_ = scan.last_seq;
  log.answered_ = std::move(scan.answered);
  log.recovered_ = std::move(scan.events);
  return log;
}

void EventLog::write_line(const std::string& line) {
  const std::string buf = line + "\n";
  std::size_t written = 0;
  while (written < buf.size()) {
    const ssize_t rc = ::write(fd_, buf.data() + written, buf.size() - written);
    if (rc < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::Io, "write to '" + path_ + "' failed: " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(rc);
  }
  if (durable_ && ::fdatasync(fd_) != 0)
    fail(ErrorCode::Io, "fdatasync on '" + path_ + "' failed: " + std::strerror(errno));
}

std::uint64_t EventLog::append(ComparisonRecord record) {
  if (answered_.count({record.instance, record.duel_id}))
    fail(ErrorCode::DuplicateOutcome,
         "duel " + std::to_string(record.duel_id) + " already has a recorded comparison");
  record.seq = last_seq_ + 1;
  write_line(to_json(record).dump());
  last_seq_ = record.seq;
  answered_.emplace(record.instance, record.duel_id);
  return record.seq;
}

void EventLog::append(const IssueEvent& event) { write_line(to_json(event).dump()); }

void write_log_file(const std::string& path, const std::vector<LogEvent>& events) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write log '" + path + "'");
  for (const auto& e : events) out << to_json(e).dump() << '\n';
  out.flush();
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------

Engine replay(const RankingConfig& config, std::uint64_t seed,
              const std::vector<LogEvent>& events, const std::string& instance) {
  Engine engine(config, seed);
  for (const auto& event : events) {
    if (const auto* issue = std::get_if<IssueEvent>(&event)) {
      if (!instance.empty() && issue->instance != instance) continue;
      if (issue->duel.focal >= config.n || issue->duel.opponent >= config.n) {
        fail(ErrorCode::InvalidArgument,
             "issue of duel " + std::to_string(issue->duel.id) + " references an unknown item");
      }
      engine.adopt_issued(issue->duel);
      continue;
    }
    const auto& rec = std::get<ComparisonRecord>(event);
    if (!instance.empty() && rec.instance != instance) continue;
    if (rec.focal >= config.n || rec.opponent >= config.n) {
      fail(ErrorCode::InvalidArgument,
           "comparison " + std::to_string(rec.seq) + " references an unknown item");
    }
    const Duel& issued = engine.check_outcome(rec.duel_id);
    if (issued.focal != rec.focal || issued.opponent != rec.opponent) {
      fail(ErrorCode::Mismatch, "comparison " + std::to_string(rec.seq) +
                                    " disagrees with the issued duel " +
                                    std::to_string(rec.duel_id));
    }
    engine.record_outcome(rec.duel_id, rec.focal_won);
  }
  return engine;
}

}  // namespace hlucb
