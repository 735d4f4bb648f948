#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "engine.hpp"

namespace hlucb {

// ---------------------------------------------------------------------------
// Item manifest: CSV `id,path,method,label,instance`.

enum class Label { Fake, Real };

const char* to_string(Label label) noexcept;
Label label_from_string(const std::string& text);

struct ManifestItem {
  std::string id;
  std::string path;
  std::string method;  // method_a | method_b | real
  Label label = Label::Real;
  std::string instance;
};

class ItemManifest {
 public:
  static ItemManifest read_file(const std::string& path);
  static ItemManifest parse(std::istream& in, const std::string& source);

  const std::vector<ManifestItem>& items() const noexcept { return items_; }
  std::vector<std::string> instances() const;

  /// Items of one instance in manifest order; engine item index i refers to
  /// element i. Throws Error{InvalidArgument} for an unknown instance.
  const std::vector<ManifestItem>& instance_items(const std::string& instance) const;

 private:
  std::vector<ManifestItem> items_;
  std::map<std::string, std::vector<ManifestItem>> by_instance_;
};

// ---------------------------------------------------------------------------
// Event log: one JSON object per line. Two kinds share the file:
//
//   {"kind":"issue","instance":..,"duel_id":..,"focal":..,"opponent":..,"display_swap":..}
//   {"kind":"comparison","seq":..,"instance":..,"duel_id":..,"focal":..,
//    "opponent":..,"focal_won":..,"rater":..,"timestamp":..}
//
// Issue lines let a restarted service keep honouring duels it handed out
// before the restart. Comparison sequence numbers start at 1 and are
// contiguous; any prefix of a valid log is a valid log.

inline constexpr const char* kAnonymousRater = "anonymous";

struct IssueEvent {
  std::string instance;
  Duel duel;

  friend bool operator==(const IssueEvent&, const IssueEvent&) = default;
};

struct ComparisonRecord {
  std::uint64_t seq = 0;
  std::string instance;
  std::uint64_t duel_id = 0;
  std::size_t focal = 0;
  std::size_t opponent = 0;
  bool focal_won = false;
  std::string rater = kAnonymousRater;
  std::int64_t timestamp = 0;  // ms since the Unix epoch

  friend bool operator==(const ComparisonRecord&, const ComparisonRecord&) = default;
};

using LogEvent = std::variant<IssueEvent, ComparisonRecord>;

nlohmann::ordered_json to_json(const LogEvent& event);
LogEvent log_event_from_json(const nlohmann::json& doc);

/// Parses and validates a whole log. Throws Error{Parse} citing the line for
/// malformed JSON, a sequence gap or a repeated comparison duel id.
std::vector<LogEvent> read_log(std::istream& in, const std::string& source);
std::vector<LogEvent> read_log_file(const std::string& path);

/// Append-only single-writer log file. Each append is written with one
/// write(2) and, when durable, fdatasync'd before returning.
class EventLog {
 public:
  /// Opens (creating if absent) and scans the existing content so sequence
  /// numbers and duplicate detection continue where the file left off.
  static EventLog open(const std::string& path, bool durable = true);

  EventLog(EventLog&& other) noexcept;
  EventLog& operator=(EventLog&& other) noexcept;
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  ~EventLog();

  /// Assigns the next sequence number and appends. Throws
  /// Error{DuplicateOutcome} if the duel id was already recorded (file untouched).
  std::uint64_t append(ComparisonRecord record);
  void append(const IssueEvent& event);

  std::uint64_t last_seq() const noexcept { return last_seq_; }
  const std::string& path() const noexcept { return path_; }
  /// Events read at open time.
  const std::vector<LogEvent>& recovered() const noexcept { return recovered_; }

 private:
  EventLog(std::string path, int fd, bool durable);
  void write_line(const std::string& line);

  std::string path_;
  int fd_ = -1;
  bool durable_ = true;
  std::uint64_t last_seq_ = 0;
  std::set<std::pair<std::string, std::uint64_t>> answered_;  // (instance, duel id)
  std::vector<LogEvent> recovered_;
};

/// Writes `events` to a fresh file (truncating), assigning nothing.
void write_log_file(const std::string& path, const std::vector<LogEvent>& events);

/// Rebuilds an engine from a log: issue events re-register duels, comparison
/// events are fed to record_outcome. Events of other instances are skipped
/// when `instance` is non-empty. Throws on items outside [0, n) or records
/// that disagree with the issued duel.
Engine replay(const RankingConfig& config, std::uint64_t seed,
              const std::vector<LogEvent>& events, const std::string& instance = {});

}  // namespace hlucb
