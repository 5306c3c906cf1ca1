#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "retain/domain.hpp"
#include "retain/json_io.hpp"

namespace retain {

// Parses and validates a bank document. Syntax errors carry the line,
// schema errors the JSON path, invariant violations are listed one per line.
Bank load_bank(const std::filesystem::path& path);
Bank parse_bank(const std::string& text);
void validate_bank(const Bank& bank);
void save_bank(const std::filesystem::path& path, const Bank& bank);

struct LogContents {
  std::vector<LogRecord> records;  // in file order
  std::vector<std::string> warnings;
};

// A missing file reads as empty. A final line without a newline that fails
// to parse is an interrupted append: dropped with a warning. Any other bad
// line throws Error(parse) naming the line number.
LogContents read_log(const std::filesystem::path& path);

// Append-only JSON Lines writer. Each record is flushed and synced before
// append() returns.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path path);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  // Throws Error(conflict) on a repeated (session, question, position)
  // triple, Error(io) when the write fails.
  void append(const LogRecord& record);

  const std::filesystem::path& path() const { return path_; }

 private:
  void open();

  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::set<std::tuple<SessionId, QuestionId, std::uint32_t>> seen_;
};

struct RebuildResult {
  Snapshot snapshot;
  std::vector<AnswerEvent> events;  // folded events, in log order
  std::vector<FeedbackRecord> feedback;
  std::size_t skipped_unknown = 0;
  std::vector<std::string> warnings;
};

// Folds every record whose question is in `bank`; the rest are counted and
// reported as warnings.
RebuildResult rebuild_snapshot(const LogContents& log, std::span<const Question> bank);
RebuildResult rebuild_snapshot(const std::filesystem::path& log, std::span<const Question> bank);

// Layout: <root>/banks/<app_id>.json and <root>/events.jsonl.
class DataDir {
 public:
  explicit DataDir(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path banks_dir() const { return root_ / "banks"; }
  std::filesystem::path events_path() const { return root_ / "events.jsonl"; }
  std::filesystem::path bank_path(const std::string& app_id) const;

  // Question ids must be unique across every installed app.
  std::vector<Bank> load_banks() const;
  void install_bank(const Bank& bank) const;

 private:
  std::filesystem::path root_;
};

}  // namespace retain
