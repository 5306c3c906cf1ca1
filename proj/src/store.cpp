#include "retain/store.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "retain/error.hpp"

namespace fs = std::filesystem;

namespace retain {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::io, "cannot read " + path.string());
  return buf.str();
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

void validate_bank(const Bank& bank) {
  std::vector<std::string> problems;
  std::set<QuestionId> ids;
  for (const Question& q : bank.questions) {
    if (!ids.insert(q.id).second) problems.push_back("duplicate question id '" + q.id + "'");
    for (const auto& v : validate_question(q)) problems.push_back("question '" + q.id + "': " + v);
  }
  if (bank.app_id.empty()) problems.insert(problems.begin(), "app_id must not be empty");
  if (problems.empty()) return;
  std::string msg = "invalid bank '" + bank.app_id + "':";
  for (const auto& p : problems) msg += "\n  " + p;
  throw Error(ErrorKind::invalid_argument, msg);
}

Bank parse_bank(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::parse, "line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  Bank bank = bank_from_json(doc);
  validate_bank(bank);
  return bank;
}

Bank load_bank(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::io, "bank file not found: " + path.string());
  try {
    return parse_bank(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_bank(const fs::path& path, const Bank& bank) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out << bank_to_json(bank).dump(2) << '\n';
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

LogContents read_log(const fs::path& path) {
  LogContents out;
  if (!fs::exists(path)) return out;
  const std::string text = read_file(path);

  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', start);
    const bool terminated = end != std::string::npos;
    if (!terminated) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;

    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.records.push_back(log_record_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      if (!terminated) {
        out.warnings.push_back(path.string() + ": line " + std::to_string(line_no) +
                               ": incomplete trailing record ignored");
        break;
      }
      throw Error(ErrorKind::parse,
                  path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

EventLog::EventLog(fs::path path) : path_(std::move(path)) {
  const LogContents existing = read_log(path_);
  for (const auto& r : existing.records) {
    if (auto* e = std::get_if<AnswerEvent>(&r)) seen_.emplace(e->session_id, e->question_id, e->order_position);
  }
  if (!fs::exists(path_)) return;
  // An unterminated tail must not be glued to the next record.
  const std::string text = read_file(path_);
  if (text.empty() || text.back() == '\n') return;
  if (!existing.warnings.empty()) {
    const auto cut = text.rfind('\n');
    fs::resize_file(path_, cut == std::string::npos ? 0 : cut + 1);
  } else {
    open();
    if (std::fputs("\n", file_) < 0 || std::fflush(file_) != 0) {
      throw Error(ErrorKind::io, "write failed: " + path_.string());
    }
  }
}

EventLog::~EventLog() {
  if (file_ != nullptr) std::fclose(file_);
}

void EventLog::open() {
  if (file_ != nullptr) return;
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  file_ = std::fopen(path_.c_str(), "ab");
  if (file_ == nullptr) throw Error(ErrorKind::io, "cannot open " + path_.string() + " for append");
}

void EventLog::append(const LogRecord& record) {
  std::tuple<SessionId, QuestionId, std::uint32_t> triple;
  const auto* e = std::get_if<AnswerEvent>(&record);
  if (e != nullptr) {
    triple = {e->session_id, e->question_id, e->order_position};
    if (seen_.contains(triple)) {
      throw Error(ErrorKind::conflict, "duplicate answer event (session '" + e->session_id +
                                           "', question '" + e->question_id + "', position " +
                                           std::to_string(e->order_position) + ")");
    }
  } else if (const auto* f = std::get_if<FeedbackRecord>(&record); !(f->value >= 0 && f->value <= 1)) {
    throw Error(ErrorKind::invalid_argument, "feedback value outside [0,1]");
  }

  open();
  const std::string line = log_record_to_json(record).dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0 ||
      ::fsync(::fileno(file_)) != 0) {
    throw Error(ErrorKind::io, "write failed: " + path_.string());
  }
  if (e != nullptr) seen_.insert(std::move(triple));
}

RebuildResult rebuild_snapshot(const LogContents& log, std::span<const Question> bank) {
  std::set<QuestionId> known;
  for (const auto& q : bank) known.insert(q.id);

  RebuildResult out;
  out.warnings = log.warnings;
  StatsAccumulator acc;
  for (const auto& record : log.records) {
    const QuestionId& qid = std::visit([](const auto& r) -> const QuestionId& { return r.question_id; }, record);
    if (!known.contains(qid)) {
      ++out.skipped_unknown;
      out.warnings.push_back("record for unknown question '" + qid + "' skipped");
      continue;
    }
    std::visit([&](const auto& r) { acc.add(r); }, record);
    if (auto* e = std::get_if<AnswerEvent>(&record)) {
      out.events.push_back(*e);
    } else {
      out.feedback.push_back(std::get<FeedbackRecord>(record));
    }
  }
  out.snapshot = acc.snapshot();
  return out;
}

RebuildResult rebuild_snapshot(const fs::path& log, std::span<const Question> bank) {
  return rebuild_snapshot(read_log(log), bank);
}

fs::path DataDir::bank_path(const std::string& app_id) const {
  return banks_dir() / (app_id + ".json");
}

std::vector<Bank> DataDir::load_banks() const {
  std::vector<Bank> banks;
  if (!fs::exists(banks_dir())) return banks;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(banks_dir())) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::map<QuestionId, std::string> owner;
  for (const auto& f : files) {
    Bank b = load_bank(f);
    for (const auto& q : b.questions) {
      auto [it, inserted] = owner.emplace(q.id, b.app_id);
      if (!inserted) {
        throw Error(ErrorKind::conflict, "question id '" + q.id + "' appears in apps '" + it->second +
                                             "' and '" + b.app_id + "'");
      }
    }
    banks.push_back(std::move(b));
  }
  return banks;
}

void DataDir::install_bank(const Bank& bank) const {
  validate_bank(bank);
  for (const Bank& other : load_banks()) {
    if (other.app_id == bank.app_id) continue;
    for (const auto& q : other.questions) {
      bool clash = std::any_of(bank.questions.begin(), bank.questions.end(),
                               [&](const Question& mine) { return mine.id == q.id; });
      if (clash) {
        throw Error(ErrorKind::conflict,
                    "question id '" + q.id + "' already installed by app '" + other.app_id + "'");
      }
    }
  }
  save_bank(bank_path(bank.app_id), bank);
}

}  // namespace retain
