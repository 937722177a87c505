#include "gritnet/event_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gritnet/error.hpp"

namespace gritnet {

Vocabulary::Vocabulary(std::vector<std::string> names) {
  for (const auto& n : names) {
    if (find(n)) throw Error("duplicate action name in vocabulary: " + n);
    add(n);
  }
}

std::int32_t Vocabulary::add(std::string_view name) {
  std::string key(name);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const auto idx = static_cast<std::int32_t>(names_.size());
  names_.push_back(key);
  index_.emplace(std::move(key), idx);
  return idx;
}

std::optional<std::int32_t> Vocabulary::find(std::string_view name) const {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  return std::nullopt;
}

namespace {

using nlohmann::json;

Day read_day(const json& obj, const char* key, std::size_t line) {
  const auto& v = obj.at(key);
  if (v.is_number_integer() || v.is_number_unsigned()) {
    const auto d = v.get<std::int64_t>();
    if (d < 0 || d > std::numeric_limits<Day>::max()) {
      throw ParseError(line, std::string("field '") + key + "' out of range");
    }
    return static_cast<Day>(d);
  }
  if (v.is_number_float()) {
    // sub-day precision is dropped
    const double d = std::floor(v.get<double>());
    if (!(d >= 0.0) || d > std::numeric_limits<Day>::max()) {
      throw ParseError(line, std::string("field '") + key + "' out of range");
    }
    return static_cast<Day>(d);
  }
  throw ParseError(line, std::string("field '") + key + "' must be a number");
}

struct PendingEvent {
  std::string action;
  Day day;
};

struct PendingStudent {
  std::optional<Day> enrollment_day;
  std::optional<Day> graduation_day;
  std::vector<PendingEvent> events;
};

}  // namespace

EventLog parse_event_log(std::istream& in, const ParseOptions& options) {
  std::vector<std::string> order;
  std::unordered_map<std::string, PendingStudent> students;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    if (!obj.contains("student_id") || !obj["student_id"].is_string()) {
      throw ParseError(line_no, "missing string field 'student_id'");
    }
    const auto id = obj["student_id"].get<std::string>();
    auto [it, inserted] = students.try_emplace(id);
    if (inserted) order.push_back(id);
    PendingStudent& s = it->second;

    if (obj.contains("action")) {
      if (!obj["action"].is_string()) throw ParseError(line_no, "field 'action' must be a string");
      if (!obj.contains("day")) throw ParseError(line_no, "event line missing 'day'");
      s.events.push_back({obj["action"].get<std::string>(), read_day(obj, "day", line_no)});
    } else if (obj.contains("enrollment_day")) {
      if (s.enrollment_day) throw ParseError(line_no, "duplicate enrollment line for student " + id);
      s.enrollment_day = read_day(obj, "enrollment_day", line_no);
      if (obj.contains("graduated_day") && !obj["graduated_day"].is_null()) {
        s.graduation_day = read_day(obj, "graduated_day", line_no);
      }
    } else {
      throw ParseError(line_no, "line is neither an event nor an enrollment record");
    }
  }

  EventLog log;
  log.records.reserve(order.size());
  for (const auto& id : order) {
    PendingStudent& s = students.at(id);
    if (!s.enrollment_day) throw Error("student " + id + " has events but no enrollment line");
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const PendingEvent& a, const PendingEvent& b) { return a.day < b.day; });
    StudentRecord r;
    r.student_id = id;
    r.enrollment_day = *s.enrollment_day;
    r.graduation_day = s.graduation_day;
    r.label = derive_label(s.graduation_day, options.deadline_day);
    r.events.reserve(s.events.size());
    for (const auto& e : s.events) r.events.push_back({log.vocab.add(e.action), e.day});
    log.records.push_back(std::move(r));
  }
  return log;
}

EventLog parse_event_log(std::string_view text, const ParseOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_event_log(in, options);
}

void write_event_log(std::ostream& out, const EventLog& log) {
  for (const auto& r : log.records) {
    json enroll = {{"student_id", r.student_id}, {"enrollment_day", r.enrollment_day}};
    if (r.graduation_day) enroll["graduated_day"] = *r.graduation_day;
    out << enroll.dump() << '\n';
    for (const auto& e : r.events) {
      json ev = {{"student_id", r.student_id}, {"action", log.vocab.name(e.action_id)}, {"day", e.day}};
      out << ev.dump() << '\n';
    }
  }
}

StudentRecord filter_pre_enrollment(StudentRecord record) {
  std::erase_if(record.events, [&](const Event& e) { return e.day < record.enrollment_day; });
  return record;
}

int derive_label(std::optional<Day> graduation_day, Day deadline_day) {
  return graduation_day && *graduation_day < deadline_day ? 1 : 0;
}

DatasetStats dataset_stats(const std::vector<StudentRecord>& records) {
  DatasetStats s;
  if (records.empty()) return s;
  s.student_count = records.size();
  s.min_length = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0;
  std::set<std::int32_t> actions;
  for (const auto& r : records) {
    s.graduate_count += static_cast<std::size_t>(r.label);
    const std::size_t n = r.events.size();
    total += n;
    s.min_length = std::min(s.min_length, n);
    s.max_length = std::max(s.max_length, n);
    for (const auto& e : r.events) actions.insert(e.action_id);
  }
  s.graduation_rate = static_cast<double>(s.graduate_count) / static_cast<double>(s.student_count);
  s.mean_length = static_cast<double>(total) / static_cast<double>(s.student_count);
  s.unique_actions = actions.size();
  return s;
}

}  // namespace gritnet
