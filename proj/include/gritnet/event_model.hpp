#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gritnet {

/// Calendar day, integer days since 1970-01-01.
using Day = std::int32_t;

struct Event {
  std::int32_t action_id = 0;
  Day day = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

struct StudentRecord {
  std::string student_id;
  Day enrollment_day = 0;
  std::optional<Day> graduation_day;
  /// Sorted by day; same-day events keep ingestion order.
  std::vector<Event> events;
  int label = 0;

  friend bool operator==(const StudentRecord&, const StudentRecord&) = default;
};

/// Bijection between action names and 0..size()-1.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> names);

  /// Returns the index of `name`, appending it if unseen.
  std::int32_t add(std::string_view name);
  std::optional<std::int32_t> find(std::string_view name) const;
  const std::string& name(std::int32_t index) const { return names_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct EventLog {
  std::vector<StudentRecord> records;
  Vocabulary vocab;
};

struct ParseOptions {
  /// Graduation counts only strictly before this day.
  Day deadline_day = std::numeric_limits<Day>::max();
};

/// Reads the JSONL event log. Records appear in first-seen order of their
/// student id; the vocabulary is assigned by first appearance while walking
/// the grouped, time-sorted records. Throws ParseError on malformed lines.
EventLog parse_event_log(std::istream& in, const ParseOptions& options = {});
EventLog parse_event_log(std::string_view text, const ParseOptions& options = {});

/// Inverse of parse_event_log: one enrollment line per student followed by
/// that student's events in stored order.
void write_event_log(std::ostream& out, const EventLog& log);

StudentRecord filter_pre_enrollment(StudentRecord record);

int derive_label(std::optional<Day> graduation_day, Day deadline_day);

struct DatasetStats {
  std::size_t student_count = 0;
  std::size_t graduate_count = 0;
  double graduation_rate = 0.0;
  std::size_t min_length = 0;
  double mean_length = 0.0;
  std::size_t max_length = 0;
  std::size_t unique_actions = 0;
};

DatasetStats dataset_stats(const std::vector<StudentRecord>& records);

}  // namespace gritnet
