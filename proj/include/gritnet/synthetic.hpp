#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gritnet/event_model.hpp"

namespace gritnet {

/// Curriculum entries are item names; the prefix picks the kind.
///   "quiz..."    emits <name>_correct or <name>_incorrect
///   "project..." emits <name>_submitted then <name>_passed or <name>_failed
///   anything else is a content page and emits <name>
enum class ItemKind { kContent, kQuiz, kProject };
ItemKind item_kind(const std::string& name);

/// `lessons` lessons of three pages and a quiz, with a project after every
/// `lessons_per_project` lessons.
std::vector<std::string> default_curriculum(int lessons = 30, int lessons_per_project = 6);

/// Generator knobs. Students split into two channels:
///  - order channel (probability order_signal_strength): item counts and quiz
///    accuracy do not depend on the label; graduates mostly work steadily
///    (in curriculum order, spread across the week) while non-graduates
///    mostly work in bursts (shuffled order, long gaps).
///  - count channel: study style is a coin flip, but graduates cover more
///    items per week and answer more quizzes correctly.
/// Non-graduates churn after week 3, 4 or 5; graduates stay active for the
/// whole horizon, so counts reveal the label in later weeks.
struct SyntheticSpec {
  std::size_t student_count = 2000;
  std::vector<std::string> curriculum = default_curriculum();
  double graduation_rate_target = 0.4;
  double order_signal_strength = 0.8;
  int horizon_weeks = 10;
  std::uint64_t seed = 1;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

/// First enrollment day used by the generator (2016-07-18).
inline constexpr Day kSyntheticEpochDay = 17000;

/// Fixed behavioural constants of the generator.
struct SyntheticConstants {
  static constexpr double style_fidelity = 0.9;  ///< P(style matches label), order channel
  static constexpr double items_per_week = 10.0;
  static constexpr double graduate_items_per_week = 14.0;      ///< count channel
  static constexpr double non_graduate_items_per_week = 6.0;   ///< count channel
  static constexpr double quiz_accuracy = 0.7;
  static constexpr double graduate_quiz_accuracy = 0.85;       ///< count channel
  static constexpr double non_graduate_quiz_accuracy = 0.5;    ///< count channel
  static constexpr double project_pass_rate = 0.8;
  static constexpr double steady_active_day_rate = 0.75;
  static constexpr int burst_days = 2;
  static constexpr double trial_rate = 0.3;  ///< students with pre-enrollment events
  static constexpr int first_churn_week = 3;
  static constexpr int churn_week_spread = 3;
};

/// JSONL event log bytes. Graduates number exactly
/// round(graduation_rate_target * student_count).
std::string generate_synthetic(const SyntheticSpec& spec);

void validate(const SyntheticSpec& spec);

}  // namespace gritnet
