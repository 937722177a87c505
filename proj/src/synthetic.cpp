#include "gritnet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gritnet/error.hpp"
#include "gritnet/random.hpp"

namespace gritnet {

ItemKind item_kind(const std::string& name) {
  if (name.starts_with("quiz")) return ItemKind::kQuiz;
  if (name.starts_with("project")) return ItemKind::kProject;
  return ItemKind::kContent;
}

std::vector<std::string> default_curriculum(int lessons, int lessons_per_project) {
  std::vector<std::string> items;
  char buf[32];
  for (int l = 1; l <= lessons; ++l) {
    for (int p = 1; p <= 3; ++p) {
      std::snprintf(buf, sizeof buf, "lesson%02d_page%d", l, p);
      items.emplace_back(buf);
    }
    std::snprintf(buf, sizeof buf, "quiz%02d", l);
    items.emplace_back(buf);
    if (lessons_per_project > 0 && l % lessons_per_project == 0) {
      std::snprintf(buf, sizeof buf, "project%d", l / lessons_per_project);
      items.emplace_back(buf);
    }
  }
  return items;
}

void validate(const SyntheticSpec& spec) {
  if (spec.curriculum.empty()) throw Error("synthetic curriculum is empty");
  std::set<std::string> seen;
  bool has_content = false;
  for (const auto& item : spec.curriculum) {
    if (item.empty()) throw Error("synthetic curriculum has an empty item name");
    if (!seen.insert(item).second) throw Error("duplicate curriculum item: " + item);
    has_content = has_content || item_kind(item) == ItemKind::kContent;
  }
  if (!has_content) throw Error("synthetic curriculum needs at least one content page");
  if (!(spec.graduation_rate_target >= 0.0 && spec.graduation_rate_target <= 1.0)) {
    throw Error("graduation_rate_target must be in [0, 1]");
  }
  if (!(spec.order_signal_strength >= 0.0 && spec.order_signal_strength <= 1.0)) {
    throw Error("order_signal_strength must be in [0, 1]");
  }
  if (spec.horizon_weeks < 1) throw Error("horizon_weeks must be positive");
}

namespace {

using C = SyntheticConstants;

struct Profile {
  bool graduate = false;
  bool steady = false;
  double items_per_week = 0.0;
  double quiz_accuracy = 0.0;
  int active_weeks = 0;
};

// Emits the action names of one curriculum item visit.
void expand_item(const std::string& item, Rng& rng, double quiz_accuracy, std::vector<std::string>& out) {
  switch (item_kind(item)) {
    case ItemKind::kContent:
      out.push_back(item);
      break;
    case ItemKind::kQuiz:
      out.push_back(item + (rng.bernoulli(quiz_accuracy) ? "_correct" : "_incorrect"));
      break;
    case ItemKind::kProject:
      out.push_back(item + "_submitted");
      out.push_back(item + (rng.bernoulli(C::project_pass_rate) ? "_passed" : "_failed"));
      break;
  }
}

struct Visit {
  int day = 0;  // within the week, 0..6
  std::vector<std::string> actions;
};

}  // namespace

std::string generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  const std::size_t n = spec.student_count;
  const auto graduates = static_cast<std::size_t>(std::llround(spec.graduation_rate_target * static_cast<double>(n)));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng label_rng(derive_seed(spec.seed, "labels"));
  shuffle(perm, label_rng);
  std::vector<bool> is_graduate(n, false);
  for (std::size_t i = 0; i < graduates; ++i) is_graduate[perm[i]] = true;

  std::vector<std::size_t> content_items;
  for (std::size_t j = 0; j < spec.curriculum.size(); ++j) {
    if (item_kind(spec.curriculum[j]) == ItemKind::kContent) content_items.push_back(j);
  }

  std::ostringstream out;
  for (std::size_t s = 0; s < n; ++s) {
    Rng rng(derive_seed(derive_seed(spec.seed, "student"), s));
    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "s%06zu", s);
    const std::string id(id_buf);
    const Day enroll = kSyntheticEpochDay + static_cast<Day>(rng.below(90));

    Profile p;
    p.graduate = is_graduate[s];
    if (rng.bernoulli(spec.order_signal_strength)) {
      const bool faithful = rng.bernoulli(C::style_fidelity);
      p.steady = p.graduate == faithful;
      p.items_per_week = C::items_per_week;
      p.quiz_accuracy = C::quiz_accuracy;
    } else {
      p.steady = rng.bernoulli(0.5);
      p.items_per_week = p.graduate ? C::graduate_items_per_week : C::non_graduate_items_per_week;
      p.quiz_accuracy = p.graduate ? C::graduate_quiz_accuracy : C::non_graduate_quiz_accuracy;
    }
    p.active_weeks = p.graduate ? spec.horizon_weeks
                                : std::min(spec.horizon_weeks,
                                           C::first_churn_week + static_cast<int>(rng.below(C::churn_week_spread)));

    nlohmann::json enroll_line = {{"student_id", id}, {"enrollment_day", enroll}};
    if (p.graduate) enroll_line["graduated_day"] = enroll + 7 * spec.horizon_weeks + static_cast<Day>(rng.below(14));
    out << enroll_line.dump() << '\n';

    auto emit = [&](const std::string& action, Day day) {
      out << nlohmann::json{{"student_id", id}, {"action", action}, {"day", day}}.dump() << '\n';
    };

    // Free-trial activity before enrollment; filtered out downstream.
    if (rng.bernoulli(C::trial_rate)) {
      const int count = 1 + static_cast<int>(rng.below(4));
      Day day = enroll - 1 - static_cast<Day>(rng.below(5));
      for (int k = 0; k < count && day < enroll; ++k) {
        emit(spec.curriculum[content_items[static_cast<std::size_t>(k) % content_items.size()]], day);
        day += static_cast<Day>(rng.below(2));
      }
    }

    std::size_t pointer = 0;
    for (int week = 0; week < p.active_weeks; ++week) {
      const int items = rng.poisson(p.items_per_week);
      std::vector<Visit> visits;
      for (int k = 0; k < items; ++k) {
        std::size_t item;
        if (pointer < spec.curriculum.size()) {
          item = pointer++;
        } else {
          item = content_items[rng.below(content_items.size())];  // review pass
        }
        Visit v;
        expand_item(spec.curriculum[item], rng, p.quiz_accuracy, v.actions);
        visits.push_back(std::move(v));
      }
      if (visits.empty()) continue;

      if (p.steady) {
        std::vector<int> active;
        while (active.empty()) {
          for (int d = 0; d < 7; ++d) {
            if (rng.bernoulli(C::steady_active_day_rate)) active.push_back(d);
          }
        }
        std::vector<int> days;
        for (std::size_t k = 0; k < visits.size(); ++k) days.push_back(active[rng.below(active.size())]);
        std::sort(days.begin(), days.end());
        for (std::size_t k = 0; k < visits.size(); ++k) visits[k].day = days[k];
      } else {
        shuffle(visits, rng);
        std::vector<int> week_days{0, 1, 2, 3, 4, 5, 6};
        shuffle(week_days, rng);
        for (auto& v : visits) v.day = week_days[rng.below(C::burst_days)];
        std::stable_sort(visits.begin(), visits.end(), [](const Visit& a, const Visit& b) { return a.day < b.day; });
      }
      for (const auto& v : visits) {
        for (const auto& a : v.actions) emit(a, enroll + 7 * week + v.day);
      }
    }
  }
  return out.str();
}

}  // namespace gritnet
