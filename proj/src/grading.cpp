#include "retain/grading.hpp"

#include <algorithm>
#include <cctype>

#include "retain/error.hpp"

namespace retain {

namespace {

[[noreturn]] void malformed(const Question& q, const std::string& what) {
  throw Error(ErrorKind::invalid_argument,
              "malformed response for " + std::string(to_string(q.kind)) + " question '" + q.id + "': " + what);
}

std::vector<int> int_list(const Question& q, const Json& response, const char* key) {
  auto it = response.find(key);
  if (it == response.end() || !it->is_array()) malformed(q, std::string("expected array '") + key + "'");
  std::vector<int> out;
  for (const auto& v : *it) {
    if (!v.is_number_integer()) malformed(q, std::string("'") + key + "' must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

std::string normalize(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(begin, end - begin + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

bool grade(const Question& q, const Json& response) {
  if (!response.is_object()) malformed(q, "expected an object");
  if (kind_of(q.answer_key) != q.kind) {
    throw Error(ErrorKind::invalid_argument, "question '" + q.id + "' has an answer_key of the wrong kind");
  }
  switch (q.kind) {
    case QuestionKind::multiple_choice: {
      auto picked = int_list(q, response, "choices");
      std::set<int> chosen(picked.begin(), picked.end());
      if (chosen.size() != picked.size()) malformed(q, "duplicate choice");
      return chosen == std::get<ChoiceKey>(q.answer_key).correct;
    }
    case QuestionKind::sequencing:
      return int_list(q, response, "order") == std::get<SequenceKey>(q.answer_key).order;
    case QuestionKind::text_completion: {
      auto it = response.find("text");
      if (it == response.end() || !it->is_string()) malformed(q, "expected string 'text'");
      const std::string given = normalize(it->get<std::string>());
      const auto& accepted = std::get<TextKey>(q.answer_key).accepted;
      return std::any_of(accepted.begin(), accepted.end(),
                         [&](const std::string& a) { return normalize(a) == given; });
    }
    case QuestionKind::image_area: {
      auto x = response.find("x");
      auto y = response.find("y");
      if (x == response.end() || y == response.end() || !x->is_number() || !y->is_number()) {
        malformed(q, "expected numbers 'x' and 'y'");
      }
      const double px = x->get<double>();
      const double py = y->get<double>();
      if (px < 0 || px > 1 || py < 0 || py > 1) malformed(q, "click outside the unit square");
      const auto& regions = std::get<AreaKey>(q.answer_key).regions;
      return std::any_of(regions.begin(), regions.end(), [&](const Rect& r) { return r.contains(px, py); });
    }
  }
  return false;
}

}  // namespace retain
