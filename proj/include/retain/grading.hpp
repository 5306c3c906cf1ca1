#pragma once

#include "retain/domain.hpp"
#include "retain/json_io.hpp"

namespace retain {

// Response payloads by kind:
//   multiple_choice  {"choices": [int...]}   exact set match
//   sequencing       {"order": [int...]}     exact permutation match
//   text_completion  {"text": "..."}         case-insensitive, trimmed, any accepted string
//   image_area       {"x": n, "y": n}        point inside any key rectangle
// A payload that does not fit the kind throws Error(invalid_argument).
bool grade(const Question& q, const Json& response);

}  // namespace retain
