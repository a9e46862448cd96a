#include "tap/assignment.hpp"

#include <sstream>

namespace tap {

std::string hours_var_name(int s, int c, int t) {
  return "x_s" + std::to_string(s) + "_c" + std::to_string(c) + "_t" + std::to_string(t);
}

std::string format_solution(const Assignment& assignment, const std::vector<std::string>& comments) {
  std::ostringstream out;
  for (const auto& line : comments) out << "# " << line << '\n';
  for (int s = 0; s < assignment.num_tas(); ++s) {
    for (int c = 0; c < assignment.num_courses(); ++c) {
      for (int t = 0; t < kTaskKinds; ++t) {
        out << hours_var_name(s, c, t) << ' ' << assignment.hours(s, c, t) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace tap
