#pragma once

#include <string>
#include <vector>

namespace judgekit {

/// Named run of feature values with a presence flag per value. Absent
/// values are stored as 0 and imputed later.
struct FeatureBlock {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<unsigned char> present;

  std::size_t size() const { return names.size(); }
  void push(std::string name, double value, bool is_present = true) {
    names.push_back(std::move(name));
    values.push_back(value);
    present.push_back(is_present ? 1 : 0);
  }
};

}  // namespace judgekit
