#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace dcnet {

struct CheckItem {
  std::string id;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

struct Report {
  std::vector<CheckItem> checks;

  void add(std::string id, double residual, double threshold, std::string note = "") {
    checks.push_back({std::move(id), residual, threshold, residual < threshold,
                      std::move(note)});
  }
  void add_flag(std::string id, bool ok, std::string note = "") {
    checks.push_back({std::move(id), ok ? 0.0 : 1.0, 0.5, ok, std::move(note)});
  }
  void merge(const Report& other, const std::string& prefix) {
    for (CheckItem c : other.checks) {
      c.id = prefix + c.id;
      checks.push_back(std::move(c));
    }
  }
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckItem& c) { return c.pass; });
  }
  void sort_by_id() {
    std::sort(checks.begin(), checks.end(),
              [](const CheckItem& a, const CheckItem& b) { return a.id < b.id; });
  }
};

}  // namespace dcnet
