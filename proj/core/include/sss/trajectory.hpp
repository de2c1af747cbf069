// Copyright 2026 The sidescan_slam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sss/geometry.hpp"

namespace sss {

/// Time-ordered poses keyed by ping id.
class Trajectory {
 public:
  struct Entry {
    std::int64_t ping_id = 0;
    double time = 0.0;
    Pose pose;
  };

  void push_back(std::int64_t ping_id, double time, const Pose& pose) {
    if (!index_.emplace(ping_id, entries_.size()).second) {
      throw std::invalid_argument("duplicate ping id " + std::to_string(ping_id) +
                                  " in trajectory");
    }
    entries_.push_back({ping_id, time, pose});
  }

  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] const Entry& operator[](std::size_t i) const { return entries_[i]; }

  [[nodiscard]] const Pose* find(std::int64_t ping_id) const {
    auto it = index_.find(ping_id);
    return it == index_.end() ? nullptr : &entries_[it->second].pose;
  }
  [[nodiscard]] const Pose& at(std::int64_t ping_id) const {
    const Pose* p = find(ping_id);
    if (p == nullptr) throw std::out_of_range("ping " + std::to_string(ping_id) + " not in trajectory");
    return *p;
  }
  /// Position of `ping_id` in time order.
  [[nodiscard]] std::size_t index_of(std::int64_t ping_id) const {
    auto it = index_.find(ping_id);
    if (it == index_.end()) throw std::out_of_range("ping " + std::to_string(ping_id) + " not in trajectory");
    return it->second;
  }
  /// Horizontal path length between two pings.
  [[nodiscard]] double travelled(std::int64_t ping_a, std::int64_t ping_b) const {
    std::size_t a = index_of(ping_a);
    std::size_t b = index_of(ping_b);
    if (a > b) std::swap(a, b);
    double d = 0.0;
    for (std::size_t k = a; k < b; ++k) {
      d += (entries_[k + 1].pose.position() - entries_[k].pose.position()).head<2>().norm();
    }
    return d;
  }
  void set_pose(std::int64_t ping_id, const Pose& pose) {
    auto it = index_.find(ping_id);
    if (it == index_.end()) throw std::out_of_range("ping " + std::to_string(ping_id) + " not in trajectory");
    entries_[it->second].pose = pose;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::int64_t, std::size_t> index_;
};

}  // namespace sss
