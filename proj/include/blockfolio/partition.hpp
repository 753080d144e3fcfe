#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockfolio/error.hpp"

namespace blockfolio {

// Assignment of d assets to K clusters labelled 0..K-1, every label used.
class Partition {
 public:
  Partition() = default;

  // Relabels in order of first appearance, so equal groupings compare equal.
  explicit Partition(std::vector<std::size_t> raw_labels) : labels_(std::move(raw_labels)) {
    normalize();
  }

  static Partition from_clusters(const std::vector<std::vector<std::size_t>>& clusters, std::size_t d) {
    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> labels(d, unset);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      for (auto i : clusters[c]) {
        if (i >= d || labels[i] != unset)
          fail(ErrorCode::invalid_argument, "clusters must cover each index exactly once");
        labels[i] = c;
      }
    }
    if (std::find(labels.begin(), labels.end(), unset) != labels.end())
      fail(ErrorCode::invalid_argument, "clusters leave an index unassigned");
    return Partition(std::move(labels));
  }

  static Partition singletons(std::size_t d) {
    std::vector<std::size_t> labels(d);
    for (std::size_t i = 0; i < d; ++i) labels[i] = i;
    return Partition(std::move(labels));
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t num_clusters() const { return k_; }
  std::size_t label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::size_t>& labels() const { return labels_; }

  // Members of each cluster in ascending index order.
  std::vector<std::vector<std::size_t>> clusters() const {
    std::vector<std::vector<std::size_t>> out(k_);
    for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i]].push_back(i);
    return out;
  }

  // True when every cluster of *this is contained in a cluster of other.
  bool refines(const Partition& other) const {
    if (other.size() != size()) return false;
    std::vector<std::size_t> image(k_, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      auto& slot = image[labels_[i]];
      if (slot == std::numeric_limits<std::size_t>::max()) slot = other.label(i);
      else if (slot != other.label(i)) return false;
    }
    return true;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  void normalize() {
    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> remap;
    for (auto& l : labels_) {
      if (l >= remap.size()) remap.resize(l + 1, unset);
      if (remap[l] == unset) remap[l] = k_++;
      l = remap[l];
    }
  }

  std::vector<std::size_t> labels_;
  std::size_t k_ = 0;
};

}  // namespace blockfolio
