#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "introspect/data.hpp"

namespace introspect {

struct SplitSpec {
  int n_in_dist = 5000;
  int n_per_misclass = 700;
  double val_fraction = 0.1;
  int n_test_per_dataset = 2000;
  std::uint64_t seed = 0;
};

/// Where a split member came from: its tag and its index within that tag's
/// source pool. Lets tests assert train/test disjointness directly.
struct SourceRef {
  DatasetTag tag;
  std::size_t pool_index;

  auto operator<=>(const SourceRef&) const = default;
};

struct DetectionSplit {
  std::vector<LabeledExample> train, val, test;
  std::vector<SourceRef> train_refs, val_refs, test_refs;
};

/// Draws, per tag, n examples for train+val (n_in_dist for the
/// in-distribution pool, n_per_misclass otherwise) and n_test_per_dataset
/// for test, all without replacement from a seeded shuffle, so train/val and
/// test never share a pool member. Validation is stratified per tag with
/// round(n * val_fraction) members. Throws a shortfall error naming the tag
/// whose pool is too small.
DetectionSplit assemble_detection_split(const std::map<DatasetTag, std::vector<LabeledExample>>& sources,
                                        const SplitSpec& spec);

}  // namespace introspect
