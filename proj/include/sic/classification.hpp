// classification.hpp
// Partition containers: single-level binary classifications, nested
// multilevel classifications and externally supplied fundamental taxonomies.

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sic/types.hpp"

namespace sic {

/// One-hot stock -> cluster partition. Stored as a dense label vector with
/// 0-based contiguous cluster ids; the membership matrix is derived on
/// demand. Construction compacts labels (drops unused ids) while preserving
/// their relative order, so no column is ever empty.
class BinaryClassification {
public:
    BinaryClassification() = default;

    /// Builds from raw labels (any non-negative ids). Gaps are compacted in
    /// increasing id order; relative order of surviving clusters is kept.
    explicit BinaryClassification(std::vector<int> labels);

    int size() const { return static_cast<int>(labels_.size()); }
    int num_clusters() const { return k_; }
    int label(int i) const { return labels_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& labels() const { return labels_; }

    /// N x K dense 0/1 membership matrix.
    Eigen::MatrixXd membership() const;

    /// Member indices per cluster, in stock order.
    std::vector<std::vector<int>> clusters() const;

    std::vector<int> cluster_sizes() const;

    /// Copy with clusters renumbered in order of first appearance over the
    /// stock index; the labeling used by all file writers.
    BinaryClassification canonicalized() const;

    bool operator==(const BinaryClassification& other) const {
        return labels_ == other.labels_;
    }

private:
    std::vector<int> labels_;
    int k_ = 0;
};

/// Whether partition `fine` refines partition `coarse`: every fine cluster
/// lies inside a single coarse cluster.
bool refines(const BinaryClassification& fine, const BinaryClassification& coarse);

/// Ordered list of nested partitions, most granular first.
struct MultilevelClassification {
    std::vector<BinaryClassification> levels;

    int num_levels() const { return static_cast<int>(levels.size()); }
    int num_stocks() const { return levels.empty() ? 0 : levels.front().size(); }
    std::vector<int> cluster_counts() const;

    /// Checks nesting of consecutive levels and non-increasing cluster
    /// counts. Throws DataError on violation.
    void validate() const;
};

/// Most granular level of an external (fundamental) taxonomy.
struct FundamentalClassification {
    std::vector<int> labels;              // 0-based index into label_names
    std::vector<std::string> label_names; // sub-industry names, column order

    int size() const { return static_cast<int>(labels.size()); }
    int num_groups() const { return static_cast<int>(label_names.size()); }

    /// Every stock labeled exactly once with an in-range id, no empty group.
    void validate() const;
};

} // namespace sic
