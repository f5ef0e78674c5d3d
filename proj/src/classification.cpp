#include "sic/classification.hpp"

#include <algorithm>

namespace sic {

BinaryClassification::BinaryClassification(std::vector<int> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw DataError("classification over zero stocks");
    int max_label = -1;
    for (int l : labels_) {
        if (l < 0) throw DataError("negative cluster label");
        max_label = std::max(max_label, l);
    }
    // Compact in increasing label order so empty ids disappear without
    // disturbing the relative order of the rest.
    std::vector<int> remap(static_cast<std::size_t>(max_label) + 1, -1);
    for (int l : labels_) remap[static_cast<std::size_t>(l)] = 0;
    int next = 0;
    for (auto& r : remap)
        if (r == 0) r = next++;
    for (auto& l : labels_) l = remap[static_cast<std::size_t>(l)];
    k_ = next;
}

Eigen::MatrixXd BinaryClassification::membership() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size(), k_);
    for (int i = 0; i < size(); ++i) m(i, labels_[static_cast<std::size_t>(i)]) = 1.0;
    return m;
}

std::vector<std::vector<int>> BinaryClassification::clusters() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(k_));
    for (int i = 0; i < size(); ++i) out[static_cast<std::size_t>(labels_[static_cast<std::size_t>(i)])].push_back(i);
    return out;
}

std::vector<int> BinaryClassification::cluster_sizes() const {
    std::vector<int> sizes(static_cast<std::size_t>(k_), 0);
    for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

BinaryClassification BinaryClassification::canonicalized() const {
    std::vector<int> remap(static_cast<std::size_t>(k_), -1);
    int next = 0;
    std::vector<int> out(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        int& slot = remap[static_cast<std::size_t>(labels_[i])];
        if (slot < 0) slot = next++;
        out[i] = slot;
    }
    return BinaryClassification(std::move(out));
}

bool refines(const BinaryClassification& fine, const BinaryClassification& coarse) {
    if (fine.size() != coarse.size()) return false;
    // Map each fine cluster to the coarse label of its first member; any
    // member disagreeing breaks refinement.
    std::vector<int> image(static_cast<std::size_t>(fine.num_clusters()), -1);
    for (int i = 0; i < fine.size(); ++i) {
        int& img = image[static_cast<std::size_t>(fine.label(i))];
        if (img < 0)
            img = coarse.label(i);
        else if (img != coarse.label(i))
            return false;
    }
    return true;
}

std::vector<int> MultilevelClassification::cluster_counts() const {
    std::vector<int> counts;
    counts.reserve(levels.size());
    for (const auto& level : levels) counts.push_back(level.num_clusters());
    return counts;
}

void MultilevelClassification::validate() const {
    if (levels.empty()) throw DataError("multilevel classification with no levels");
    for (std::size_t mu = 1; mu < levels.size(); ++mu) {
        if (levels[mu].size() != levels[0].size())
            throw DataError("levels cover different stock counts");
        if (!refines(levels[mu - 1], levels[mu]))
            throw DataError("level " + std::to_string(mu) + " does not nest inside level " +
                            std::to_string(mu + 1));
        if (levels[mu].num_clusters() > levels[mu - 1].num_clusters())
            throw DataError("cluster counts increase with level");
    }
}

void FundamentalClassification::validate() const {
    if (labels.empty()) throw DataError("fundamental classification over zero stocks");
    std::vector<int> counts(label_names.size(), 0);
    for (int l : labels) {
        if (l < 0 || l >= num_groups())
            throw DataError("fundamental label out of range");
        ++counts[static_cast<std::size_t>(l)];
    }
    for (std::size_t a = 0; a < counts.size(); ++a)
        if (counts[a] == 0)
            throw DataError("empty sub-industry: " + label_names[a]);
}

} // namespace sic
