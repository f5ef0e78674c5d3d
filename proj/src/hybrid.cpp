#include "sic/hybrid.hpp"

#include <cmath>

#include "sic/kmeans.hpp"

namespace sic {

BinaryClassification improve_classification(const ReturnMatrix& ret,
                                            const FundamentalClassification& fundamental,
                                            int iter_max, int num_try, std::uint64_t seed) {
    ret.validate();
    fundamental.validate();
    if (fundamental.size() != ret.num_stocks())
        throw DataError("fundamental classification covers " + std::to_string(fundamental.size()) +
                        " stocks, panel has " + std::to_string(ret.num_stocks()));

    const int n = ret.num_stocks();
    const int d = ret.num_obs();
    const std::uint64_t stride = static_cast<std::uint64_t>(num_try) + 1;
    std::uint64_t calls = 0;

    std::vector<int> out(static_cast<std::size_t>(n), -1);
    int next_label = 0;

    for (int a = 0; a < fundamental.num_groups(); ++a) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (fundamental.labels[static_cast<std::size_t>(i)] == a) members.push_back(i);

        const long long kappa = std::llround(static_cast<double>(members.size()) /
                                             static_cast<double>(d - 1));
        if (kappa < 2) {
            for (int i : members) out[static_cast<std::size_t>(i)] = next_label;
            ++next_label;
            continue;
        }

        Eigen::MatrixXd sub(static_cast<int>(members.size()), d);
        std::vector<std::string> sub_ids;
        sub_ids.reserve(members.size());
        for (std::size_t j = 0; j < members.size(); ++j) {
            sub.row(static_cast<int>(j)) = ret.values.row(members[j]);
            sub_ids.push_back(ret.stock_ids[static_cast<std::size_t>(members[j])]);
        }
        const BinaryClassification split =
            aggregate_samplings(sub, static_cast<int>(kappa), iter_max, num_try,
                                seed + calls * stride, /*demean=*/false, &sub_ids);
        ++calls;
        for (std::size_t j = 0; j < members.size(); ++j)
            out[static_cast<std::size_t>(members[j])] = next_label + split.label(static_cast<int>(j));
        next_label += split.num_clusters();
    }

    return BinaryClassification(out);
}

} // namespace sic
