// hybrid.hpp
// Statistical refinement of a fundamental classification's most granular
// level: oversized sub-industries are split by consensus clustering.

#pragma once

#include <cstdint>

#include "sic/classification.hpp"
#include "sic/returns.hpp"

namespace sic {

/// For each sub-industry A with N_A stocks, kappa_A = Round(N_A / (d-1));
/// groups with kappa_A < 2 pass through unchanged, larger ones are clustered
/// into kappa_A target clusters (aggregated samplings, no demeaning, fewer
/// clusters accepted when the aggregation collapses). Output clusters appear
/// in input column order, pass-through and split blocks interleaved, so the
/// result always refines the input. Each split consumes num_try+1 seeds from
/// a running schedule starting at seed.
BinaryClassification improve_classification(const ReturnMatrix& ret,
                                            const FundamentalClassification& fundamental,
                                            int iter_max, int num_try, std::uint64_t seed);

} // namespace sic
