#ifndef SCENEGEN_ACCIDENT_DATA_HPP
#define SCENEGEN_ACCIDENT_DATA_HPP

#include "scenegen/bayesnet.hpp"
#include "scenegen/csv.hpp"
#include "scenegen/patterns.hpp"

namespace scenegen {

/// Draw a synthetic accident dataset from a reference net.
inline Dataset synthesize_dataset(const CausalBayesNet& net, std::size_t n, std::uint64_t seed) {
    return sample(net, n, seed);
}

}  // namespace scenegen

#endif
