#include "vsir/nce.hpp"

#include <stdexcept>

namespace vsir {

Negatives sample_negatives(std::size_t m, std::size_t z, std::size_t num_objects, Rng& rng) {
  if (z < 1) throw std::invalid_argument("need at least one negative sample");
  if (num_objects < 1) throw std::invalid_argument("no objects to sample negatives from");
  Negatives negs;
  negs.z = z;
  negs.ids.resize(m * z);
  std::uniform_int_distribution<std::size_t> pick(0, num_objects - 1);
  for (auto& id : negs.ids) id = pick(rng);
  return negs;
}

}  // namespace vsir
