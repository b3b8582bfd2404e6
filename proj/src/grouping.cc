#include "fedtx/grouping.hpp"

namespace fedtx {

WriteGroups groupByAtomicityUnit(std::span<const ConditionalWrite> writes, const UnitResolver& unit_of) {
  return groupByUnit<ConditionalWrite>(writes, [](const ConditionalWrite& w) -> const FullKey& { return w.key; },
                                       unit_of);
}

bool onePhaseEligible(std::size_t group_count, bool serializable_mode, bool validation_required) {
  return group_count == 1 && !serializable_mode && !validation_required;
}

}  // namespace fedtx
