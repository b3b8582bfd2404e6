#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fedtx/adapter.hpp"
#include "fedtx/key.hpp"

namespace fedtx {

template <class T>
struct Group {
  GroupKey key;
  std::vector<T> items;
};

using WriteGroups = std::vector<Group<ConditionalWrite>>;
using UnitResolver = std::function<AtomicityUnit(const FullKey&)>;

/// Buckets items under deriveGroupKey(key, unitOf(key)). Groups come out
/// sorted by GroupKey text; items keep their input order inside a group.
template <class T, class KeyOf>
std::vector<Group<T>> groupByUnit(std::span<const T> items, KeyOf key_of, const UnitResolver& unit_of) {
  std::map<std::string, Group<T>> buckets;
  for (const auto& item : items) {
    const FullKey& key = key_of(item);
    GroupKey gk = deriveGroupKey(key, unit_of(key));
    auto text = gk.toString();
    auto it = buckets.find(text);
    if (it == buckets.end()) it = buckets.emplace(std::move(text), Group<T>{std::move(gk), {}}).first;
    it->second.items.push_back(item);
  }
  std::vector<Group<T>> out;
  out.reserve(buckets.size());
  for (auto& [_, g] : buckets) out.push_back(std::move(g));
  return out;
}

WriteGroups groupByAtomicityUnit(std::span<const ConditionalWrite> writes, const UnitResolver& unit_of);

/// Exactly one group and nothing left to validate after prepare.
bool onePhaseEligible(std::size_t group_count, bool serializable_mode, bool validation_required);

}  // namespace fedtx
