#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace oransim {

// Strongly typed index. `value` is the dense 0-based index into the owning
// container, so lookups stay plain vector indexing.
template <class Tag>
struct Id {
  std::uint32_t value{};

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  constexpr auto operator<=>(const Id&) const = default;

  friend std::ostream& operator<<(std::ostream& os, Id id) { return os << id.value; }
};

using CellId = Id<struct CellTag>;
using UeId = Id<struct UeTag>;
using OperatorId = Id<struct OperatorTag>;

// Monotone counters; not indices.
using ContractId = std::uint64_t;
using RequestId = std::uint64_t;
using TxId = std::uint64_t;
using BlockId = std::uint64_t;

}  // namespace oransim

template <class Tag>
struct std::hash<oransim::Id<Tag>> {
  std::size_t operator()(oransim::Id<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
