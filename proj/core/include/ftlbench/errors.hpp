#pragma once

#include <stdexcept>
#include <string>

namespace ftlbench {

// Bad user input: geometry, config keys, workload specs.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Address outside the device, or a PPN/VPPN out of range.
struct AddressError : std::out_of_range {
  explicit AddressError(const std::string& msg) : std::out_of_range(msg) {}
};

// Malformed trace input; carries the 1-based line number in the message.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// The FTL asked the flash array to do something physically illegal
// (program out of order, erase a block with live data, ...). Always a bug
// in the FTL under test, so the simulation aborts instead of recovering.
struct DeviceRuleViolation : std::logic_error {
  explicit DeviceRuleViolation(const std::string& msg) : std::logic_error(msg) {}
};

// Internal bookkeeping contradiction, e.g. a bitmap bit set with no
// covering model piece.
struct InternalError : std::logic_error {
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

// The device genuinely ran out of space even after garbage collection.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// percentile() over an empty sample set and similar misuse.
struct StatisticsError : std::invalid_argument {
  explicit StatisticsError(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace ftlbench
