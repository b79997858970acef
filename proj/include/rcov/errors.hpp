// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace rcov {

/// Malformed input file (grid header, diagram block, CSV row, ...).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Contract violation on otherwise well-formed data (point outside extent,
/// shape mismatch, non-positive distance, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Wire-format violation or unexpected message sequence.
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Failure to reach a peer (dial, bind, or accept).
struct ConnectError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Attempt to create a result table that already exists in this run.
struct StoreConflictError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rcov
