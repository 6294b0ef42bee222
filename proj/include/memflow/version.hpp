#pragma once

namespace memflow {

// Embedded in every file format header.  Deliberately contains no build
// timestamp: artifact bytes must be reproducible across runs.
inline constexpr const char* kToolVersion = "memflow 0.1.0";

}  // namespace memflow
