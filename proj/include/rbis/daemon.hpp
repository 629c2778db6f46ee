// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

#include "rbis/config.hpp"

namespace rbis {

/// Broadcast SYNC (and FOLLOW_UP on port+1) every beacon interval, reading
/// the local monotonic clock as both TSF (microseconds) and timestamp source
/// (nanoseconds). Returns a process exit code; diagnostics go to `log`.
int run_master_daemon(const DaemonConfig& config, std::ostream& log);

/// Receive SYNC/FOLLOW_UP, pair tuples, run estimator and servo against a
/// logical overlay clock, and log one line per tuple. Host-clock steering
/// happens only with config.steer_host (the guarded CLI flag). Returns a
/// process exit code.
int run_slave_daemon(const DaemonConfig& config, std::ostream& log);

} // namespace rbis
