#pragma once

namespace logreaper::crashpoint {

// Fault-injection hook for crash-recovery tests. When the environment
// variable LOGREAPER_CRASHPOINT is set to "<name>" or "<name>:<n>", the
// n-th call to check(name) terminates the process immediately with
// _exit(137), simulating a kill at that instant. Unset, the check is a
// single branch on a cached flag.
void check(const char* name) noexcept;

bool armed() noexcept;

}  // namespace logreaper::crashpoint
