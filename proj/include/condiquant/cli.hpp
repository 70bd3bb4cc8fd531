#pragma once

namespace cq {

/// Full command-line surface (condition | quantize | analyze | simulate).
/// Returns the process exit status: 0 success, 1 usage error, 2 numerical
/// or I/O failure.
int run_cli(int argc, const char* const* argv);

}  // namespace cq
