#pragma once

namespace ssflab::cli {

/// Entry point of ssf-lab. Returns 0 on success, 2 on invalid input and 3 on
/// numerical or output failure; diagnostics go to stderr.
int run(int argc, char** argv);

}  // namespace ssflab::cli
