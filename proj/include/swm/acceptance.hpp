#pragma once

#include <ostream>

namespace swm {

/// Run every acceptance criterion, printing one pass/fail line per
/// criterion. Returns the number of failures (0 = all green).
int run_acceptance(std::ostream& out);

} // namespace swm
