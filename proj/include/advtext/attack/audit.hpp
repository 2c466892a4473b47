#pragma once

#include <string>
#include <vector>

#include "advtext/attack/engine.hpp"

namespace advtext {

// Re-validates a successful log entry by querying the oracles afresh:
// the label flips, similarity(original, adversarial) clears the threshold,
// every substituted word keeps its coarse POS in context, and the two
// texts differ only at the substituted words. Returns one message per
// violated property; empty means sound.
std::vector<std::string> audit_success(const AttackLogEntry& entry, const OracleSet& oracles,
                                       const AttackConfig& config,
                                       const StopwordList& stopwords);

}  // namespace advtext
