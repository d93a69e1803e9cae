#pragma once

namespace qj::env {

// Reward-gating episode segments: on the ground before take-off, airborne,
// and from touchdown to the end of the episode. Transitions only ever run
// Stance -> Flight -> Landing; Landing is absorbing within an episode.
enum class Phase { Stance, Flight, Landing };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::Stance: return "stance";
    case Phase::Flight: return "flight";
    case Phase::Landing: return "landing";
  }
  return "?";
}

}  // namespace qj::env
