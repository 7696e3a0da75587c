#pragma once

// Synthetic projects of configurable size, used to measure how comparison
// time scales with the number of created pairs.

#include <cstddef>
#include <cstdint>

#include "iecclone/model.hpp"

namespace iecclone {

struct GeneratorOptions {
  std::size_t pous = 4;
  std::size_t variablesPerPou = 8;
  // Top-level statements per ST body; nested statements come on top.
  std::size_t statementsPerPou = 12;
  std::size_t maxNesting = 2;
  // Every fourth POU is an SFC and every fourth an LD body when set;
  // otherwise all bodies are ST.
  bool mixLanguages = true;
  std::uint64_t seed = 1;
};

/// Deterministic in the options. The result satisfies checkInvariants and
/// round-trips through writeProject/parseProject.
Project generateProject(const GeneratorOptions& options);

}  // namespace iecclone
