#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "impulseflow/impulsive_system.hpp"

namespace impulseflow {

/// Named numeric overrides; scalars are one-element lists.
using Overrides = std::map<std::string, std::vector<double>>;

struct FixtureDescriptor {
    std::string name;
    Overrides defaults;
    std::string doc;
};

const std::vector<FixtureDescriptor>& fixture_catalog();

/// Builds and validates a builtin system. Throws PreconditionError for
/// unknown names, unknown override keys, or parameters out of range.
SystemSpec build_fixture(std::string_view name, const Overrides& overrides = {}, const IntegratorConfig& cfg = {});

/// Start state used by the CLI when the config gives none.
StateVector default_initial_state(const SystemSpec& sys);

/// Uniform random points of the admissible region (a bounded box of the
/// octant for prey_predator).
std::vector<StateVector> sample_admissible(const SystemSpec& sys, std::size_t n, std::uint64_t seed);

/// Candidate cloud for separated-set construction. The suspension uses a
/// uniform angular grid on the bottom circle; other systems use
/// sample_admissible.
std::vector<StateVector> entropy_candidates(const SystemSpec& sys, std::size_t n, std::uint64_t seed);

}  // namespace impulseflow
