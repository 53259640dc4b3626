#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace latred {

// Iteration cap or bracket expansion cap hit inside a numerical solver.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Enumeration walked past its node budget.  Carries how far it got so the
// caller can report partial progress.
struct budget_error : std::runtime_error {
    std::uint64_t nodes_visited;
    budget_error(const std::string& msg, std::uint64_t nodes)
        : std::runtime_error(msg), nodes_visited(nodes) {}
};

// Requested parameters violate a precondition of the reduction being built
// (empty interval, no admissible prime, negative width, ...).
struct infeasible_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Malformed instance file or CLI value.
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A vector claimed to be in a lattice is not an integer combination of the
// basis (or lies outside its span).
struct not_lattice_vector_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Wraps a failure inside a multi-stage pipeline with the stage name.
struct stage_error : std::runtime_error {
    std::string stage;
    stage_error(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what), stage(where) {}
};

}  // namespace latred
