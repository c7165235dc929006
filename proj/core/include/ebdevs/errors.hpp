#pragma once

#include <stdexcept>
#include <string>

namespace ebdevs {

// Base class for every error raised by the simulation kit.
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid model structure, duplicate names, bad experiment configuration.
struct ConfigError : SimError {
    using SimError::SimError;
};

// Invalid numeric parameter passed to a distribution or operation.
struct ParamError : SimError {
    using SimError::SimError;
};

// A reachable state produced a negative time advance.
struct LegitimacyError : SimError {
    using SimError::SimError;
};

// A message was routed towards a model or port that does not exist.
struct RoutingError : SimError {
    using SimError::SimError;
};

// A structure change referenced a missing model or would corrupt the graph.
struct StructureError : SimError {
    using SimError::SimError;
};

// A coupling connects port kinds that cannot be connected.
struct CouplingError : StructureError {
    using StructureError::StructureError;
};

// An unknown property tag was passed to a v_down query.
struct QueryError : SimError {
    using SimError::SimError;
};

// Statistics errors: undefined statistic, bad fit input, ragged shapes.
struct StatError : SimError {
    using SimError::SimError;
};

// Weighted sampling asked for more items than the positive-weight pool holds.
struct SamplingError : SimError {
    using SimError::SimError;
};

// SVG plotting errors: schema mismatch, empty input.
struct PlotError : SimError {
    using SimError::SimError;
};

}  // namespace ebdevs
