#pragma once

#include <stdexcept>
#include <string>

namespace tvs {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : Error {
    using Error::Error;
};

struct NonPositiveTemperature : Error {
    using Error::Error;
};

struct QuadratureFailure : Error {
    using Error::Error;
};

struct PoissonNoConvergence : Error {
    using Error::Error;
};

// Raised when theta <= 0 or det F <= 0 after a time step; carries the cell.
struct PositivityLost : Error {
    std::string field;
    int i = -1, j = -1;
    PositivityLost(std::string field_, int i_, int j_)
        : Error("positivity lost in field '" + field_ + "' at cell (" +
                std::to_string(i_) + "," + std::to_string(j_) + ")"),
          field(std::move(field_)), i(i_), j(j_) {}
};

struct CflViolation : Error {
    using Error::Error;
};

struct OutOfRange : Error {
    using Error::Error;
};

struct BlowupDetected : Error {
    using Error::Error;
};

struct IncompatibleScenario : Error {
    using Error::Error;
};

struct ConfigParse : Error {
    using Error::Error;
};

} // namespace tvs
