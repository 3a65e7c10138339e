#pragma once

#include <stdexcept>
#include <string>

namespace earl {

// Base for all domain errors raised by the lab. Usage errors (bad arguments
// to a function the caller controls) throw std::invalid_argument instead.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define EARL_ERROR_TYPE(Name)                                                 \
    class Name : public Error {                                               \
    public:                                                                    \
        using Error::Error;                                                    \
    }

// timeline
EARL_ERROR_TYPE(KeyNotInContext);
EARL_ERROR_TYPE(ContextTooSmall);
EARL_ERROR_TYPE(EmptySelection);
EARL_ERROR_TYPE(SelectionOutsideContext);

// env
EARL_ERROR_TYPE(SelectionBudgetExhausted);
EARL_ERROR_TYPE(StepOnTerminalState);

// reward
EARL_ERROR_TYPE(NonTerminalTrajectory);

// synth
EARL_ERROR_TYPE(InfeasiblePlacement);
EARL_ERROR_TYPE(MalformedAnnotation);
EARL_ERROR_TYPE(MalformedRecord);

// policy / trainer
EARL_ERROR_TYPE(EmptyObservation);
EARL_ERROR_TYPE(EmptyDataset);
EARL_ERROR_TYPE(DegenerateBatch);

#undef EARL_ERROR_TYPE

}  // namespace earl
