#pragma once

#include <stdexcept>
#include <string>

namespace pooledloss {

// Invalid configuration or violated input contracts. Mapped to exit code 2
// by the command line driver.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure detected at runtime (blowups, singular systems,
// ill-conditioned propagators). Mapped to exit code 3 by the driver.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define POOLEDLOSS_CONFIG_ERROR(NAME)                                        \
    class NAME : public ConfigError {                                        \
    public:                                                                  \
        explicit NAME(const std::string& msg = #NAME) : ConfigError(msg) {}  \
    }

#define POOLEDLOSS_NUMERICAL_ERROR(NAME)                                       \
    class NAME : public NumericalError {                                       \
    public:                                                                    \
        explicit NAME(const std::string& msg = #NAME) : NumericalError(msg) {} \
    }

POOLEDLOSS_CONFIG_ERROR(NegativeParameter);
POOLEDLOSS_CONFIG_ERROR(BadWeights);
POOLEDLOSS_CONFIG_ERROR(EmptyPortfolio);
POOLEDLOSS_CONFIG_ERROR(NonFiniteInput);
POOLEDLOSS_CONFIG_ERROR(BadGrid);
POOLEDLOSS_CONFIG_ERROR(GridMismatch);
POOLEDLOSS_CONFIG_ERROR(HorizonOffGrid);
POOLEDLOSS_CONFIG_ERROR(TimeOffGrid);
POOLEDLOSS_CONFIG_ERROR(DimensionMismatch);
POOLEDLOSS_CONFIG_ERROR(MomentVectorTooShort);
POOLEDLOSS_CONFIG_ERROR(RequiresZeroBetaS);
POOLEDLOSS_CONFIG_ERROR(MismatchedPaths);
POOLEDLOSS_CONFIG_ERROR(BadLevel);
POOLEDLOSS_CONFIG_ERROR(DegenerateInputs);

POOLEDLOSS_NUMERICAL_ERROR(NonFiniteCoefficient);
POOLEDLOSS_NUMERICAL_ERROR(NotSymmetric);
POOLEDLOSS_NUMERICAL_ERROR(ExcessiveNegativity);
POOLEDLOSS_NUMERICAL_ERROR(SingularObservedBlock);
POOLEDLOSS_NUMERICAL_ERROR(UnstableBlowup);
POOLEDLOSS_NUMERICAL_ERROR(IllConditionedPsi);

#undef POOLEDLOSS_CONFIG_ERROR
#undef POOLEDLOSS_NUMERICAL_ERROR

}  // namespace pooledloss
