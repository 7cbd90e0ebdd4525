#pragma once

#include <stdexcept>
#include <string>

namespace carleman_lab {

// Base for every error raised by the library. name() is the guard label
// printed by the CLI summary.
class LabError : public std::runtime_error {
public:
    LabError(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}
    const std::string& name() const { return name_; }
    virtual bool numerical_guard() const { return false; }

private:
    std::string name_;
};

#define CARLEMAN_LAB_ERROR(Type, guard)                                     \
    class Type : public LabError {                                         \
    public:                                                                \
        explicit Type(const std::string& what) : LabError(#Type, what) {}  \
        bool numerical_guard() const override { return guard; }            \
    };

CARLEMAN_LAB_ERROR(ConfigError, false)
CARLEMAN_LAB_ERROR(EmptyRegion, false)
CARLEMAN_LAB_ERROR(DegenerateBand, false)
CARLEMAN_LAB_ERROR(GridTooSmall, false)
CARLEMAN_LAB_ERROR(LevelMismatch, false)
CARLEMAN_LAB_ERROR(PreconditionViolated, false)
CARLEMAN_LAB_ERROR(InsufficientSweep, false)
CARLEMAN_LAB_ERROR(SupportViolation, true)
CARLEMAN_LAB_ERROR(SupportTooWide, true)
CARLEMAN_LAB_ERROR(NumericalOverflow, true)
CARLEMAN_LAB_ERROR(CflViolation, true)
CARLEMAN_LAB_ERROR(NonFiniteDetected, true)

#undef CARLEMAN_LAB_ERROR

} // namespace carleman_lab
