#pragma once

#include <stdexcept>
#include <string>

namespace knotloop {

// Every failure is an exception derived from Error. The category decides
// the CLI exit code.
enum class ErrorCategory { Input, Solver, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), cat_(cat), kind_(kind) {}
    ErrorCategory category() const { return cat_; }
    const std::string& kind() const { return kind_; }

private:
    ErrorCategory cat_;
    std::string kind_;
};

#define KNOTLOOP_ERROR(Name, Cat)                                        \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what)                           \
            : Error(ErrorCategory::Cat, #Name, what) {}                  \
    };

KNOTLOOP_ERROR(NotHyperbolic, Input)
KNOTLOOP_ERROR(InvalidTwist, Input)

KNOTLOOP_ERROR(EmptyPotential, Solver)
KNOTLOOP_ERROR(NoGeometricSolution, Solver)
KNOTLOOP_ERROR(SingularHessian, Solver)
KNOTLOOP_ERROR(BranchCut, Solver)
KNOTLOOP_ERROR(Degenerate, Solver)
KNOTLOOP_ERROR(Diverged, Solver)
KNOTLOOP_ERROR(SingularJacobian, Solver)
KNOTLOOP_ERROR(Infeasible, Solver)
KNOTLOOP_ERROR(NoIntegerSolution, Solver)
KNOTLOOP_ERROR(NonAlternatingSegment, Solver)
KNOTLOOP_ERROR(FlatteningFailure, Solver)
KNOTLOOP_ERROR(DegenerateShape, Solver)
KNOTLOOP_ERROR(SingularMatrix, Solver)
KNOTLOOP_ERROR(EliminationCycle, Solver)

KNOTLOOP_ERROR(SchemaError, Io)
KNOTLOOP_ERROR(IoError, Io)

#undef KNOTLOOP_ERROR

}  // namespace knotloop
