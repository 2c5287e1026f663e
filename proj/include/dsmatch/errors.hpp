#ifndef DSMATCH_ERRORS_HPP
#define DSMATCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dsmatch {

// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Group closure grew past the configured element cap.
struct OrderExceeded : Error {
    explicit OrderExceeded(const std::string& what) : Error(what) {}
};

// An operation with a hard size cap was asked to run above it.
struct DegreeTooLarge : Error {
    explicit DegreeTooLarge(const std::string& what) : Error(what) {}
};

// Matrix or permutation sizes do not agree.
struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

// A signature vector is not constant on the orbit classes it was paired with.
struct InconsistentSignature : Error {
    explicit InconsistentSignature(const std::string& what) : Error(what) {}
};

// A matrix that must be fixed by the group action is not.
struct NotInvariant : Error {
    explicit NotInvariant(const std::string& what) : Error(what) {}
};

// An orbit was required to have length equal to the group order and does not.
struct NotFullOrbit : Error {
    explicit NotFullOrbit(const std::string& what) : Error(what) {}
};

// The supplied generators do not describe a realizable symmetry group.
struct NotSymmetryGroup : Error {
    explicit NotSymmetryGroup(const std::string& what) : Error(what) {}
};

// A starting point violates the feasibility assumptions of a face walk.
struct InfeasibleState : Error {
    explicit InfeasibleState(const std::string& what) : Error(what) {}
};

// A face step could not remove any support entry; tolerances are inconsistent.
struct StalledFace : Error {
    explicit StalledFace(const std::string& what) : Error(what) {}
};

// An operation's documented precondition failed at runtime.
struct PreconditionFailed : Error {
    explicit PreconditionFailed(const std::string& what) : Error(what) {}
};

// An extreme point that was required to be a permutation is fractional.
struct NonPermutationExtreme : Error {
    explicit NonPermutationExtreme(const std::string& what) : Error(what) {}
};

// An interior-point iteration left the domain of the barrier.
struct BarrierDiverged : Error {
    explicit BarrierDiverged(const std::string& what) : Error(what) {}
};

// A dense spectral computation was asked to run above its size cap.
struct DimensionCap : Error {
    explicit DimensionCap(const std::string& what) : Error(what) {}
};

// A file could not be read or has malformed contents.
struct IoError : Error {
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace dsmatch

#endif
