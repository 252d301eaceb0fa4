#pragma once

#include <stdexcept>
#include <string>

namespace curvem {

// Base class for all solver errors; specific types below so callers can
// distinguish geometric defects from algebraic ones.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define CURVEM_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& msg)                      \
            : Error(std::string(#Name) + ": " + msg) {}            \
    }

CURVEM_DEFINE_ERROR(DegenerateEdge);
CURVEM_DEFINE_ERROR(OpenLoop);
CURVEM_DEFINE_ERROR(NegativeArea);
CURVEM_DEFINE_ERROR(StarPointInvalid);
CURVEM_DEFINE_ERROR(IndexOutOfRange);
CURVEM_DEFINE_ERROR(SingularBasis);
CURVEM_DEFINE_ERROR(NotSPD);
CURVEM_DEFINE_ERROR(SingularGram);
CURVEM_DEFINE_ERROR(RankDeficientB);
CURVEM_DEFINE_ERROR(InvertedCell);
CURVEM_DEFINE_ERROR(TangentialIntersection);
CURVEM_DEFINE_ERROR(TooManyCrossings);
CURVEM_DEFINE_ERROR(TopologyError);
CURVEM_DEFINE_ERROR(ParseError);
CURVEM_DEFINE_ERROR(EmptyNaturalBoundary);
CURVEM_DEFINE_ERROR(SingularSystem);

#undef CURVEM_DEFINE_ERROR

}  // namespace curvem
