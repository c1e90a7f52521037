// Typed error hierarchy shared by all symseg components.
#ifndef SYMSEG_ERRORS_HPP
#define SYMSEG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace symseg {

// Base class for every error this library throws on purpose. Callers that
// want "parse anything without crashing" semantics catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SYMSEG_DEFINE_ERROR(NAME)                                            \
    class NAME : public Error {                                              \
    public:                                                                  \
        using Error::Error;                                                  \
    }

// Ingestion
SYMSEG_DEFINE_ERROR(MalformedFile);
SYMSEG_DEFINE_ERROR(UnsupportedFormat);
SYMSEG_DEFINE_ERROR(TempoChange);
SYMSEG_DEFINE_ERROR(MissingColumn);
SYMSEG_DEFINE_ERROR(IndexOutOfRange);
SYMSEG_DEFINE_ERROR(TooFewNotes);

// Graph / matrices
SYMSEG_DEFINE_ERROR(CapacityExceeded);
SYMSEG_DEFINE_ERROR(MatrixTooSmall);

// Changepoint detection
SYMSEG_DEFINE_ERROR(EmptySegment);
SYMSEG_DEFINE_ERROR(WindowTooLarge);

// Norm method
SYMSEG_DEFINE_ERROR(TooFewCandidates);

// Pipeline / evaluation / sweep
SYMSEG_DEFINE_ERROR(InvalidParams);
SYMSEG_DEFINE_ERROR(EmptyReference);
SYMSEG_DEFINE_ERROR(UnpairedFile);
SYMSEG_DEFINE_ERROR(EmptyTable);

#undef SYMSEG_DEFINE_ERROR

} // namespace symseg

#endif // SYMSEG_ERRORS_HPP
