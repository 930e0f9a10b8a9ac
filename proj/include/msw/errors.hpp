#ifndef MSW_ERRORS_HPP_
#define MSW_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace msw
{

enum class ErrorKind
{
    domain,           // point off the manifold or outside a chart
    search,           // Newton search for a critical point did not converge
    degeneracy,       // Hessian has a near-zero eigenvalue
    inconsistency,    // model data contradicts itself (signature mismatch, ...)
    integration,      // step-size underflow or escaped trajectory
    resolution,       // basin boundary could not be resolved on a link
    index,            // relative index precondition violated
    ring,             // integer coefficients requested on a nonorientable model
    orientation,      // sign ambiguity or inconsistent orientation convention
    transversality,   // connection between critical points of equal index
    construction,     // tubular neighborhoods or epsilon could not be built
    perturbation,     // perturbed function has wrong critical data
    bookkeeping,      // chain decomposition could not attribute a generator
    io,
    internal,
};

inline const char* to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::search: return "search";
    case ErrorKind::degeneracy: return "degeneracy";
    case ErrorKind::inconsistency: return "inconsistency";
    case ErrorKind::integration: return "integration";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::index: return "index";
    case ErrorKind::ring: return "ring";
    case ErrorKind::orientation: return "orientation";
    case ErrorKind::transversality: return "transversality";
    case ErrorKind::construction: return "construction";
    case ErrorKind::perturbation: return "perturbation";
    case ErrorKind::bookkeeping: return "bookkeeping";
    case ErrorKind::io: return "io";
    case ErrorKind::internal: return "internal";
    }
    return "unknown";
}

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind), message_(what)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    /// Message without the kind prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

/// Error raised inside a pipeline run, tagged with the stage that failed.
class StageError : public Error
{
public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.kind(), "[" + stage + "] " + cause.message()), stage_(std::move(stage))
    {
    }

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace msw

#endif // MSW_ERRORS_HPP_
