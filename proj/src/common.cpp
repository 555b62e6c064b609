#include <dsurf/common.hpp>
#include <dsurf/parallel.hpp>

#include <atomic>

namespace dsurf {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Structural: return "structural-error";
    case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::Numeric: return "numeric-error";
    case ErrorKind::Shape: return "shape-error";
    case ErrorKind::Argument: return "argument-error";
    case ErrorKind::OptimizationFailure: return "optimization-failure";
    case ErrorKind::ProjectionFailure: return "projection-failure";
    case ErrorKind::Config: return "config-error";
    case ErrorKind::Io: return "io-error";
    }
    return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message)
    , m_kind(kind)
    , m_message(message)
{}

void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned n)
{
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    g_threads.store(n);
}

unsigned thread_count()
{
    return g_threads.load();
}

} // namespace dsurf
