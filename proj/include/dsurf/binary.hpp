#pragma once

#include <dsurf/common.hpp>

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace dsurf::io::detail {

static_assert(std::endian::native == std::endian::little, "binary codecs assume a little-endian host");

template <typename T>
void put(std::ostream& out, T value)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what)
{
    char buf[sizeof(T)];
    if (!in.read(buf, sizeof(T))) fail(ErrorKind::Io, std::string("truncated input while reading ") + what);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

inline void expect_magic(std::istream& in, const char (&magic)[5])
{
    char buf[4];
    if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
        fail(ErrorKind::Io, std::string("bad magic, expected ") + magic);
    }
}

} // namespace dsurf::io::detail
