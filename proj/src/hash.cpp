#include <dsurf/common.hpp>
#include <dsurf/hash.hpp>

#include <openssl/evp.h>

#include <fstream>
#include <memory>

namespace dsurf {

namespace {

struct Digest
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

    Digest()
    {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
            fail(ErrorKind::Io, "sha256: digest initialisation failed");
        }
    }
    void update(const void* data, std::size_t n)
    {
        if (EVP_DigestUpdate(ctx.get(), data, n) != 1) fail(ErrorKind::Io, "sha256: digest update failed");
    }
    std::string hex()
    {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) fail(ErrorKind::Io, "sha256: digest finalisation failed");
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(2 * len);
        for (unsigned int i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 15];
        }
        return out;
    }
};

} // namespace

std::string sha256_hex(std::span<const unsigned char> bytes)
{
    Digest d;
    d.update(bytes.data(), bytes.size());
    return d.hex();
}

std::string sha256_hex(std::string_view text)
{
    Digest d;
    d.update(text.data(), text.size());
    return d.hex();
}

std::string sha256_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string() + " for hashing");
    Digest d;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) d.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    if (in.bad()) fail(ErrorKind::Io, "read error while hashing " + path.string());
    return d.hex();
}

} // namespace dsurf
