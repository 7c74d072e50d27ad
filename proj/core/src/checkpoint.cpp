#include "gzsl/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "gzsl/error.hpp"

namespace gzsl::ad {

namespace {

constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kMaxNameLen = 4096;
constexpr std::uint32_t kMaxRank = 8;

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw DataError(std::string("checkpoint truncated while reading ") + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void Checkpoint::add(const std::string& name, const Tensor& t) {
    if (!t.defined()) throw ContractError("checkpoint add: undefined tensor '" + name + "'");
    if (find(name) != nullptr)
        throw ContractError("checkpoint add: duplicate array name '" + name + "'");
    arrays.emplace_back(name, t);
}

const Tensor* Checkpoint::find(std::string_view name) const {
    for (const auto& [n, t] : arrays)
        if (n == name) return &t;
    return nullptr;
}

Tensor Checkpoint::require(const std::string& name) const {
    const Tensor* t = find(name);
    if (t == nullptr) throw DataError("checkpoint is missing array '" + name + "'");
    return *t;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path.string());
    os.write("GZSL", 4);
    put_u32(os, kFormatVersion);
    put_u32(os, static_cast<std::uint32_t>(ckpt.arrays.size()));
    for (const auto& [name, t] : ckpt.arrays) {
        put_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) put_u32(os, static_cast<std::uint32_t>(d));
        for (double x : t.data())
            put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
    if (!os) throw DataError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::string_view(magic, 4) != "GZSL")
        throw DataError("not a checkpoint file (bad magic): " + path.string());
    const std::uint32_t version = get_u32(is, "version");
    if (version != kFormatVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version) +
                        " in " + path.string());
    const std::uint32_t count = get_u32(is, "array count");

    Checkpoint ckpt;
    for (std::uint32_t a = 0; a < count; ++a) {
        const std::uint32_t name_len = get_u32(is, "name length");
        if (name_len == 0 || name_len > kMaxNameLen)
            throw DataError("checkpoint array has implausible name length " +
                            std::to_string(name_len) + ": " + path.string());
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len))
            throw DataError("checkpoint truncated while reading array name: " + path.string());
        const std::uint32_t rank = get_u32(is, "rank");
        if (rank == 0 || rank > kMaxRank)
            throw DataError("checkpoint array '" + name + "' has implausible rank " +
                            std::to_string(rank));
        Shape shape(rank);
        std::size_t numel = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            shape[d] = get_u32(is, "dimension");
            numel *= shape[d];
        }
        std::vector<double> data(numel);
        for (std::size_t i = 0; i < numel; ++i) {
            const float f = std::bit_cast<float>(get_u32(is, "array data"));
            if (!std::isfinite(f))
                throw DataError("checkpoint array '" + name + "' contains non-finite values");
            data[i] = static_cast<double>(f);
        }
        ckpt.add(name, Tensor::from_data(std::move(shape), std::move(data), true));
    }
    return ckpt;
}

} // namespace gzsl::ad
