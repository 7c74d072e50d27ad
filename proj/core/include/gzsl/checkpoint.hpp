#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gzsl/tensor.hpp"

namespace gzsl::ad {

// Ordered collection of named arrays, serialized to the "GZSL" container:
//   magic "GZSL" | u32 version | u32 array count
//   per array: u32 name length | name bytes | u32 rank | u32 dims...
//              | row-major float32 data
// All integers and floats little-endian. Values are stored at 32-bit
// precision and widened back to 64-bit on load, so save(load(f)) reproduces
// f byte for byte.
struct Checkpoint {
    std::vector<std::pair<std::string, Tensor>> arrays;

    void add(const std::string& name, const Tensor& t);
    const Tensor* find(std::string_view name) const;
    // Throws DataError when the array is missing.
    Tensor require(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace gzsl::ad
