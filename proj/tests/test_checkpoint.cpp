#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gzsl/checkpoint.hpp"
#include "gzsl/error.hpp"
#include "gzsl/layers.hpp"
#include "gzsl/net_io.hpp"
#include "gzsl/ops.hpp"
#include "gzsl/rng.hpp"

using namespace gzsl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "gzsl_ckpt_test";
    fs::create_directories(dir);
    return dir;
}

std::vector<char> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<char>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ad::Checkpoint sample_checkpoint() {
    ad::Checkpoint ckpt;
    // 0.1 is not exactly representable in float32, exercising quantization.
    ckpt.add("layer.w", ad::Tensor::from_data({2, 3}, {0.1, -2.5, 3.0, 7.25, -0.375, 1e-3}));
    ckpt.add("layer.b", ad::Tensor::from_data({3}, {0.0, 1.0, -1.0}));
    return ckpt;
}

} // namespace

TEST_CASE("save then load widens float32 values") {
    auto path = temp_dir() / "widen.ckpt";
    ad::save_checkpoint(path, sample_checkpoint());
    ad::Checkpoint loaded = ad::load_checkpoint(path);
    REQUIRE(loaded.arrays.size() == 2);
    CHECK(loaded.arrays[0].first == "layer.w");
    CHECK(loaded.arrays[0].second.shape() == ad::Shape{2, 3});
    CHECK(loaded.arrays[0].second.data()[0] == static_cast<double>(0.1f));
    CHECK(loaded.arrays[0].second.data()[1] == -2.5);
    CHECK(loaded.arrays[1].second.data()[2] == -1.0);
}

TEST_CASE("save of a loaded checkpoint reproduces the file byte for byte") {
    auto dir = temp_dir();
    auto first = dir / "round1.ckpt";
    auto second = dir / "round2.ckpt";
    ad::save_checkpoint(first, sample_checkpoint());
    ad::save_checkpoint(second, ad::load_checkpoint(first));
    CHECK(read_bytes(first) == read_bytes(second));
}

TEST_CASE("find and require behave on missing names") {
    ad::Checkpoint ckpt = sample_checkpoint();
    CHECK(ckpt.find("layer.w") != nullptr);
    CHECK(ckpt.find("absent") == nullptr);
    CHECK_THROWS_AS(ckpt.require("absent"), DataError);
    CHECK(ckpt.require("layer.b").size() == 3);
}

TEST_CASE("corrupt magic is rejected") {
    auto path = temp_dir() / "magic.ckpt";
    ad::save_checkpoint(path, sample_checkpoint());
    auto bytes = read_bytes(path);
    bytes[0] = 'X';
    write_bytes(path, bytes);
    CHECK_THROWS_AS(ad::load_checkpoint(path), DataError);
}

TEST_CASE("unsupported version is rejected") {
    auto path = temp_dir() / "version.ckpt";
    ad::save_checkpoint(path, sample_checkpoint());
    auto bytes = read_bytes(path);
    bytes[4] = 99; // version field follows the 4-byte magic, little-endian
    write_bytes(path, bytes);
    CHECK_THROWS_AS(ad::load_checkpoint(path), DataError);
}

TEST_CASE("truncated file is rejected") {
    auto path = temp_dir() / "trunc.ckpt";
    ad::save_checkpoint(path, sample_checkpoint());
    auto bytes = read_bytes(path);
    bytes.resize(bytes.size() - 7);
    write_bytes(path, bytes);
    CHECK_THROWS_AS(ad::load_checkpoint(path), DataError);
    CHECK_THROWS_AS(ad::load_checkpoint(temp_dir() / "does_not_exist.ckpt"), DataError);
}

TEST_CASE("mlp round-trips through a checkpoint") {
    Rng rng(21);
    ad::Mlp mlp =
        ad::make_mlp({3, 6, 2}, ad::Activation::leaky_relu, ad::Activation::identity, rng);
    ad::Checkpoint ckpt;
    ad::checkpoint_add_mlp(ckpt, "net", mlp);
    REQUIRE(ckpt.arrays.size() == 4);
    CHECK(ckpt.arrays[0].first == "net.0.w");
    CHECK(ckpt.arrays[3].first == "net.1.b");

    auto path = temp_dir() / "mlp.ckpt";
    ad::save_checkpoint(path, ckpt);
    ad::Checkpoint loaded = ad::load_checkpoint(path);
    ad::Mlp back = ad::mlp_from_checkpoint(loaded, "net", ad::Activation::leaky_relu,
                                           ad::Activation::identity);
    REQUIRE(back.layers.size() == 2);
    CHECK(back.in_dim() == 3);
    CHECK(back.out_dim() == 2);

    // Quantize the original in place the same way the file did; tensor
    // storage is shared so this touches the real layer parameters.
    for (auto& layer : mlp.layers) {
        for (ad::Tensor t : {layer.weight, layer.bias})
            for (auto& v : t.values()) v = static_cast<double>(static_cast<float>(v));
    }
    ad::Tensor x = ad::Tensor::from_data({2, 3}, {0.3, -0.7, 1.1, 0.0, 0.5, -0.25});
    auto a = back.forward(x).data();
    auto b = mlp.forward(x).data();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("missing prefix in a checkpoint is a data error") {
    ad::Checkpoint ckpt = sample_checkpoint();
    CHECK_THROWS_AS(
        ad::mlp_from_checkpoint(ckpt, "nope", ad::Activation::relu, ad::Activation::identity),
        DataError);
    CHECK_THROWS_AS(ad::dense_from_checkpoint(ckpt, "nope", ad::Activation::identity),
                    DataError);
}
