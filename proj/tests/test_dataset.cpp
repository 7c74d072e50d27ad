#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/synth.hpp"

using namespace gzsl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "gzsl_dataset_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

data::Dataset small_synth(std::uint64_t seed = 3) {
    data::SynthSpec spec;
    spec.n_seen = 4;
    spec.n_unseen = 2;
    spec.visual_dim = 6;
    spec.semantic_dim = 3;
    spec.samples_per_class = 5;
    spec.seed = seed;
    return data::synth_benchmark(spec);
}

bool mentions(const std::vector<std::string>& violations, const std::string& needle) {
    for (const auto& s : violations)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("save then load is the identity on every field") {
    auto dir = temp_dir("roundtrip");
    data::Dataset ds = small_synth();
    ds.val_classes = {1, 2};
    data::save_dataset(dir, ds);
    data::Dataset back = data::load_dataset(dir);
    CHECK(back.visual == ds.visual);
    CHECK(back.semantic == ds.semantic);
    CHECK(back.labels == ds.labels);
    CHECK(back.visual_dim == ds.visual_dim);
    CHECK(back.semantic_dim == ds.semantic_dim);
    CHECK(back.seen_classes == ds.seen_classes);
    CHECK(back.unseen_classes == ds.unseen_classes);
    CHECK(back.train_idx == ds.train_idx);
    CHECK(back.test_seen_idx == ds.test_seen_idx);
    CHECK(back.test_unseen_idx == ds.test_unseen_idx);
    CHECK(back.val_classes == ds.val_classes);
}

TEST_CASE("l2 normalization produces unit visual rows") {
    auto dir = temp_dir("l2norm");
    data::save_dataset(dir, small_synth());
    data::LoadOptions opts;
    opts.l2_normalize = true;
    data::Dataset ds = data::load_dataset(dir, opts);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double norm = 0.0;
        for (double x : ds.visual_row(i)) norm += x * x;
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("missing and corrupt files are data errors") {
    auto dir = temp_dir("corrupt");
    CHECK_THROWS_AS(data::load_dataset(dir / "nope"), DataError);
    data::save_dataset(dir, small_synth());
    {
        std::fstream f(dir / "visual.f32bin",
                       std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(0);
        f.write("XXXX", 4);
    }
    CHECK_THROWS_AS(data::load_dataset(dir), DataError);
}

TEST_CASE("a valid dataset reports no violations") {
    CHECK(data::validate_splits(small_synth()).empty());
}

TEST_CASE("split violations are detected and described") {
    data::Dataset base = small_synth();

    SUBCASE("row shared between train and test_seen") {
        data::Dataset ds = base;
        ds.test_seen_idx.push_back(ds.train_idx.front());
        auto v = data::validate_splits(ds);
        REQUIRE(!v.empty());
        CHECK(mentions(v, std::to_string(ds.train_idx.front())));
        CHECK(mentions(v, "train_idx"));
        CHECK(mentions(v, "test_seen_idx"));
    }
    SUBCASE("row listed twice in one split") {
        data::Dataset ds = base;
        ds.train_idx.push_back(ds.train_idx.front());
        CHECK(mentions(data::validate_splits(ds), "twice"));
    }
    SUBCASE("unseen class leaking into training labels") {
        data::Dataset ds = base;
        const std::uint32_t unseen_cls = *ds.unseen_classes.begin();
        ds.labels[ds.train_idx.front()] = unseen_cls;
        CHECK(mentions(data::validate_splits(ds), "non-seen"));
    }
    SUBCASE("label outside the class range") {
        data::Dataset ds = base;
        ds.labels[0] = 100;
        CHECK(mentions(data::validate_splits(ds), "exceeds class count"));
    }
    SUBCASE("class claimed by both domains") {
        data::Dataset ds = base;
        ds.unseen_classes.insert(*ds.seen_classes.begin());
        CHECK(mentions(data::validate_splits(ds), "both seen and unseen"));
    }
    SUBCASE("out-of-range index") {
        data::Dataset ds = base;
        ds.test_unseen_idx.push_back(static_cast<std::uint32_t>(ds.n() + 5));
        CHECK(mentions(data::validate_splits(ds), "out-of-range"));
    }
    SUBCASE("val class that is not seen") {
        data::Dataset ds = base;
        ds.val_classes.insert(*ds.unseen_classes.begin());
        CHECK(mentions(data::validate_splits(ds), "not a seen class"));
    }
}

TEST_CASE("class_counts covers all classes including empty ones") {
    data::Dataset ds = small_synth();
    auto counts = data::class_counts(ds, ds.train_idx);
    REQUIRE(counts.size() == ds.num_classes());
    for (std::uint32_t c : ds.seen_classes) CHECK(counts[c] == 5);
    for (std::uint32_t c : ds.unseen_classes) CHECK(counts[c] == 0);

    auto empty = data::class_counts(ds, {});
    for (const auto& [cls, count] : empty) CHECK(count == 0);

    std::vector<std::uint32_t> bad{static_cast<std::uint32_t>(ds.n())};
    CHECK_THROWS_AS(data::class_counts(ds, bad), ContractError);
}

TEST_CASE("derive_val_classes picks a seeded strict subset of seen classes") {
    data::Dataset ds = small_synth();
    auto val = data::derive_val_classes(ds, 0.25, 9);
    CHECK(val.size() == 1);
    for (std::uint32_t c : val) CHECK(ds.seen_classes.count(c) == 1);
    CHECK(val == data::derive_val_classes(ds, 0.25, 9));
    CHECK_THROWS_AS(data::derive_val_classes(ds, 0.0, 9), ContractError);
    CHECK_THROWS_AS(data::derive_val_classes(ds, 1.0, 9), ContractError);
    // Rounding never empties the seen side: even a large fraction leaves
    // at least one seen class out.
    auto most = data::derive_val_classes(ds, 0.9, 9);
    CHECK(most.size() < ds.seen_classes.size());
}

TEST_CASE("effective_train_idx drops held-out classes only") {
    data::Dataset ds = small_synth();
    CHECK(data::effective_train_idx(ds) == ds.train_idx);
    const std::uint32_t held = *ds.seen_classes.begin();
    ds.val_classes = {held};
    auto idx = data::effective_train_idx(ds);
    CHECK(idx.size() == ds.train_idx.size() - 5);
    for (std::uint32_t i : idx) CHECK(ds.labels[i] != held);
}

TEST_CASE("row and class gathers respect order and bounds") {
    data::Dataset ds = small_synth();
    std::vector<std::uint32_t> idx{3, 0, 7};
    ad::Tensor vis = data::visual_rows(ds, idx);
    CHECK(vis.dim(0) == 3);
    CHECK(vis.dim(1) == ds.visual_dim);
    for (std::size_t d = 0; d < ds.visual_dim; ++d) {
        CHECK(vis.at(0, d) == ds.visual_row(3)[d]);
        CHECK(vis.at(2, d) == ds.visual_row(7)[d]);
    }
    std::vector<std::uint32_t> classes{1, 1, 4};
    ad::Tensor sem = data::semantic_rows(ds, classes);
    CHECK(sem.dim(0) == 3);
    for (std::size_t d = 0; d < ds.semantic_dim; ++d) {
        CHECK(sem.at(0, d) == sem.at(1, d));
        CHECK(sem.at(2, d) == ds.semantic_row(4)[d]);
    }
    CHECK(data::labels_at(ds, idx) ==
          std::vector<std::uint32_t>{ds.labels[3], ds.labels[0], ds.labels[7]});

    std::vector<std::uint32_t> bad{static_cast<std::uint32_t>(ds.n())};
    CHECK_THROWS_AS(data::visual_rows(ds, bad), ContractError);
    std::vector<std::uint32_t> bad_cls{static_cast<std::uint32_t>(ds.num_classes())};
    CHECK_THROWS_AS(data::semantic_rows(ds, bad_cls), ContractError);
}

TEST_CASE("csv import normalizes to the binary layout") {
    auto csv_dir = temp_dir("csv_in");
    auto out_dir = temp_dir("csv_out");
    std::ofstream(csv_dir / "visual.csv") << "1.5,0.25\n0.5,2.0\n3.0,1.0\n";
    std::ofstream(csv_dir / "semantic.csv") << "0.5\n1.5\n";
    std::ofstream(csv_dir / "labels.csv") << "0\n0\n1\n";
    std::ofstream(csv_dir / "splits.json")
        << R"({"seen_classes":[0],"unseen_classes":[1],"train_idx":[0],)"
        << R"("test_seen_idx":[1],"test_unseen_idx":[2]})";

    data::import_csv_dataset(csv_dir, out_dir);
    data::Dataset ds = data::load_dataset(out_dir);
    CHECK(ds.n() == 3);
    CHECK(ds.visual_dim == 2);
    CHECK(ds.semantic_dim == 1);
    CHECK(ds.visual_row(0)[0] == 1.5);
    CHECK(ds.visual_row(2)[1] == 1.0);
    CHECK(ds.labels == std::vector<std::uint32_t>{0, 0, 1});
    CHECK(ds.semantic_row(1)[0] == 1.5);
}
