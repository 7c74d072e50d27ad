#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gzsl/tensor.hpp"

namespace gzsl::data {

// In-memory dataset. Features and class embeddings are widened to 64-bit on
// load; disk formats stay 32-bit. Class ids are dense 0-based; `semantic`
// holds exactly one row per class.
struct Dataset {
    std::vector<double> visual; // [n x visual_dim] row-major
    std::size_t visual_dim = 0;
    std::vector<double> semantic; // [num_classes x semantic_dim] row-major
    std::size_t semantic_dim = 0;
    std::vector<std::uint32_t> labels; // one per visual row

    std::set<std::uint32_t> seen_classes;
    std::set<std::uint32_t> unseen_classes;
    std::vector<std::uint32_t> train_idx;
    std::vector<std::uint32_t> test_seen_idx;
    std::vector<std::uint32_t> test_unseen_idx;
    // Seen classes held out of latent-model training so gate calibration has
    // pseudo-unseen visuals to work with. Empty means "derive when needed".
    std::set<std::uint32_t> val_classes;

    std::size_t n() const { return labels.size(); }
    std::size_t num_classes() const {
        return semantic_dim == 0 ? 0 : semantic.size() / semantic_dim;
    }
    std::span<const double> visual_row(std::size_t i) const {
        return {visual.data() + i * visual_dim, visual_dim};
    }
    std::span<const double> semantic_row(std::uint32_t cls) const {
        return {semantic.data() + static_cast<std::size_t>(cls) * semantic_dim, semantic_dim};
    }
};

struct LoadOptions {
    bool l2_normalize = false; // per-sample L2 normalization of visual rows
};

// Reads visual.f32bin, semantic.f32bin, labels.u32bin and splits.json from
// dir. Raises DataError on malformed files or failed split validation.
Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& opts = {});

void save_dataset(const std::filesystem::path& dir, const Dataset& ds);

// Returns human-readable descriptions of every violated split invariant;
// empty means the dataset is consistent.
std::vector<std::string> validate_splits(const Dataset& ds);

// Count per class (all classes, zeros included) over the given row indices.
std::map<std::uint32_t, std::size_t> class_counts(const Dataset& ds,
                                                  std::span<const std::uint32_t> idx);

// Seeded choice of ~fraction of the seen classes, used when a dataset ships
// without val_classes.
std::set<std::uint32_t> derive_val_classes(const Dataset& ds, double fraction,
                                           std::uint64_t seed);

// Training rows whose class is not held out for calibration.
std::vector<std::uint32_t> effective_train_idx(const Dataset& ds);

// Visual rows stacked in the given order. ContractError on range violations.
ad::Tensor visual_rows(const Dataset& ds, std::span<const std::uint32_t> idx);
// One semantic row per listed class, in the given order.
ad::Tensor semantic_rows(const Dataset& ds, std::span<const std::uint32_t> classes);
// Labels at the given rows.
std::vector<std::uint32_t> labels_at(const Dataset& ds, std::span<const std::uint32_t> idx);

// Convenience shim: reads visual.csv, semantic.csv, labels.csv and
// splits.json from csv_dir and writes the binary layout into out_dir.
void import_csv_dataset(const std::filesystem::path& csv_dir,
                        const std::filesystem::path& out_dir);

} // namespace gzsl::data
