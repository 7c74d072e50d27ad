#include "gzsl/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gzsl/error.hpp"
#include "gzsl/log.hpp"
#include "gzsl/rng.hpp"

namespace gzsl::data {

namespace {

using nlohmann::json;

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is, const std::string& file, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw DataError(file + ": truncated while reading " + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void expect_magic(std::istream& is, const std::string& file, const char* magic) {
    char buf[4];
    if (!is.read(buf, 4) || std::string_view(buf, 4) != magic)
        throw DataError(file + ": bad magic, expected \"" + magic + "\"");
}

// "FEAT" | u32 rows | u32 cols | row-major float32
std::vector<double> read_matrix(const std::filesystem::path& path, std::size_t& rows,
                                std::size_t& cols) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path.string());
    const std::string file = path.filename().string();
    expect_magic(is, file, "FEAT");
    rows = get_u32(is, file, "row count");
    cols = get_u32(is, file, "column count");
    std::vector<double> out(rows * cols);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const float f = std::bit_cast<float>(get_u32(is, file, "matrix data"));
        if (!std::isfinite(f))
            throw DataError(file + ": non-finite value at element " + std::to_string(i));
        out[i] = static_cast<double>(f);
    }
    return out;
}

void write_matrix(const std::filesystem::path& path, const std::vector<double>& m,
                  std::size_t rows, std::size_t cols) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open " + path.string() + " for writing");
    os.write("FEAT", 4);
    put_u32(os, static_cast<std::uint32_t>(rows));
    put_u32(os, static_cast<std::uint32_t>(cols));
    for (double x : m) put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    if (!os) throw DataError("failed writing " + path.string());
}

std::vector<std::uint32_t> read_labels(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path.string());
    const std::string file = path.filename().string();
    expect_magic(is, file, "LABL");
    const std::uint32_t n = get_u32(is, file, "label count");
    std::vector<std::uint32_t> out(n);
    for (std::uint32_t i = 0; i < n; ++i) out[i] = get_u32(is, file, "label data");
    return out;
}

void write_labels(const std::filesystem::path& path, const std::vector<std::uint32_t>& labels) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open " + path.string() + " for writing");
    os.write("LABL", 4);
    put_u32(os, static_cast<std::uint32_t>(labels.size()));
    for (std::uint32_t v : labels) put_u32(os, v);
    if (!os) throw DataError("failed writing " + path.string());
}

std::vector<std::uint32_t> idx_list(const json& j, const std::string& key) {
    if (!j.contains(key)) throw DataError("splits.json is missing \"" + key + "\"");
    std::vector<std::uint32_t> out;
    for (const auto& v : j.at(key)) {
        const std::int64_t x = v.get<std::int64_t>();
        if (x < 0) throw DataError("splits.json: negative entry in \"" + key + "\"");
        out.push_back(static_cast<std::uint32_t>(x));
    }
    return out;
}

} // namespace

std::vector<std::string> validate_splits(const Dataset& ds) {
    std::vector<std::string> v;
    const std::size_t n = ds.n();
    const std::size_t classes = ds.num_classes();

    if (ds.visual_dim == 0 || ds.visual.size() != n * ds.visual_dim)
        v.push_back("visual matrix does not match label count");
    if (ds.semantic_dim == 0 || classes == 0 || ds.semantic.size() != classes * ds.semantic_dim)
        v.push_back("semantic matrix is not [classes x semantic_dim]");

    for (std::uint32_t c : ds.seen_classes)
        if (c >= classes) v.push_back("seen class " + std::to_string(c) + " has no semantic row");
    for (std::uint32_t c : ds.unseen_classes)
        if (c >= classes)
            v.push_back("unseen class " + std::to_string(c) + " has no semantic row");

    for (std::uint32_t c : ds.seen_classes)
        if (ds.unseen_classes.count(c))
            v.push_back("class " + std::to_string(c) + " is both seen and unseen");

    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        const std::uint32_t y = ds.labels[i];
        if (y >= classes) {
            v.push_back("label " + std::to_string(y) + " at row " + std::to_string(i) +
                        " exceeds class count");
        } else if (!ds.seen_classes.count(y) && !ds.unseen_classes.count(y)) {
            v.push_back("label " + std::to_string(y) + " at row " + std::to_string(i) +
                        " belongs to neither split");
        }
    }

    std::map<std::uint32_t, const char*> claimed;
    auto check_idx = [&](const std::vector<std::uint32_t>& idx, const char* name,
                         const std::set<std::uint32_t>& allowed, const char* side) {
        std::set<std::uint32_t> seen_rows;
        for (std::uint32_t i : idx) {
            if (i >= n) {
                v.push_back(std::string(name) + " contains out-of-range row " +
                            std::to_string(i));
                continue;
            }
            if (!seen_rows.insert(i).second)
                v.push_back(std::string(name) + " lists row " + std::to_string(i) + " twice");
            auto [it, fresh] = claimed.emplace(i, name);
            if (!fresh && it->second != name)
                v.push_back("row " + std::to_string(i) + " appears in both " + it->second +
                            " and " + name);
            if (ds.labels[i] < classes && !allowed.count(ds.labels[i]))
                v.push_back(std::string(name) + " row " + std::to_string(i) + " has a non-" +
                            side + " label " + std::to_string(ds.labels[i]));
        }
    };
    check_idx(ds.train_idx, "train_idx", ds.seen_classes, "seen");
    check_idx(ds.test_seen_idx, "test_seen_idx", ds.seen_classes, "seen");
    check_idx(ds.test_unseen_idx, "test_unseen_idx", ds.unseen_classes, "unseen");

    for (std::uint32_t c : ds.val_classes)
        if (!ds.seen_classes.count(c))
            v.push_back("val class " + std::to_string(c) + " is not a seen class");

    return v;
}

Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& opts) {
    Dataset ds;
    std::size_t vrows = 0, srows = 0;
    ds.visual = read_matrix(dir / "visual.f32bin", vrows, ds.visual_dim);
    ds.semantic = read_matrix(dir / "semantic.f32bin", srows, ds.semantic_dim);
    ds.labels = read_labels(dir / "labels.u32bin");
    if (vrows != ds.labels.size())
        throw DataError("visual.f32bin has " + std::to_string(vrows) + " rows but " +
                        std::to_string(ds.labels.size()) + " labels");

    const auto splits_path = dir / "splits.json";
    std::ifstream is(splits_path);
    if (!is) throw DataError("cannot open " + splits_path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw DataError("splits.json is not valid JSON: " + std::string(e.what()));
    }
    for (std::uint32_t c : idx_list(j, "seen_classes")) ds.seen_classes.insert(c);
    for (std::uint32_t c : idx_list(j, "unseen_classes")) ds.unseen_classes.insert(c);
    ds.train_idx = idx_list(j, "train_idx");
    ds.test_seen_idx = idx_list(j, "test_seen_idx");
    ds.test_unseen_idx = idx_list(j, "test_unseen_idx");
    if (j.contains("val_classes"))
        for (std::uint32_t c : idx_list(j, "val_classes")) ds.val_classes.insert(c);

    const auto violations = validate_splits(ds);
    if (!violations.empty()) {
        std::string msg = "dataset at " + dir.string() + " failed validation:";
        for (const auto& s : violations) msg += "\n  - " + s;
        throw DataError(msg);
    }

    if (opts.l2_normalize) {
        for (std::size_t i = 0; i < ds.n(); ++i) {
            double* row = ds.visual.data() + i * ds.visual_dim;
            double norm = 0.0;
            for (std::size_t d = 0; d < ds.visual_dim; ++d) norm += row[d] * row[d];
            norm = std::sqrt(norm);
            if (norm > 0.0)
                for (std::size_t d = 0; d < ds.visual_dim; ++d) row[d] /= norm;
        }
    }
    return ds;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
    std::filesystem::create_directories(dir);
    write_matrix(dir / "visual.f32bin", ds.visual, ds.n(), ds.visual_dim);
    write_matrix(dir / "semantic.f32bin", ds.semantic, ds.num_classes(), ds.semantic_dim);
    write_labels(dir / "labels.u32bin", ds.labels);

    json j;
    j["seen_classes"] = std::vector<std::uint32_t>(ds.seen_classes.begin(), ds.seen_classes.end());
    j["unseen_classes"] =
        std::vector<std::uint32_t>(ds.unseen_classes.begin(), ds.unseen_classes.end());
    j["train_idx"] = ds.train_idx;
    j["test_seen_idx"] = ds.test_seen_idx;
    j["test_unseen_idx"] = ds.test_unseen_idx;
    if (!ds.val_classes.empty())
        j["val_classes"] = std::vector<std::uint32_t>(ds.val_classes.begin(), ds.val_classes.end());

    std::ofstream os(dir / "splits.json", std::ios::trunc);
    if (!os) throw DataError("cannot open splits.json for writing in " + dir.string());
    os << j.dump(2) << "\n";
    if (!os) throw DataError("failed writing splits.json in " + dir.string());
}

std::map<std::uint32_t, std::size_t> class_counts(const Dataset& ds,
                                                  std::span<const std::uint32_t> idx) {
    std::map<std::uint32_t, std::size_t> counts;
    for (std::uint32_t c = 0; c < ds.num_classes(); ++c) counts[c] = 0;
    for (std::uint32_t i : idx) {
        if (i >= ds.n())
            throw ContractError("class_counts: row " + std::to_string(i) + " out of range");
        counts[ds.labels[i]] += 1;
    }
    return counts;
}

std::set<std::uint32_t> derive_val_classes(const Dataset& ds, double fraction,
                                           std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction >= 1.0)
        throw ContractError("derive_val_classes: fraction must be in (0,1)");
    std::vector<std::uint32_t> seen(ds.seen_classes.begin(), ds.seen_classes.end());
    if (seen.size() < 2) {
        log_info("too few seen classes to hold out a validation split");
        return {};
    }
    std::size_t count = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(seen.size())));
    count = std::clamp<std::size_t>(count, 1, seen.size() - 1);
    Rng rng(seed);
    rng.shuffle(seen);
    return {seen.begin(), seen.begin() + static_cast<std::ptrdiff_t>(count)};
}

std::vector<std::uint32_t> effective_train_idx(const Dataset& ds) {
    std::vector<std::uint32_t> out;
    out.reserve(ds.train_idx.size());
    for (std::uint32_t i : ds.train_idx)
        if (!ds.val_classes.count(ds.labels[i])) out.push_back(i);
    return out;
}

namespace {

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw DataError(path.filename().string() + ": cannot parse \"" + cell +
                                "\" as a number");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(path.filename().string() + ": ragged row at line " +
                            std::to_string(rows.size() + 1));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path.filename().string() + " is empty");
    return rows;
}

} // namespace

void import_csv_dataset(const std::filesystem::path& csv_dir,
                        const std::filesystem::path& out_dir) {
    const auto visual = read_csv(csv_dir / "visual.csv");
    const auto semantic = read_csv(csv_dir / "semantic.csv");
    const auto label_rows = read_csv(csv_dir / "labels.csv");

    Dataset ds;
    ds.visual_dim = visual.front().size();
    for (const auto& row : visual) ds.visual.insert(ds.visual.end(), row.begin(), row.end());
    ds.semantic_dim = semantic.front().size();
    for (const auto& row : semantic)
        ds.semantic.insert(ds.semantic.end(), row.begin(), row.end());
    for (const auto& row : label_rows) {
        if (row.size() != 1) throw DataError("labels.csv must have one value per line");
        if (row[0] < 0 || row[0] != std::floor(row[0]))
            throw DataError("labels.csv: labels must be non-negative integers");
        ds.labels.push_back(static_cast<std::uint32_t>(row[0]));
    }

    std::ifstream is(csv_dir / "splits.json");
    if (!is) throw DataError("cannot open " + (csv_dir / "splits.json").string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw DataError("splits.json is not valid JSON: " + std::string(e.what()));
    }
    for (std::uint32_t c : idx_list(j, "seen_classes")) ds.seen_classes.insert(c);
    for (std::uint32_t c : idx_list(j, "unseen_classes")) ds.unseen_classes.insert(c);
    ds.train_idx = idx_list(j, "train_idx");
    ds.test_seen_idx = idx_list(j, "test_seen_idx");
    ds.test_unseen_idx = idx_list(j, "test_unseen_idx");
    if (j.contains("val_classes"))
        for (std::uint32_t c : idx_list(j, "val_classes")) ds.val_classes.insert(c);

    const auto violations = validate_splits(ds);
    if (!violations.empty()) {
        std::string msg = "csv dataset at " + csv_dir.string() + " failed validation:";
        for (const auto& s : violations) msg += "\n  - " + s;
        throw DataError(msg);
    }
    save_dataset(out_dir, ds);
}

ad::Tensor visual_rows(const Dataset& ds, std::span<const std::uint32_t> idx) {
    std::vector<double> buf;
    buf.reserve(idx.size() * ds.visual_dim);
    for (std::uint32_t i : idx) {
        if (i >= ds.n()) {
            throw ContractError("visual_rows: row " + std::to_string(i) + " out of range (" +
                                std::to_string(ds.n()) + " rows)");
        }
        auto row = ds.visual_row(i);
        buf.insert(buf.end(), row.begin(), row.end());
    }
    return ad::Tensor::from_data({idx.size(), ds.visual_dim}, std::move(buf));
}

ad::Tensor semantic_rows(const Dataset& ds, std::span<const std::uint32_t> classes) {
    std::vector<double> buf;
    buf.reserve(classes.size() * ds.semantic_dim);
    for (std::uint32_t c : classes) {
        if (c >= ds.num_classes()) {
            throw ContractError("semantic_rows: class " + std::to_string(c) +
                                " has no embedding row");
        }
        auto row = ds.semantic_row(c);
        buf.insert(buf.end(), row.begin(), row.end());
    }
    return ad::Tensor::from_data({classes.size(), ds.semantic_dim}, std::move(buf));
}

std::vector<std::uint32_t> labels_at(const Dataset& ds, std::span<const std::uint32_t> idx) {
    std::vector<std::uint32_t> out;
    out.reserve(idx.size());
    for (std::uint32_t i : idx) {
        if (i >= ds.n()) {
            throw ContractError("labels_at: row " + std::to_string(i) + " out of range");
        }
        out.push_back(ds.labels[i]);
    }
    return out;
}

} // namespace gzsl::data
