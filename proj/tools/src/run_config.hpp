#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "gzsl/cada.hpp"
#include "gzsl/cycle.hpp"
#include "gzsl/gate.hpp"
#include "gzsl/pipeline.hpp"
#include "gzsl/synth.hpp"

namespace gzsl::cli {

// Command-line misuse, including config-file problems. Exits with code 1
// rather than the data-integrity code.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    ModelFamily family = ModelFamily::cada;
    PredictionMode mode = PredictionMode::gzsl_with_dc;
    std::uint64_t seed = 1;
    std::string out_dir = "run";
    std::optional<std::string> dataset_dir;
    std::optional<data::SynthSpec> synth;
    bool l2_normalize = false;
    double val_fraction = 0.2;
    cada::CadaConfig cada;
    cycle::CycleConfig cycle;
    gate::GateConfig gate;
    HeadConfig head;
    std::size_t grid_points = 201;
};

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> mode; // "gzsl" or "zsl"
    bool no_dc = false;
    std::optional<std::size_t> grid;
};

// Strict parse: unknown or mistyped fields raise UsageError naming the field
// path. Overrides are applied before defaults resolve, so a --seed override
// also reseeds every component that did not pin its own seed.
RunConfig parse_run_config(const std::string& text, const std::string& source,
                           const CliOverrides& overrides);

// Every field resolved, suitable for byte-identical reruns.
std::string effective_config_json(const RunConfig& cfg);

} // namespace gzsl::cli
