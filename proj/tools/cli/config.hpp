// Run configuration: JSON schema, parsing with line-anchored diagnostics, bath resolution.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qbath/bath_states.hpp"
#include "qbath/core_model.hpp"
#include "qbath/errors.hpp"
#include "qbath/oscillator_states.hpp"
#include "qbath/propagator.hpp"

namespace qbath::cli {

// Schema or semantic failure in a config document; what() reads "<source>:<line>: <message>".
class ConfigError : public ParameterError {
public:
    ConfigError(const std::string& source, std::size_t line, const std::string& message);
    std::size_t line;
};

enum class BathKind { Equilibrium, Number, Coherent, SampleNumber, SampleCoherent };

struct BathConfig {
    BathKind kind{BathKind::Equilibrium};
    double beta{zero_temperature};
    std::vector<std::uint64_t> n;
    Eigen::VectorXcd amps;
    std::optional<std::uint64_t> seed;
};

struct OutputConfig {
    std::string directory{"out"};
    bool csv{true};
    bool json{true};
    bool binary{false};
};

struct ExperimentConfig {
    std::optional<std::string> kind;
    std::size_t n_samples{1000};
    std::uint64_t seed{0};
    std::vector<std::size_t> sweep_N;
    std::optional<double> time;  // evaluation instant for ensemble and sweep summaries
    double threshold{0.1};
    double plateau_level{0.01};
    double denom_floor{1e-8};
};

struct RunConfig {
    std::string source;
    std::uint64_t hash{0};

    double nu{1.0};
    CouplingFamily coupling_family{CouplingFamily::RWA};
    Units units;
    SpectralDiscretization spectral;
    ModelSpec model;

    BathConfig bath;
    OscillatorState oscillator{GaussianMoments{}};
    double t_max{10.0};
    std::size_t steps{100};
    OutputConfig outputs;
    ExperimentConfig experiment;

    TimeGrid grid() const { return TimeGrid::uniform(t_max, steps); }
    // Rebuilds the model with N modes; only for non-explicit spectral families.
    ModelSpec model_with_modes(std::size_t n_modes) const;
    // Line of a JSON pointer such as "/bath/beta" in the source document (1 if unknown).
    std::size_t line_of(const std::string& pointer) const;
    [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;

    std::vector<std::pair<std::string, std::size_t>> key_lines;
};

// 64-bit FNV-1a of the raw config bytes.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Turns the configured bath into a concrete BathSpec; sampled kinds draw one member with seed.
BathSpec resolve_bath(const RunConfig& config, const ModelSpec& model, std::uint64_t seed);

const char* to_string(BathKind kind) noexcept;

}  // namespace qbath::cli
