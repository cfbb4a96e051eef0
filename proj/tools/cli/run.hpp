// Subcommand driver shared by the qbath executable and the tests.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace qbath::cli {

inline constexpr std::array<std::string_view, 8> subcommands{
    "validate", "propagate", "observables", "purity", "ensemble", "master-eq", "rwa-compare", "n-sweep"};

inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 2;
inline constexpr int exit_numerical = 3;

struct RunRequest {
    std::string subcommand;
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

// --threads, else QBATH_THREADS, else the hardware concurrency.
unsigned resolve_threads(std::optional<unsigned> flag, const char* env_value);

// Runs one subcommand and returns its exit code. Human-readable progress goes to out;
// validation messages and numerical diagnostics go to err.
int run(const RunRequest& request, std::ostream& out, std::ostream& err);

}  // namespace qbath::cli
