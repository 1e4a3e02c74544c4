#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Lower clamp applied to every probability before it enters a logarithm.
inline constexpr double kProbFloor = 1e-12;

/// Tolerance for "this row lies on the probability simplex" checks.
inline constexpr double kRowSumTol = 1e-9;

// ---------------------------------------------------------------------------
// Error types. Every failure surfaces as a subclass of Error so callers can
// map them onto process exit codes in one place.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mismatched matrix/vector dimensions.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error("shape: " + msg) {}
};

/// Values outside their numeric domain (non-finite, negative probability, ...).
class NumericDomainError : public Error {
public:
    explicit NumericDomainError(const std::string& msg) : Error("numeric-domain: " + msg) {}
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& msg) : Error("divergence: " + msg) {}
};

/// Codebook lookup for a class without a learned embedding.
class MissingEmbeddingError : public Error {
public:
    explicit MissingEmbeddingError(const std::string& msg) : Error("missing-embedding: " + msg) {}
};

/// Frame-by-frame pairing violated (row counts differ).
class PairingError : public Error {
public:
    explicit PairingError(const std::string& msg) : Error("pairing: " + msg) {}
};

/// Invalid configuration document or field.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("config: " + msg) {}
};

/// File read/write failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("io: " + msg) {}
};

// ---------------------------------------------------------------------------
// Seeding. A single master seed fans out to per-stage sub-seeds through a
// fixed, documented rule: sub_seed(master, tag) = splitmix64(master XOR
// fnv1a64(tag)). Stage tags are string literals, so reports can name them.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t sub_seed(std::uint64_t master, std::string_view stage) {
    return splitmix64(master ^ fnv1a64(stage));
}

}  // namespace nle
