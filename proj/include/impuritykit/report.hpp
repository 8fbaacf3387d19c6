#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include <json.hpp>

namespace impkit {

// 64-bit FNV-1a of a byte string, as 16 lowercase hex characters.
std::string fnv1a_hex(const std::string& bytes);

// Reproducible run record: command echo, digest of the inputs, the seed in
// force (always present, defaulted or not), wall time, and the result
// payload. The payload keeps insertion order so emitted documents are
// byte-stable for fixed inputs and seeds.
class RunReport {
public:
    explicit RunReport(std::string command);

    nlohmann::ordered_json& results() { return results_; }
    const nlohmann::ordered_json& results() const { return results_; }

    void set_seed(std::uint64_t seed) { seed_ = seed; }
    void set_digest_of(const std::string& payload) { digest_ = fnv1a_hex(payload); }

    // Stamps the wall time accumulated since construction.
    void finish();

    // Full report document (command, digest, seed, wall_seconds, results).
    std::string to_json() const;

    // Results-only views for stdout. JSON is the payload object; CSV renders
    // one "key,value" line per scalar, and an array-of-objects member (if
    // present) as a table with a header row.
    std::string results_json() const;
    std::string results_csv() const;

private:
    std::string command_;
    std::string digest_;
    std::uint64_t seed_ = 0;
    double wall_seconds_ = 0.0;
    std::chrono::steady_clock::time_point start_;
    nlohmann::ordered_json results_;
};

}  // namespace impkit
