#include "impuritykit/report.hpp"

#include <sstream>
#include <utility>

namespace impkit {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        hash ^= static_cast<std::uint64_t>(b);
        hash *= 1099511628211ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
        hash >>= 4;
    }
    return out;
}

RunReport::RunReport(std::string command)
    : command_(std::move(command)),
      start_(std::chrono::steady_clock::now()),
      results_(nlohmann::ordered_json::object()) {}

void RunReport::finish() {
    const auto now = std::chrono::steady_clock::now();
    wall_seconds_ = std::chrono::duration<double>(now - start_).count();
}

std::string RunReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["command"] = command_;
    doc["digest"] = digest_;
    doc["seed"] = seed_;
    doc["wall_seconds"] = wall_seconds_;
    doc["results"] = results_;
    return doc.dump(2) + "\n";
}

std::string RunReport::results_json() const { return results_.dump(2) + "\n"; }

namespace {

std::string csv_scalar(const nlohmann::ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

}  // namespace

std::string RunReport::results_csv() const {
    std::ostringstream out;
    for (const auto& item : results_.items()) {
        const auto& value = item.value();
        if (value.is_array() && !value.empty() && value.front().is_object()) {
            // Array of records: header row from the first record, then rows.
            bool first = true;
            for (const auto& col : value.front().items()) {
                out << (first ? "" : ",") << col.key();
                first = false;
            }
            out << "\n";
            for (const auto& row : value) {
                first = true;
                for (const auto& col : row.items()) {
                    out << (first ? "" : ",") << csv_scalar(col.value());
                    first = false;
                }
                out << "\n";
            }
        } else if (value.is_array()) {
            out << item.key();
            for (const auto& entry : value) out << "," << csv_scalar(entry);
            out << "\n";
        } else if (!value.is_object()) {
            out << item.key() << "," << csv_scalar(value) << "\n";
        }
    }
    return out.str();
}

}  // namespace impkit
