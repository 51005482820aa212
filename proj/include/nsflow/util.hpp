#pragma once

#include <cstdint>
#include <ctime>
#include <string>
#include <string_view>
#include <vector>

namespace nsflow {

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::string hex64(std::uint64_t value);

std::vector<std::string> split(std::string_view text, char sep);

/// "2023-06-16T10:20:30Z" for an epoch-seconds timestamp.
std::string format_utc(std::time_t epoch_seconds);

/// "2023-06-16" for an epoch-seconds timestamp.
std::string format_utc_date(std::time_t epoch_seconds);

bool looks_like_date(std::string_view text);  // YYYY-MM-DD

}  // namespace nsflow
