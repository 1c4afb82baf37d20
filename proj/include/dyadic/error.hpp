#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dyadic {

/// Failure raised by a construction step. `code` is a stable identifier
/// (e.g. "SideCoveringFailure"); `location` carries the indices that
/// pinpoint the failure, in the order documented at the throw site.
class Error : public std::runtime_error {
public:
    Error(std::string code, std::string message, std::vector<std::int64_t> location = {})
        : std::runtime_error(code + ": " + message),
          code_(std::move(code)),
          location_(std::move(location)) {}

    const std::string& code() const noexcept { return code_; }
    const std::vector<std::int64_t>& location() const noexcept { return location_; }

private:
    std::string code_;
    std::vector<std::int64_t> location_;
};

/// One failed check in a verification report.
struct Violation {
    std::string check;
    std::vector<std::int64_t> location;
    std::string detail;

    friend bool operator<(const Violation& a, const Violation& b) {
        if (a.check != b.check) return a.check < b.check;
        return a.location < b.location;
    }
    friend bool operator==(const Violation&, const Violation&) = default;
};

struct VerificationReport {
    std::vector<Violation> violations;
    // false when some check families were sampled rather than exhaustive
    bool exhaustive = true;

    bool ok() const noexcept { return violations.empty(); }
    std::size_t count(const std::string& check) const {
        std::size_t c = 0;
        for (const auto& v : violations) c += (v.check == check);
        return c;
    }
};

} // namespace dyadic
