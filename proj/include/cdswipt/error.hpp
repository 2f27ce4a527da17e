#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdswipt {

enum class Errc {
    RankDeficient,
    NotHermitian,
    NotPositiveSemidefinite,
    DimensionError,
    SplitAllEnergy,
    SingularChannel,
    BadDistance,
    TooLarge,
    AllPowerToID,
    BadZ,
    DegenerateK,
    InvalidArgument,
    InvalidConfig,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace cdswipt
