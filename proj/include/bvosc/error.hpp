#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bvosc {

enum class Errc {
    invalid_argument,
    cube_outside_domain,
    degenerate_cube,
    undefined_quotient,  // |Df|(Q) == 0
    zero_perimeter,
    out_of_range,
    depth_too_small,
    lattice_too_large,
    non_converged,
    parse_error,
};

inline std::string_view to_string(Errc code)
{
    switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::cube_outside_domain: return "cube-outside-domain";
    case Errc::degenerate_cube: return "degenerate-cube";
    case Errc::undefined_quotient: return "undefined-quotient";
    case Errc::zero_perimeter: return "zero-perimeter";
    case Errc::out_of_range: return "out-of-range";
    case Errc::depth_too_small: return "depth-too-small";
    case Errc::lattice_too_large: return "lattice-too-large";
    case Errc::non_converged: return "non-converged";
    case Errc::parse_error: return "parse-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace bvosc
