#pragma once

#include <stdexcept>
#include <string>

namespace fairsens {

// Every failure mode surfaced by the library. The CLI maps `validation`
// categories to exit code 1 and `computation` categories to exit code 2.
enum class errc {
    parse_error,
    schema_error,
    empty_input,
    too_few_rows,
    non_finite_input,
    not_symmetric,
    not_spd,
    out_of_range_uniform,
    degenerate_column,
    degenerate_variance,
    degenerate_denominator,
    length_mismatch,
    invalid_level,
    invalid_argument,
    bootstrap_unstable,
    missing_model,
    missing_model_function,
    group_too_small,
    child_crashed,
    protocol_violation,
    timeout,
};

const char* errc_name(errc c);

// True for errors caused by bad user input or configuration rather than a
// failed numerical procedure.
bool is_validation_error(errc c);

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

} // namespace fairsens
