#include "fairsens/error.hpp"

namespace fairsens {

const char* errc_name(errc c) {
    switch (c) {
        case errc::parse_error: return "ParseError";
        case errc::schema_error: return "SchemaError";
        case errc::empty_input: return "EmptyInput";
        case errc::too_few_rows: return "TooFewRows";
        case errc::non_finite_input: return "NonFiniteInput";
        case errc::not_symmetric: return "NotSymmetric";
        case errc::not_spd: return "NotSPD";
        case errc::out_of_range_uniform: return "OutOfRangeUniform";
        case errc::degenerate_column: return "DegenerateColumn";
        case errc::degenerate_variance: return "DegenerateVariance";
        case errc::degenerate_denominator: return "DegenerateDenominator";
        case errc::length_mismatch: return "LengthMismatch";
        case errc::invalid_level: return "InvalidLevel";
        case errc::invalid_argument: return "InvalidArgument";
        case errc::bootstrap_unstable: return "BootstrapUnstable";
        case errc::missing_model: return "MissingModel";
        case errc::missing_model_function: return "MissingModelFunction";
        case errc::group_too_small: return "GroupTooSmall";
        case errc::child_crashed: return "ChildCrashed";
        case errc::protocol_violation: return "ProtocolViolation";
        case errc::timeout: return "Timeout";
    }
    return "UnknownError";
}

bool is_validation_error(errc c) {
    switch (c) {
        case errc::parse_error:
        case errc::schema_error:
        case errc::empty_input:
        case errc::too_few_rows:
        case errc::invalid_level:
        case errc::invalid_argument:
        case errc::missing_model:
        case errc::missing_model_function:
        case errc::group_too_small:
            return true;
        default:
            return false;
    }
}

} // namespace fairsens
