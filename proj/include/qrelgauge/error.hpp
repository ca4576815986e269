#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qrelgauge {

enum class Errc {
    MissingQuery,
    DuplicateDoc,
    ParseError,
    MixedRunTags,
    ConflictingGrade,
    ConflictingMeta,
    SchemaError,
    RangeError,
    NoRelevant,
    NoCommonQueries,
    MismatchedQueries,
    MismatchedSystems,
    TooFewSystems,
    TooFewQueries,
    EmptyBucket,
    MissingMeta,
    ConfigError,
    DegenerateFit,
    BudgetExceeded,
    NumericalError,
    IoError,
};

constexpr std::string_view errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::MissingQuery: return "MissingQuery";
    case Errc::DuplicateDoc: return "DuplicateDoc";
    case Errc::ParseError: return "ParseError";
    case Errc::MixedRunTags: return "MixedRunTags";
    case Errc::ConflictingGrade: return "ConflictingGrade";
    case Errc::ConflictingMeta: return "ConflictingMeta";
    case Errc::SchemaError: return "SchemaError";
    case Errc::RangeError: return "RangeError";
    case Errc::NoRelevant: return "NoRelevant";
    case Errc::NoCommonQueries: return "NoCommonQueries";
    case Errc::MismatchedQueries: return "MismatchedQueries";
    case Errc::MismatchedSystems: return "MismatchedSystems";
    case Errc::TooFewSystems: return "TooFewSystems";
    case Errc::TooFewQueries: return "TooFewQueries";
    case Errc::EmptyBucket: return "EmptyBucket";
    case Errc::MissingMeta: return "MissingMeta";
    case Errc::ConfigError: return "ConfigError";
    case Errc::DegenerateFit: return "DegenerateFit";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::NumericalError: return "NumericalError";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

/// Numerical failures map to CLI exit code 3, everything else to 2.
constexpr bool is_numeric_failure(Errc code) noexcept {
    return code == Errc::NumericalError || code == Errc::DegenerateFit;
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Strict mode turns data problems into errors; lenient mode skips and records a warning.
enum class Mode { Strict, Lenient };

} // namespace qrelgauge
