#pragma once

#include <stdexcept>
#include <string>

namespace cbct {

/// Invalid volume, detector or trajectory parameters.
class GeometryError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Operand does not match the operator it is applied to.
class GeometryMismatchError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed config file, unknown key or invalid solver settings.
class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Operator has all-zero row or column sums, classical methods can not run.
class DegenerateOperatorError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Relative discrepancy is undefined for ||b|| = 0.
class ZeroRhsError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// File format errors, all derive from FormatError.
class FormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class BadMagicError : public FormatError
{
public:
    using FormatError::FormatError;
};

class VersionMismatchError : public FormatError
{
public:
    using FormatError::FormatError;
};

class UnknownDtypeError : public FormatError
{
public:
    using FormatError::FormatError;
};

class TruncatedFileError : public FormatError
{
public:
    using FormatError::FormatError;
};

/// File is longer than its header declares.
class TrailingDataError : public FormatError
{
public:
    using FormatError::FormatError;
};

/// File header dimensions disagree with the geometry config.
class DimensionMismatchError : public FormatError
{
public:
    using FormatError::FormatError;
};

class IOError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace cbct
