#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dfaudit {

// Base class for every failure this library reports. The CLI maps these to
// exit code 2 (data errors); anything else is a usage or internal error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& reason)
        : Error("parse error at line " + std::to_string(line) + ", column " +
                std::to_string(column) + ": " + reason),
          line_(line), column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class HeaderMismatch : public Error {
public:
    using Error::Error;
};

class MissingColumn : public Error {
public:
    using Error::Error;
};

class MismatchedIds : public Error {
public:
    explicit MismatchedIds(std::size_t difference)
        : Error("sample id sets differ in " + std::to_string(difference) + " ids"),
          difference_(difference) {}

    std::size_t difference() const { return difference_; }

private:
    std::size_t difference_;
};

class DuplicatePair : public Error {
public:
    DuplicatePair(const std::string& sample, const std::string& attribute)
        : Error("duplicate confidence record for (" + sample + ", " + attribute + ")"),
          sample_(sample), attribute_(attribute) {}

    const std::string& sample() const { return sample_; }
    const std::string& attribute() const { return attribute_; }

private:
    std::string sample_;
    std::string attribute_;
};

class UnknownAttribute : public Error {
public:
    explicit UnknownAttribute(const std::string& name)
        : Error("unknown attribute: " + name), name_(name) {}

    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class NoOverlap : public Error {
public:
    explicit NoOverlap(const std::string& attribute)
        : Error("no jointly defined cells for attribute: " + attribute),
          attribute_(attribute) {}

    const std::string& attribute() const { return attribute_; }

private:
    std::string attribute_;
};

class EmptyManifest : public Error {
public:
    EmptyManifest() : Error("manifest contains no identities") {}
};

class EmptyTable : public Error {
public:
    EmptyTable() : Error("annotation table is empty") {}
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class UndefinedExpectation : public Error {
public:
    using Error::Error;
};

// Raised when a requested error slice cannot be computed because a group is
// empty or lacks one of the truth classes entirely.
class DegenerateGroup : public Error {
public:
    DegenerateGroup(const std::string& attribute, const std::string& group,
                    const std::string& missing)
        : Error("degenerate group for attribute '" + attribute + "': " + group +
                " group has no " + missing + " samples"),
          attribute_(attribute), group_(group), missing_(missing) {}

    const std::string& attribute() const { return attribute_; }
    const std::string& group() const { return group_; }
    const std::string& missing() const { return missing_; }

private:
    std::string attribute_;
    std::string group_;
    std::string missing_;
};

} // namespace dfaudit
