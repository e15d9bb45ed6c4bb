#pragma once

#include <stdexcept>
#include <string>

namespace mobility {

// Base of every error raised by the library. `kind()` is a stable tag used in
// failure listings (report failures, CLI messages).
class MobilityError : public std::runtime_error {
public:
    MobilityError(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define MOBILITY_DEFINE_ERROR(Name)                                          \
    class Name : public MobilityError {                                      \
    public:                                                                  \
        explicit Name(const std::string& what) : MobilityError(#Name, what) {} \
    };

MOBILITY_DEFINE_ERROR(InvalidParams)
MOBILITY_DEFINE_ERROR(DomainError)
MOBILITY_DEFINE_ERROR(HeavyTail)
MOBILITY_DEFINE_ERROR(NonPositiveRate)
MOBILITY_DEFINE_ERROR(NoRoot)
MOBILITY_DEFINE_ERROR(NotConverged)
MOBILITY_DEFINE_ERROR(IoError)
MOBILITY_DEFINE_ERROR(MissingSeries)

#undef MOBILITY_DEFINE_ERROR

// Input-file errors carry the location of the offending record.
class FileError : public MobilityError {
public:
    FileError(std::string kind, std::string file, std::size_t row, const std::string& what)
        : MobilityError(std::move(kind), file + ":" + std::to_string(row) + ": " + what),
          file_(std::move(file)), row_(row) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t row() const noexcept { return row_; }

private:
    std::string file_;
    std::size_t row_;
};

class ParseError : public FileError {
public:
    ParseError(std::string file, std::size_t row, const std::string& what)
        : FileError("ParseError", std::move(file), row, what) {}
};

class ValidationError : public FileError {
public:
    ValidationError(std::string file, std::size_t row, const std::string& what)
        : FileError("ValidationError", std::move(file), row, what) {}
};

}  // namespace mobility
