#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace crackbench {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    IoError(const std::filesystem::path& path, const std::string& what)
        : Error(what + ": " + path.string()), path_(path) {}

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace crackbench
