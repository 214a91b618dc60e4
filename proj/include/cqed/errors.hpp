#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cqed {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operator/state/space shapes do not agree, or a mode is missing.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Fock cutoff too small for the requested state.
class CutoffError : public Error {
public:
    CutoffError(const std::string& what, int suggested_n_max)
        : Error(what + " (minimal adequate n_max = " + std::to_string(suggested_n_max) + ")"),
          suggested_n_max_(suggested_n_max) {}

    int suggested_n_max() const noexcept { return suggested_n_max_; }

private:
    int suggested_n_max_;
};

class SingularParameterError : public Error {
public:
    using Error::Error;
};

class ZeroVectorError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double achieved_error)
        : Error(what + " (achieved error estimate " + std::to_string(achieved_error) + ")"),
          achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::vector<std::string> fields)
        : Error(compose(what, fields)), fields_(std::move(fields)) {}

    const std::vector<std::string>& fields() const noexcept { return fields_; }

private:
    static std::string compose(const std::string& what, const std::vector<std::string>& fields) {
        std::string out = what;
        if (!fields.empty()) {
            out += " [";
            for (std::size_t k = 0; k < fields.size(); ++k) {
                if (k) out += ", ";
                out += fields[k];
            }
            out += "]";
        }
        return out;
    }

    std::vector<std::string> fields_;
};

class IoError : public Error {
public:
    IoError(const std::string& what, std::string path)
        : Error(what + ": " + path), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace cqed
