#pragma once

#include <stdexcept>
#include <string>

namespace deconv {

/// Broad classes of failure. The CLI maps these onto exit codes.
enum class ErrorKind {
    Usage,      ///< bad configuration or argument values
    Data,       ///< observations unparsable or outside the reference support
    Numerical,  ///< quadrature, certification or linear algebra failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Parameter outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// Polynomial degree above the evaluation cap.
class DegreeOverflowError : public Error {
public:
    explicit DegreeOverflowError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// A polynomial family failed its orthonormality certificate.
class BasisInconsistencyError : public Error {
public:
    BasisInconsistencyError(const std::string& what, int i, int j)
        : Error(ErrorKind::Numerical, what), i_(i), j_(j) {}
    [[nodiscard]] int first() const noexcept { return i_; }
    [[nodiscard]] int second() const noexcept { return j_; }

private:
    int i_;
    int j_;
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double achieved)
        : Error(ErrorKind::Numerical, what), achieved_(achieved) {}
    /// Error estimate reached before the refinement budget ran out.
    [[nodiscard]] double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

}  // namespace deconv
