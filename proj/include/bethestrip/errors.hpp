#pragma once

#include <stdexcept>
#include <string>

namespace bethe {

// Every failure raised by the library derives from Error; the CLI maps the
// category to its exit code.
class Error : public std::runtime_error {
public:
    enum class Category { config, domain, verification };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }

private:
    Category category_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(Category::config, what) {}
};

struct SingularMatrix : Error {
    explicit SingularMatrix(const std::string& what) : Error(Category::domain, what) {}
};

struct OutOfBand : Error {
    explicit OutOfBand(const std::string& what) : Error(Category::domain, what) {}
};

struct UnsupportedEnsemble : Error {
    explicit UnsupportedEnsemble(const std::string& what) : Error(Category::domain, what) {}
};

struct NoConvergence : Error {
    NoConvergence(const std::string& what, int iterations)
        : Error(Category::domain, what), iterations(iterations) {}
    int iterations;
};

struct SingularJacobian : Error {
    explicit SingularJacobian(const std::string& what) : Error(Category::domain, what) {}
};

struct ContinuationBreakdown : Error {
    ContinuationBreakdown(const std::string& what, double eta)
        : Error(Category::domain, what), eta(eta) {}
    double eta;
};

struct SizeOverflow : Error {
    explicit SizeOverflow(const std::string& what) : Error(Category::domain, what) {}
};

struct TruncationOverflow : Error {
    explicit TruncationOverflow(const std::string& what) : Error(Category::domain, what) {}
};

struct VerificationFailure : Error {
    explicit VerificationFailure(const std::string& what) : Error(Category::verification, what) {}
};

}  // namespace bethe
