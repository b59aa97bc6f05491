#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace navslip {

/// Sample array or coefficient array does not match the grid layout.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A field with the wrong wall-normal parity was passed to an operation.
class ParityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Two fields live on incompatible grids.
class GridMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite coefficient encountered while time stepping.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Collects every validation problem instead of stopping at the first one.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string out;
        for (const auto& s : p) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }
    std::vector<std::string> problems_;
};

}  // namespace navslip
