#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace impdist {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- market data ---

class MalformedInstrument : public Error {
public:
    explicit MalformedInstrument(const std::string& name)
        : Error("malformed instrument name: '" + name + "'"), name(name) {}
    std::string name;
};

class MalformedLine : public Error {
public:
    explicit MalformedLine(std::size_t line_no, const std::string& detail = "")
        : Error("malformed snapshot line " + std::to_string(line_no) +
                (detail.empty() ? "" : ": " + detail)),
          line_no(line_no) {}
    std::size_t line_no;
};

class EmptySnapshot : public Error {
public:
    EmptySnapshot() : Error("snapshot contains no records") {}
};

class NoQuotesForMaturity : public Error {
public:
    explicit NoQuotesForMaturity(const std::string& maturity)
        : Error("no usable option quotes for maturity " + maturity) {}
};

class NoExchangeOnline : public Error {
public:
    NoExchangeOnline() : Error("index average requires at least one online exchange") {}
};

// --- parity / forward ---

class InsufficientStrikes : public Error {
public:
    explicit InsufficientStrikes(std::size_t n)
        : Error("need at least 2 strikes with both legs, got " + std::to_string(n)) {}
};

class DegenerateRegression : public Error {
public:
    explicit DegenerateRegression(const std::string& detail)
        : Error("degenerate ATM regression: " + detail) {}
};

class NoCombinedPoints : public Error {
public:
    NoCombinedPoints() : Error("no combined put points could be built") {}
};

class ParityViolation : public Error {
public:
    explicit ParityViolation(double strike, double mid)
        : Error("combined put mid " + std::to_string(mid) + " at strike " +
                std::to_string(strike) + " is significantly negative") {}
};

// --- model / calibration ---

class InvalidHorizon : public Error {
public:
    InvalidHorizon(double h, double tau)
        : Error("horizon " + std::to_string(h) + " min must lie in (0, " +
                std::to_string(tau) + "] min") {}
};

class TooFewPoints : public Error {
public:
    TooFewPoints(std::size_t got, std::size_t need)
        : Error("fit needs " + std::to_string(need) + " distinct strikes, got " +
                std::to_string(got)) {}
};

class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(int iterations, double last_cost)
        : Error("optimizer did not converge after " + std::to_string(iterations) +
                " iterations (cost " + std::to_string(last_cost) + ")"),
          iterations(iterations),
          last_cost(last_cost) {}
    int iterations;
    double last_cost;
};

// --- density tools ---

class GridTooSmall : public Error {
public:
    explicit GridTooSmall(std::size_t n)
        : Error("price curve needs at least 3 strikes, got " + std::to_string(n)) {}
};

class NoSolution : public Error {
public:
    explicit NoSolution(const std::string& detail) : Error("no implied vol: " + detail) {}
};

// --- validation ---

class TooShortSeries : public Error {
public:
    explicit TooShortSeries(std::size_t n)
        : Error("ATM series too short: " + std::to_string(n) + " points") {}
};

class MissingFit : public Error {
public:
    explicit MissingFit(std::int64_t timestamp)
        : Error("no fit available at timestamp " + std::to_string(timestamp)),
          timestamp(timestamp) {}
    std::int64_t timestamp;
};

class TooFewSamples : public Error {
public:
    TooFewSamples(std::size_t got, std::size_t need)
        : Error("need at least " + std::to_string(need) + " samples, got " +
                std::to_string(got)) {}
};

class SearchFailure : public Error {
public:
    explicit SearchFailure(const std::string& detail) : Error("eta search failed: " + detail) {}
};

// --- synthetic oracle ---

class QuadratureFailure : public Error {
public:
    explicit QuadratureFailure(double error_estimate)
        : Error("quadrature error estimate " + std::to_string(error_estimate) +
                " above tolerance") {}
};

}  // namespace impdist
