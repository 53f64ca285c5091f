#pragma once

#include <stdexcept>
#include <string>

namespace boicp {

/// Euler extraction requested at or beyond the pitch singularity.
class DegeneratePoseError : public std::runtime_error {
public:
    explicit DegeneratePoseError(const std::string& what) : std::runtime_error(what) {}
};

/// No correspondence survived the max-distance gate.
class NoOverlapError : public std::runtime_error {
public:
    explicit NoOverlapError(const std::string& what) : std::runtime_error(what) {}
};

/// Rigid solve is under-determined (too few or collinear pairs).
class DegenerateGeometryError : public std::runtime_error {
public:
    explicit DegenerateGeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Linear algebra failed beyond recovery (jitter ladder exhausted).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be parsed; message carries byte offset or line number.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace boicp
