#pragma once

#include <stdexcept>
#include <string>

namespace plcprov {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or rejected input document (config, trace, policy file).
// The message starts with a location ("file:line:" or a JSON path) when known.
class ParseError : public Error {
public:
    using Error::Error;
};

// Lookup of an id that does not exist (node, actuator, scenario, violation).
class NotFoundError : public Error {
public:
    using Error::Error;
};

// Arithmetic outside the checked domain (e.g. timestamp overflow bounds).
class BoundsError : public Error {
public:
    using Error::Error;
};

// A precondition that callers must establish (validated topology,
// typechecked programs) was found violated.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace plcprov
