#pragma once

#include <stdexcept>
#include <string>

namespace tfm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid distribution, mechanism or solver parameters.
class ParameterError : public Error
{
public:
  using Error::Error;
};

/// Input outside the domain an operation is defined on (empty mempool, c = 0, ...).
class DomainError : public Error
{
public:
  using Error::Error;
};

/// Exact knapsack requested on a mempool larger than the exhaustive limit.
class SolverLimitError : public Error
{
public:
  using Error::Error;
};

/// A posted-price section contains a transaction whose bid is below the base fee.
class InfeasibleInclusionError : public Error
{
public:
  using Error::Error;
};

class MiningTimeoutError : public Error
{
public:
  using Error::Error;
};

/// Caller violated an operation's precondition (e.g. tossing an unmined hash).
class PreconditionError : public Error
{
public:
  using Error::Error;
};

/// Search space of an auditor exceeded its configured bound.
class LimitError : public Error
{
public:
  using Error::Error;
};

/// Instance on which a ratio is undefined (OPT = 0, zero mechanism utility).
class DegenerateInstanceError : public Error
{
public:
  using Error::Error;
};

/// No parameter value on the searched interval satisfies the constraint.
class InfeasibleError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  IoError(std::string const &path, std::string const &what)
    : Error(path + ": " + what)
    , path_(path)
  {}

  std::string const &path() const noexcept
  {
    return path_;
  }

private:
  std::string path_;
};

}  // namespace tfm
