#pragma once

#include <stdexcept>
#include <string>

namespace scene4d {

// Base for every error the engine raises deliberately.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class InputFormatError : public Error {
 public:
  using Error::Error;
};

// A point cloud held fewer points than requested.
class CountError : public Error {
 public:
  using Error::Error;
};

// An argument fell outside a parameter domain (time outside [0, t_max], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// A render or gradient contained NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

// The initial pose of a moving object already intersects another object.
class UnrecoverablePlacementError : public Error {
 public:
  using Error::Error;
};

class UnresolvedEntityError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

}  // namespace scene4d
