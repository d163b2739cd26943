#pragma once

#include <stdexcept>
#include <string>

namespace tpa {

// Exit-code classes used by the CLI: 1 usage/IO, 2 physics/solver.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the validity range of a formula or model.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The HE11 sign scan found no bracketed root of the dispersion relation.
class NoGuidedModeError : public Error {
 public:
  using Error::Error;
};

/// Quadrature or root polish failed to reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed inputs: spectra, grids, model parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tpa
