#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rap {

// Base for every error raised by the library. Each subclass corresponds to
// one failure mode named in the public contracts.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidLaw : public Error {
 public:
  using Error::Error;
};

class SpanViolation : public Error {
 public:
  using Error::Error;
};

class UnsupportedLaw : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class TimeUnderflow : public Error {
 public:
  using Error::Error;
};

class ProfileError : public Error {
 public:
  using Error::Error;
};

class WindowExhausted : public Error {
 public:
  using Error::Error;
};

class InsufficientReplicates : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised while reading an experiment config; `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A limit-seeking iteration ran out of budget. The last two iterates are kept
// so callers can judge how far from convergence it stopped.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, long budget, double previous, double last)
      : Error(what), budget_(budget), previous_(previous), last_(last) {}
  long budget() const noexcept { return budget_; }
  double previous() const noexcept { return previous_; }
  double last() const noexcept { return last_; }

 private:
  long budget_;
  double previous_;
  double last_;
};

}  // namespace rap
