#pragma once

#include <stdexcept>
#include <string>

namespace proxbridge {

// Base for all library failures; `type()` is a stable machine-readable tag
// the CLI maps into its error JSON.
class error : public std::runtime_error {
public:
  error(std::string type, const std::string& message)
      : std::runtime_error(message), type_(std::move(type)) {}
  const std::string& type() const noexcept { return type_; }

private:
  std::string type_;
};

class config_error : public error {
public:
  explicit config_error(const std::string& m) : error("config", m) {}
};

class data_error : public error {
public:
  explicit data_error(const std::string& m) : error("data", m) {}
};

class numeric_error : public error {
public:
  explicit numeric_error(const std::string& m) : error("numeric", m) {}
};

// The integral equation has no solution. A legitimate DGP outcome, kept
// distinct so callers can report it instead of treating it as a crash.
class no_bridge_error : public error {
public:
  explicit no_bridge_error(const std::string& m) : error("no_bridge", m) {}
};

}  // namespace proxbridge
