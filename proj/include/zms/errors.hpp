#pragma once
// Error taxonomy shared across the library.
//
//  - std::invalid_argument      malformed inputs, bad configuration keys
//  - zms::capability_error      request is well-formed but outside what this
//                               build can compute (maps to CLI exit code 3)
//  - zms::protocol_error        a protocol run aborted; carries the offending
//                               sender id and phase for diagnostics
//  - zms::disqualified_error    a game attacker violated a structural
//                               constraint it is required to preserve

#include <stdexcept>
#include <string>

namespace zms {

class capability_error : public std::runtime_error {
 public:
  explicit capability_error(const std::string& what) : std::runtime_error(what) {}
};

class protocol_error : public std::runtime_error {
 public:
  protocol_error(const std::string& what, int sender, int phase)
      : std::runtime_error(what), sender_(sender), phase_(phase) {}
  int sender() const noexcept { return sender_; }
  int phase() const noexcept { return phase_; }

 private:
  int sender_;
  int phase_;
};

class disqualified_error : public std::runtime_error {
 public:
  explicit disqualified_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace zms
