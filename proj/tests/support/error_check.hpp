#pragma once

#include <optional>
#include <string>

#include "error.hpp"

namespace testing {

// Code of the hlucb::Error thrown by `fn`, or nullopt if it returns normally.
template <class Fn>
std::optional<hlucb::ErrorCode> error_code(Fn&& fn) {
  try {
    fn();
  } catch (const hlucb::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

template <class Fn>
std::string error_message(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace testing
