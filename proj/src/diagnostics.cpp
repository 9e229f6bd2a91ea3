#include "fpara/diagnostics.hpp"

#include <iostream>
#include <utility>

namespace fpara {
namespace {

WarningHandler& handler() {
  static WarningHandler h = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
  return h;
}

}  // namespace

void warn(const std::string& message) {
  if (handler()) handler()(message);
}

WarningHandler set_warning_handler(WarningHandler h) { return std::exchange(handler(), std::move(h)); }

}  // namespace fpara
