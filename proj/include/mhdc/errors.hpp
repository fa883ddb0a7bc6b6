// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mhdc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define MHDC_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

MHDC_DEFINE_ERROR(OutOfBall);
MHDC_DEFINE_ERROR(NotTraceless);
MHDC_DEFINE_ERROR(OrderingViolated);
MHDC_DEFINE_ERROR(NegativeTime);
MHDC_DEFINE_ERROR(GridTooCoarse);
MHDC_DEFINE_ERROR(BallExceeded);
MHDC_DEFINE_ERROR(InsufficientSamples);
MHDC_DEFINE_ERROR(DivergenceDetected);
MHDC_DEFINE_ERROR(IncompatibleRescale);
MHDC_DEFINE_ERROR(ConfigError);
MHDC_DEFINE_ERROR(IoError);
MHDC_DEFINE_ERROR(MemoryBudgetExceeded);

#undef MHDC_DEFINE_ERROR

}  // namespace mhdc
