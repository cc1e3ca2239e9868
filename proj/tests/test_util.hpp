#pragma once

#include <doctest.h>

#include <Eigen/Core>

#include "gmrgp/error.hpp"

// Checks that `expr` throws gmrgp::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                        \
  do {                                                          \
    bool thrown_ = false;                                       \
    try {                                                       \
      (void)(expr);                                             \
    } catch (const gmrgp::Error& e_) {                          \
      thrown_ = true;                                           \
      CHECK(e_.code() == gmrgp::ErrorCode::expected);           \
    }                                                           \
    CHECK_MESSAGE(thrown_, "expected " #expected " from " #expr); \
  } while (0)

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline std::string context_value(const gmrgp::Error& e, const std::string& key) {
  for (const auto& [k, v] : e.context()) {
    if (k == key) return v;
  }
  return {};
}
