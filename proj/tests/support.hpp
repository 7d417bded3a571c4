#pragma once

#include <gtest/gtest.h>

#include "dfw/error.hpp"

#define EXPECT_DFW_ERROR(stmt, expected_code)                                   \
  do {                                                                          \
    try {                                                                       \
      stmt;                                                                     \
      ADD_FAILURE() << "no dfw::Error thrown by " #stmt;                        \
    } catch (const dfw::Error& e_) {                                            \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                         \
    }                                                                           \
  } while (0)
