#include <gtest/gtest.h>

TEST(Stub, Placeholder) { SUCCEED(); }
