#pragma once

#include <string>

namespace ehrhard {

enum class Regime { parabolic, elliptic, infeasible };

std::string to_string(Regime r);

struct Weights {
    double a = 0.5;
    double b = 0.5;

    double mix() const { return 1.0 - a * a - b * b; }
    Regime regime() const;
};

}  // namespace ehrhard
