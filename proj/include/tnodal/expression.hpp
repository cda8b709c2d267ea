#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace tnodal {

/// Compiled scalar formula in the chart variables theta and phi.
///
/// Grammar: sums and products of numeric literals, `pi`, `theta`, `phi`, `sin(...)`, `cos(...)`,
/// unary minus and parentheses. Whitespace is ignored.
class Expression {
public:
    static Expression parse(std::string_view text);

    double operator()(double theta, double phi) const;

    const std::string& source() const { return source_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string source_;
};

}  // namespace tnodal
