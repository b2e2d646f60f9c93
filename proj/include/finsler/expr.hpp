#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/jets.hpp"

namespace finsler::expr {

/// Syntax error with the byte offset and 1-based line/column of the failure.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset, int line, int col)
        : std::runtime_error(what), offset(offset), line(line), col(col) {}
    std::size_t offset;
    int line;
    int col;
};

enum class NodeKind { Number, Var, Unary, Binary, Call };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Expression tree over numbers, chart variables x1..xn / y1..yn, the four
/// arithmetic operators plus ^, unary minus, and sqrt/exp/log/sin/cos.
struct Node {
    NodeKind kind;
    double number = 0.0;
    bool is_fiber = false;  // Var: false = x, true = y
    int index = 0;          // Var: 0-based
    char op = 0;            // Binary: + - * / ^ ; Unary: -
    std::string func;       // Call
    std::vector<NodePtr> kids;
};

NodePtr parse(std::string_view src);

std::string unparse(const Node& node);

bool equal(const Node& a, const Node& b);

/// Largest 1-based x / y variable index used (0 when absent).
int max_x_index(const Node& node);
int max_y_index(const Node& node);

/// Evaluate over jets; xs and ys are the coordinate jets (length n each).
jets::Jet eval(const Node& node, std::span<const jets::Jet> xs, std::span<const jets::Jet> ys);

/// Plain double evaluation (used by finite-difference paths).
double eval_value(const Node& node, std::span<const double> x, std::span<const double> y);

}  // namespace finsler::expr
