#ifndef TICKGRAPH_ERROR_HPP
#define TICKGRAPH_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tickgraph {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A bigraph constructor was given operands outside its precondition.
class ConstructionError : public Error {
public:
    enum class Kind { arity_mismatch, param_mismatch, site_count, region_count, atomic_parent, name_clash, invalid_config };

    ConstructionError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Rule application or rule/family construction failed.
class RewriteError : public Error {
public:
    enum class Kind { stale_match, condition_violated, invalid_rule, empty_domain, invalid_result };

    RewriteError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Exploration hit its state budget. Carries the size of the partial result.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(std::size_t states, std::size_t frontier)
        : Error("state budget exceeded: " + std::to_string(states) + " states, " + std::to_string(frontier) +
                " unexplored in frontier"),
          states_(states),
          frontier_(frontier)
    {
    }
    std::size_t states() const noexcept { return states_; }
    std::size_t frontier() const noexcept { return frontier_; }

private:
    std::size_t states_;
    std::size_t frontier_;
};

/// A position in a source text; line and column are 1-based.
struct SourcePos {
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t offset = 0;
};

/// Lexical, syntax or elaboration problem in a DSL or property document.
class SourceError : public Error {
public:
    SourceError(SourcePos pos, const std::string& message)
        : Error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
          pos_(pos),
          message_(message)
    {
    }
    SourcePos pos() const noexcept { return pos_; }
    const std::string& message() const noexcept { return message_; }

private:
    SourcePos pos_;
    std::string message_;
};

class ParseError : public SourceError {
public:
    using SourceError::SourceError;
};

class ElaborationError : public SourceError {
public:
    using SourceError::SourceError;
};

} // namespace tickgraph

#endif
