#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexrule/rule_model.hpp"

namespace lexrule {

/// Evaluation order. Changes trace shape and cost, never whether a goal holds.
enum class Strategy { ExceptionFirst, ConditionsFirst, Racing };

std::string_view to_string(Strategy s);
/// Accepts "EXCEPTION_FIRST", "exception-first", etc. Throws UnknownStrategy.
Strategy parse_strategy(std::string_view text);

enum class NodeStatus { EstablishedFact, Proved, Failed, Defeated, NoDerivation, CycleGuard };

std::string_view to_string(NodeStatus s);
std::optional<NodeStatus> parse_node_status(std::string_view text);

constexpr bool holds(NodeStatus s) noexcept {
    return s == NodeStatus::EstablishedFact || s == NodeStatus::Proved;
}

/// How a node's status was obtained.
struct Via {
    enum class Kind { Fact, Rule, None };
    Kind kind = Kind::None;
    Operator op = Operator::All;  // meaningful only for Kind::Rule

    static Via fact() { return {Kind::Fact, Operator::All}; }
    static Via rule(Operator op) { return {Kind::Rule, op}; }
    static Via none() { return {Kind::None, Operator::All}; }

    std::string text() const;  // FACT | RULE(ALL) | RULE(ANY) | NONE
    static std::optional<Via> parse(std::string_view text);

    friend bool operator==(const Via& a, const Via& b) {
        return a.kind == b.kind && (a.kind != Kind::Rule || a.op == b.op);
    }
};

/// Which branch of a rule expansion ran first.
enum class OrderNote { None, ExceptionsFirst, ConditionsFirst, Raced };

std::string_view to_string(OrderNote n);
std::optional<OrderNote> parse_order_note(std::string_view text);

struct ProofNode {
    PropositionId proposition;
    NodeStatus status;
    Via via;
    OrderNote order_note = OrderNote::None;
    bool cached = false;  // memoized result; children live at the first occurrence
    std::vector<ProofNode> conditions;
    std::vector<ProofNode> exceptions;

    bool holds() const noexcept { return lexrule::holds(status); }

    friend bool operator==(const ProofNode&, const ProofNode&) = default;
};

struct EvalStats {
    std::uint64_t propositions_evaluated = 0;
    std::uint64_t rule_expansions = 0;
    std::uint64_t fact_lookups = 0;
    Strategy strategy = Strategy::ExceptionFirst;

    friend bool operator==(const EvalStats&, const EvalStats&) = default;
};

struct Verdict {
    PropositionId goal;
    bool holds;
    ProofNode root;
    EvalStats stats;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

inline bool holds(const Verdict& v) noexcept { return v.holds; }

enum class CyclePolicy {
    Throw,  // GuardTripped
    Mark,   // CYCLE_GUARD node, which does not hold
};

struct EvalOptions {
    /// Upper bound on concurrently running workers during RACING, counting the
    /// calling thread. 1 disables concurrency.
    std::size_t max_workers = 2;
    CyclePolicy cycle_policy = CyclePolicy::Throw;
};

struct CaseQuery {
    PropositionId goal;
    FactBase facts;
    Strategy strategy = Strategy::ExceptionFirst;
};

/// Goal-driven evaluation. A fact short-circuits everything, including a rule
/// for the same head. Otherwise a rule's head is DEFEATED when any exception
/// holds, PROVED when its conditions satisfy the operator (ALL over nothing is
/// true, ANY over nothing is false), and FAILED otherwise. Propositions with
/// neither a fact nor a rule are NO_DERIVATION.
Verdict evaluate(const RuleBase& rb, const FactBase& facts, const PropositionId& goal,
                 Strategy strategy = Strategy::ExceptionFirst, const EvalOptions& options = {});

inline Verdict evaluate(const RuleBase& rb, const CaseQuery& q, const EvalOptions& options = {}) {
    return evaluate(rb, q.facts, q.goal, q.strategy, options);
}

enum class ExplainFormat { Text, Structured };

/// Text: indented tree, one `proposition [STATUS] (via)` line per node;
/// exception children are prefixed with "unless ". Structured: compact JSON.
std::string explain(const Verdict& v, ExplainFormat format);

std::string proof_to_json(const ProofNode& node);
/// Inverse of proof_to_json. Throws SyntaxError or SchemaError.
ProofNode proof_from_json(std::string_view text);

}  // namespace lexrule
