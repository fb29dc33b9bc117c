#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lexrule/errors.hpp"

namespace lexrule {

/// Identifier of an atomic proposition. Always matches ^[a-z][a-z0-9_]*$.
class PropositionId {
public:
    /// Throws Error(BadIdentifier) when `text` is not a valid identifier.
    explicit PropositionId(std::string text);

    static bool is_valid(std::string_view text) noexcept;

    const std::string& str() const noexcept { return value_; }

    friend bool operator==(const PropositionId&, const PropositionId&) = default;
    friend auto operator<=>(const PropositionId&, const PropositionId&) = default;

private:
    std::string value_;
};

using PropositionList = std::vector<PropositionId>;

/// Parses every element; throws BadIdentifier on the first invalid one.
PropositionList to_propositions(const std::vector<std::string>& names);
PropositionList to_propositions(std::initializer_list<std::string_view> names);

enum class Operator { All, Any };

std::string_view to_string(Operator op);
/// Exact, case-sensitive: "ALL" or "ANY".
std::optional<Operator> parse_operator(std::string_view text);

/// One defeasible rule. Construct through make_rule so the invariants hold.
struct Rule {
    PropositionId p;
    Operator op;
    PropositionList conditions;
    PropositionList exceptions;

    friend bool operator==(const Rule&, const Rule&) = default;
};

/// Throws DuplicateEntry or SelfReference.
Rule make_rule(PropositionId p, Operator op, PropositionList conditions,
               PropositionList exceptions);

/// Returns every cycle reachable through condition/exception references, each
/// path starting and ending on the same proposition. Heads are visited in the
/// given order, so the result is deterministic.
std::vector<std::vector<PropositionId>> find_cycles(const std::vector<Rule>& rules);

/// Validated, immutable collection of rules indexed by head.
class RuleBase {
public:
    RuleBase() = default;

    /// Throws DuplicateHead or CyclicDependency.
    static RuleBase from_rules(std::vector<Rule> rules);

    /// Skips the duplicate-head and acyclicity checks. Only for exercising the
    /// reasoner's runtime cycle guard.
    static RuleBase unchecked(std::vector<Rule> rules);

    const Rule* find(const PropositionId& head) const;
    bool has_rule(const PropositionId& head) const { return find(head) != nullptr; }

    const std::map<PropositionId, Rule>& rules() const noexcept { return rules_; }
    std::size_t size() const noexcept { return rules_.size(); }
    bool empty() const noexcept { return rules_.empty(); }

    std::vector<PropositionId> heads() const;

    /// Outgoing dependency edges of `head` (conditions then exceptions,
    /// deduplicated). Empty for propositions without a rule.
    const PropositionList& dependencies(const PropositionId& head) const;

    friend bool operator==(const RuleBase& a, const RuleBase& b) { return a.rules_ == b.rules_; }

private:
    std::map<PropositionId, Rule> rules_;
    std::map<PropositionId, PropositionList> graph_;
};

inline RuleBase rule_base_from_rules(std::vector<Rule> rules) {
    return RuleBase::from_rules(std::move(rules));
}

/// Propositions referenced by some rule that are not themselves rule heads.
std::set<PropositionId> leaves(const RuleBase& rb);

/// Longest dependency chain (in edges) starting from any head. 0 for an empty base.
std::size_t dependency_depth(const RuleBase& rb);

/// Propositions asserted true for one case.
class FactBase {
public:
    FactBase() = default;
    explicit FactBase(std::set<PropositionId> facts) : facts_(std::move(facts)) {}
    FactBase(std::initializer_list<std::string_view> names);

    /// Returns false if the fact was already present.
    bool insert(PropositionId p) { return facts_.insert(std::move(p)).second; }
    bool contains(const PropositionId& p) const { return facts_.count(p) != 0; }

    const std::set<PropositionId>& facts() const noexcept { return facts_; }
    std::size_t size() const noexcept { return facts_.size(); }
    bool empty() const noexcept { return facts_.empty(); }

    friend bool operator==(const FactBase&, const FactBase&) = default;

private:
    std::set<PropositionId> facts_;
};

}  // namespace lexrule

template <>
struct std::hash<lexrule::PropositionId> {
    std::size_t operator()(const lexrule::PropositionId& p) const noexcept {
        return std::hash<std::string>{}(p.str());
    }
};
