#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexrule/loader.hpp"
#include "lexrule/rule_model.hpp"

namespace lexrule::proleg {

struct Clause {
    PropositionId head;
    PropositionList body;  // empty for a unit clause `p.`

    friend bool operator==(const Clause&, const Clause&) = default;
};

struct ExceptionDecl {
    PropositionId head;
    PropositionId exception;

    friend bool operator==(const ExceptionDecl&, const ExceptionDecl&) = default;
};

/// Propositional clause text: clauses plus `exception(head, e).` declarations.
struct ClauseDoc {
    std::vector<Clause> clauses;
    std::vector<ExceptionDecl> exception_decls;

    friend bool operator==(const ClauseDoc&, const ClauseDoc&) = default;
};

/// ALL rules become one clause, ANY rules one clause per condition, each
/// exception one `exception/2` fact. Heads are emitted in sorted order.
ClauseDoc to_clauses(const RuleBase& rb);
std::string render(const ClauseDoc& doc);

inline std::string export_proleg(const RuleBase& rb) { return render(to_clauses(rb)); }

/// One clause per line, `%` comments. Throws SyntaxError, NonPropositional.
ClauseDoc parse_clauses(std::string_view text);

/// Folds a parsed document back into rules. Throws UnsupportedShape,
/// OrphanException and the rule-base construction errors.
std::vector<Rule> to_rules(const ClauseDoc& doc);

struct Imported {
    RuleBase rule_base;
    std::vector<Diagnostic> diagnostics;
};

Imported import_proleg(std::string_view text);

/// A fact set on which the two rule bases disagree about `goal`, if any. Every
/// subset of the union of their leaves is tried. Throws TooManyLeaves.
std::optional<FactBase> find_disagreement(const RuleBase& a, const RuleBase& b,
                                          const PropositionId& goal, std::size_t max_leaves = 15);

inline bool semantic_equivalence(const RuleBase& a, const RuleBase& b, const PropositionId& goal,
                                 std::size_t max_leaves = 15) {
    return !find_disagreement(a, b, goal, max_leaves).has_value();
}

}  // namespace lexrule::proleg
