#pragma once

#include <string>

#include "lexrule/loader.hpp"
#include "lexrule/reasoner.hpp"
#include "lexrule/rule_model.hpp"

namespace support {

inline std::string fixture_path(const std::string& rel) {
    return std::string(LEXRULE_FIXTURES) + "/" + rel;
}

inline lexrule::RuleBase load_rules(const std::string& rel) {
    return lexrule::RuleBase::from_rules(lexrule::parse_rule_file(lexrule::read_file(fixture_path(rel))));
}

inline lexrule::FactBase load_facts(const std::string& rel) {
    return lexrule::parse_fact_file(lexrule::read_file(fixture_path(rel))).facts;
}

inline lexrule::RuleBase contract() { return load_rules("rules/contract.rules.json"); }
inline lexrule::RuleBase gdpr() { return load_rules("rules/gdpr.rules.json"); }

/// Structural invariants every non-cached proof node must satisfy. Returns an
/// empty string when they hold, otherwise a description of the first breach.
inline std::string check_node(const lexrule::RuleBase& rb, const lexrule::ProofNode& n) {
    using namespace lexrule;
    if (n.cached)
        return n.conditions.empty() && n.exceptions.empty() ? "" : "cached node with children";
    const Rule* r = rb.find(n.proposition);
    auto subset = [](const std::vector<ProofNode>& kids, const PropositionList& allowed) {
        for (const auto& k : kids)
            if (std::find(allowed.begin(), allowed.end(), k.proposition) == allowed.end())
                return false;
        return true;
    };
    if (r) {
        if (!subset(n.conditions, r->conditions))
            return n.proposition.str() + ": condition child outside the rule";
        if (!subset(n.exceptions, r->exceptions))
            return n.proposition.str() + ": exception child outside the rule";
    }
    if (n.status == NodeStatus::Defeated &&
        std::none_of(n.exceptions.begin(), n.exceptions.end(),
                     [](const ProofNode& k) { return k.holds(); }))
        return n.proposition.str() + ": DEFEATED without a holding exception";
    if (n.status == NodeStatus::Proved) {
        if (!r || n.via != Via::rule(r->op))
            return n.proposition.str() + ": PROVED without its rule";
        auto holding = std::count_if(n.conditions.begin(), n.conditions.end(),
                                     [](const ProofNode& k) { return k.holds(); });
        if (r->op == Operator::All && static_cast<std::size_t>(holding) != r->conditions.size())
            return n.proposition.str() + ": PROVED/ALL with a missing condition";
        if (r->op == Operator::Any && holding == 0)
            return n.proposition.str() + ": PROVED/ANY without a holding condition";
        if (std::any_of(n.exceptions.begin(), n.exceptions.end(),
                        [](const ProofNode& k) { return k.holds(); }))
            return n.proposition.str() + ": PROVED with a holding exception";
    }
    for (const auto* kids : {&n.conditions, &n.exceptions})
        for (const auto& k : *kids)
            if (auto msg = check_node(rb, k); !msg.empty())
                return msg;
    return "";
}

}  // namespace support
