#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexrule/rule_model.hpp"

namespace lexrule {

enum class Severity { Error = 0, Warning = 1, Info = 2 };

std::string_view to_string(Severity s);

/// Static-analysis finding. Codes: DuplicateHead, CyclicDependency (ERROR);
/// FactShadowsRule, DuplicateFact (WARNING); DanglingReference (INFO).
struct Diagnostic {
    Severity severity;
    std::string code;
    std::string message;
    std::vector<std::string> subject;  // one id, or a cycle path

    std::string subject_text() const;
    /// `SEVERITY CODE subject: message`
    std::string render() const;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

bool has_errors(const std::vector<Diagnostic>& diags);
/// Stable order: severity first (ERROR..INFO), then subject, then code.
void sort_diagnostics(std::vector<Diagnostic>& diags);

/// Rule file: a JSON array of objects with exactly the keys "p", "op",
/// "conditions", "exceptions". Throws SyntaxError, SchemaError, BadIdentifier
/// and the make_rule errors.
std::vector<Rule> parse_rule_file(std::string_view content);

struct FactFile {
    FactBase facts;
    std::vector<Diagnostic> diagnostics;  // DuplicateFact warnings
};

/// Fact file: a JSON array of identifier strings.
FactFile parse_fact_file(std::string_view content);

struct Validation {
    std::optional<RuleBase> rule_base;  // present iff no ERROR diagnostics
    std::vector<Diagnostic> diagnostics;
};

Validation validate(const std::vector<Rule>& rules, const FactBase* facts = nullptr);

inline std::vector<std::vector<PropositionId>> detect_cycles(const std::vector<Rule>& rules) {
    return find_cycles(rules);
}

/// Pretty-printed rule file; rules in head order, list order preserved.
std::string serialize_rule_base(const RuleBase& rb);

std::string read_file(const std::string& path);  // throws std::runtime_error

}  // namespace lexrule
