#include "lexrule/loader.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lexrule {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Severity s) {
    switch (s) {
        case Severity::Error: return "ERROR";
        case Severity::Warning: return "WARNING";
        case Severity::Info: return "INFO";
    }
    return "?";
}

std::string Diagnostic::subject_text() const {
    std::string out;
    for (const auto& s : subject)
        out += (out.empty() ? "" : "->") + s;
    return out;
}

std::string Diagnostic::render() const {
    return std::string(to_string(severity)) + " " + code + " " + subject_text() + ": " + message;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
    std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return std::tie(a.severity, a.subject, a.code) < std::tie(b.severity, b.subject, b.code);
    });
}

namespace {

json parse_json(std::string_view content) {
    try {
        return json::parse(content.begin(), content.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SyntaxError, e.what());
    }
}

PropositionList id_list(const json& obj, const char* key, std::size_t index) {
    const auto& v = obj.at(key);
    if (!v.is_array())
        throw Error(ErrorCode::SchemaError,
                    "rule " + std::to_string(index) + ": \"" + key + "\" must be an array");
    PropositionList out;
    for (const auto& item : v) {
        if (!item.is_string())
            throw Error(ErrorCode::SchemaError, "rule " + std::to_string(index) + ": \"" + key +
                                                    "\" entries must be strings");
        out.emplace_back(item.get<std::string>());
    }
    return out;
}

}  // namespace

std::vector<Rule> parse_rule_file(std::string_view content) {
    const json doc = parse_json(content);
    if (!doc.is_array())
        throw Error(ErrorCode::SchemaError, "rule file must be a JSON array of rule objects");

    static constexpr const char* keys[] = {"p", "op", "conditions", "exceptions"};
    std::vector<Rule> rules;
    rules.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& obj = doc[i];
        const auto where = "rule " + std::to_string(i);
        if (!obj.is_object())
            throw Error(ErrorCode::SchemaError, where + " is not an object");
        for (const auto& [k, _] : obj.items())
            if (std::find(std::begin(keys), std::end(keys), k) == std::end(keys))
                throw Error(ErrorCode::SchemaError, where + ": unknown key \"" + k + "\"");
        for (const char* k : keys)
            if (!obj.contains(k))
                throw Error(ErrorCode::SchemaError, where + ": missing key \"" + k + "\"");
        if (!obj["p"].is_string())
            throw Error(ErrorCode::SchemaError, where + ": \"p\" must be a string");
        if (!obj["op"].is_string())
            throw Error(ErrorCode::SchemaError, where + ": \"op\" must be a string");
        auto op = parse_operator(obj["op"].get<std::string>());
        if (!op)
            throw Error(ErrorCode::SchemaError,
                        where + ": \"op\" must be \"ALL\" or \"ANY\", got \"" +
                            obj["op"].get<std::string>() + "\"");
        rules.push_back(make_rule(PropositionId(obj["p"].get<std::string>()), *op,
                                  id_list(obj, "conditions", i), id_list(obj, "exceptions", i)));
    }
    return rules;
}

FactFile parse_fact_file(std::string_view content) {
    const json doc = parse_json(content);
    if (!doc.is_array())
        throw Error(ErrorCode::SchemaError, "fact file must be a JSON array of strings");
    FactFile out;
    for (const auto& item : doc) {
        if (!item.is_string())
            throw Error(ErrorCode::SchemaError, "fact file entries must be strings");
        PropositionId id(item.get<std::string>());
        if (!out.facts.insert(id))
            out.diagnostics.push_back({Severity::Warning, "DuplicateFact",
                                       "fact listed more than once", {id.str()}});
    }
    sort_diagnostics(out.diagnostics);
    return out;
}

Validation validate(const std::vector<Rule>& rules, const FactBase* facts) {
    Validation out;
    auto& diags = out.diagnostics;

    std::set<PropositionId> heads;
    std::set<PropositionId> reported;
    for (const auto& r : rules)
        if (!heads.insert(r.p).second && reported.insert(r.p).second)
            diags.push_back({Severity::Error, "DuplicateHead", "more than one rule for this head",
                             {r.p.str()}});

    for (const auto& cycle : find_cycles(rules)) {
        std::vector<std::string> path;
        for (const auto& id : cycle)
            path.push_back(id.str());
        diags.push_back({Severity::Error, "CyclicDependency", "rules depend on each other",
                         std::move(path)});
    }

    if (facts)
        for (const auto& head : heads)
            if (facts->contains(head))
                diags.push_back({Severity::Warning, "FactShadowsRule",
                                 "fact asserts a rule head; the rule and its exceptions are "
                                 "bypassed",
                                 {head.str()}});

    std::set<PropositionId> dangling;
    for (const auto& r : rules)
        for (const auto* list : {&r.conditions, &r.exceptions})
            for (const auto& id : *list)
                if (!heads.count(id))
                    dangling.insert(id);
    for (const auto& id : dangling)
        diags.push_back(
            {Severity::Info, "DanglingReference", "no rule derives this; only a fact can", {id.str()}});

    sort_diagnostics(diags);
    if (!has_errors(diags))
        out.rule_base = RuleBase::unchecked(rules);
    return out;
}

std::string serialize_rule_base(const RuleBase& rb) {
    ordered_json doc = ordered_json::array();
    for (const auto& [head, rule] : rb.rules()) {
        ordered_json obj;
        obj["p"] = head.str();
        obj["op"] = std::string(to_string(rule.op));
        obj["conditions"] = ordered_json::array();
        for (const auto& c : rule.conditions)
            obj["conditions"].push_back(c.str());
        obj["exceptions"] = ordered_json::array();
        for (const auto& e : rule.exceptions)
            obj["exceptions"].push_back(e.str());
        doc.push_back(std::move(obj));
    }
    return doc.empty() ? std::string("[]\n") : doc.dump(4) + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace lexrule
