#include "lexrule/proleg_bridge.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "lexrule/reasoner.hpp"

namespace lexrule::proleg {

ClauseDoc to_clauses(const RuleBase& rb) {
    ClauseDoc doc;
    for (const auto& [head, rule] : rb.rules()) {
        if (rule.op == Operator::Any) {
            // ANY over nothing can never hold: no clause at all, and its
            // exceptions would have nothing to attach to.
            if (rule.conditions.empty())
                continue;
            for (const auto& c : rule.conditions)
                doc.clauses.push_back({head, {c}});
        } else {
            doc.clauses.push_back({head, rule.conditions});
        }
        for (const auto& e : rule.exceptions)
            doc.exception_decls.push_back({head, e});
    }
    return doc;
}

std::string render(const ClauseDoc& doc) {
    std::vector<PropositionId> order;
    auto note = [&](const PropositionId& h) {
        if (std::find(order.begin(), order.end(), h) == order.end())
            order.push_back(h);
    };
    for (const auto& c : doc.clauses)
        note(c.head);
    for (const auto& d : doc.exception_decls)
        note(d.head);

    std::string out;
    for (const auto& head : order) {
        for (const auto& c : doc.clauses) {
            if (c.head != head)
                continue;
            out += head.str();
            for (std::size_t i = 0; i < c.body.size(); ++i)
                out += (i == 0 ? " :- " : ", ") + c.body[i].str();
            out += ".\n";
        }
        for (const auto& d : doc.exception_decls)
            if (d.head == head)
                out += "exception(" + head.str() + ", " + d.exception.str() + ").\n";
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(ErrorCode code, std::size_t line, const std::string& what) {
    throw Error(code, "line " + std::to_string(line) + ": " + what);
}

// Splits on commas that are not nested inside parentheses.
std::vector<std::string_view> split_top_level(std::string_view s, std::size_t line) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(')
            ++depth;
        else if (s[i] == ')' && --depth < 0)
            fail(ErrorCode::SyntaxError, line, "unbalanced ')'");
        else if (s[i] == ',' && depth == 0) {
            parts.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    if (depth != 0)
        fail(ErrorCode::SyntaxError, line, "unbalanced '('");
    parts.push_back(trim(s.substr(start)));
    return parts;
}

PropositionId atom(std::string_view text, std::size_t line) {
    if (text.empty())
        fail(ErrorCode::SyntaxError, line, "empty term");
    if (text.find('(') != std::string_view::npos)
        fail(ErrorCode::NonPropositional, line,
             "'" + std::string(text) + "' has arguments; only arity-0 atoms are supported");
    const char c = text.front();
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_')
        fail(ErrorCode::NonPropositional, line, "'" + std::string(text) + "' is a variable");
    if (!PropositionId::is_valid(text))
        fail(ErrorCode::SyntaxError, line, "'" + std::string(text) + "' is not an atom");
    return PropositionId(std::string(text));
}

}  // namespace

ClauseDoc parse_clauses(std::string_view text) {
    ClauseDoc doc;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (auto pct = line.find('%'); pct != std::string_view::npos)
            line = line.substr(0, pct);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.back() != '.')
            fail(ErrorCode::SyntaxError, line_no, "clause must end with '.'");
        line = trim(line.substr(0, line.size() - 1));

        if (line.rfind("exception(", 0) == 0) {
            if (line.back() != ')')
                fail(ErrorCode::SyntaxError, line_no, "malformed exception declaration");
            auto inner = line.substr(10, line.size() - 11);
            auto args = split_top_level(inner, line_no);
            if (args.size() != 2)
                fail(ErrorCode::SyntaxError, line_no, "exception/2 takes two arguments");
            doc.exception_decls.push_back({atom(args[0], line_no), atom(args[1], line_no)});
            continue;
        }

        auto sep = line.find(":-");
        Clause clause{atom(trim(line.substr(0, sep)), line_no), {}};
        if (sep != std::string_view::npos) {
            auto body = trim(line.substr(sep + 2));
            for (auto part : split_top_level(body, line_no))
                clause.body.push_back(atom(part, line_no));
        }
        doc.clauses.push_back(std::move(clause));
    }
    return doc;
}

std::vector<Rule> to_rules(const ClauseDoc& doc) {
    std::vector<PropositionId> order;
    std::map<PropositionId, std::vector<const Clause*>> by_head;
    for (const auto& c : doc.clauses) {
        auto& list = by_head[c.head];
        if (list.empty())
            order.push_back(c.head);
        list.push_back(&c);
    }

    std::map<PropositionId, PropositionList> exceptions;
    for (const auto& d : doc.exception_decls) {
        if (!by_head.count(d.head))
            throw Error(ErrorCode::OrphanException,
                        "exception declared for '" + d.head.str() + "' which has no clause",
                        {d.head.str()});
        exceptions[d.head].push_back(d.exception);
    }

    std::vector<Rule> rules;
    for (const auto& head : order) {
        const auto& clauses = by_head[head];
        auto excs = exceptions[head];
        const bool single_atoms = std::all_of(clauses.begin(), clauses.end(),
                                              [](const Clause* c) { return c->body.size() == 1; });
        if (single_atoms) {
            PropositionList conds;
            for (const auto* c : clauses)
                conds.push_back(c->body.front());
            rules.push_back(make_rule(head, Operator::Any, std::move(conds), std::move(excs)));
        } else if (clauses.size() == 1) {
            rules.push_back(make_rule(head, Operator::All, clauses.front()->body, std::move(excs)));
        } else {
            throw Error(ErrorCode::UnsupportedShape,
                        "'" + head.str() +
                            "' mixes clause shapes; only one conjunctive clause or several "
                            "single-atom clauses are supported",
                        {head.str()});
        }
    }
    return rules;
}

Imported import_proleg(std::string_view text) {
    auto rules = to_rules(parse_clauses(text));
    auto checked = validate(rules);
    if (!checked.rule_base)
        RuleBase::from_rules(rules);  // rethrows the first structural error
    return {std::move(*checked.rule_base), std::move(checked.diagnostics)};
}

std::optional<FactBase> find_disagreement(const RuleBase& a, const RuleBase& b,
                                          const PropositionId& goal, std::size_t max_leaves) {
    auto pool = leaves(a);
    auto more = leaves(b);
    pool.insert(more.begin(), more.end());
    if (pool.size() > max_leaves || pool.size() >= 63)
        throw Error(ErrorCode::TooManyLeaves,
                    std::to_string(pool.size()) + " leaves exceed the limit of " +
                        std::to_string(max_leaves));

    const std::vector<PropositionId> ids(pool.begin(), pool.end());
    const std::uint64_t subsets = std::uint64_t{1} << ids.size();
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        FactBase facts;
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (mask & (std::uint64_t{1} << i))
                facts.insert(ids[i]);
        if (evaluate(a, facts, goal).holds != evaluate(b, facts, goal).holds)
            return facts;
    }
    return std::nullopt;
}

}  // namespace lexrule::proleg
