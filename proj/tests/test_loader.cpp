#include <doctest.h>

#include <random>

#include "lexrule/loader.hpp"
#include "lexrule/strategy_lab.hpp"
#include "support.hpp"

using namespace lexrule;

namespace {

ErrorCode parse_error(std::string_view text) {
    try {
        parse_rule_file(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a parse error");
    return ErrorCode::InvalidArgument;
}

const Diagnostic* find_code(const std::vector<Diagnostic>& diags, std::string_view code) {
    for (const auto& d : diags)
        if (d.code == code)
            return &d;
    return nullptr;
}

}  // namespace

TEST_CASE("parse_rule_file: GDPR erasure rule") {
    auto rules = parse_rule_file(read_file(support::fixture_path("rules/gdpr.rules.json")));
    REQUIRE(rules.size() == 1);
    CHECK(rules[0].p.str() == "art17_erasure_applicable");
    CHECK(rules[0].op == Operator::Any);
    CHECK(rules[0].conditions ==
          to_propositions({"no_longer_necessary", "consent_withdrawn", "object_to_processing",
                           "processing_unlawful", "child_data_collected"}));
    CHECK(rules[0].exceptions == to_propositions({"freedom_of_expression", "legal_obligation",
                                                  "public_interest_archiving_research",
                                                  "legal_claims"}));
}

TEST_CASE("parse_rule_file: schema") {
    CHECK(parse_rule_file("[]").empty());
    CHECK(parse_rule_file("  [ ]\n").empty());
    CHECK(parse_error(read_file(support::fixture_path("invalid/lowercase_op.rules.json"))) ==
          ErrorCode::SchemaError);
    CHECK(parse_error(R"([{"p":"x","op":"ALL","conditions":[]}])") == ErrorCode::SchemaError);
    CHECK(parse_error(R"([{"p":"x","op":"ALL","conditions":[],"exceptions":[],"priority":1}])") ==
          ErrorCode::SchemaError);
    CHECK(parse_error(R"({"p":"x","op":"ALL","conditions":[],"exceptions":[]})") ==
          ErrorCode::SchemaError);
    CHECK(parse_error(R"([{"p":"x","op":"ALL","conditions":"a","exceptions":[]}])") ==
          ErrorCode::SchemaError);
    CHECK(parse_error(R"([{"p":"x","op":"ALL","conditions":[1],"exceptions":[]}])") ==
          ErrorCode::SchemaError);
    CHECK(parse_error(R"([{"p":1,"op":"ALL","conditions":[],"exceptions":[]}])") ==
          ErrorCode::SchemaError);
    CHECK(parse_error(R"([["x"]])") == ErrorCode::SchemaError);
    CHECK(parse_error(R"([{"p":"X","op":"ALL","conditions":[],"exceptions":[]}])") ==
          ErrorCode::BadIdentifier);
    CHECK(parse_error(R"([{"p":"x","op":"ALL","conditions":["x"],"exceptions":[]}])") ==
          ErrorCode::SelfReference);
    CHECK(parse_error("[{") == ErrorCode::SyntaxError);
    CHECK(parse_error("") == ErrorCode::SyntaxError);
}

TEST_CASE("parse_fact_file") {
    auto illustrative = parse_fact_file(R"([
        "objection_to_direct_marketing",
        "data_collected_from_child",
        "consent_was_basis",
        "consent_is_withdrawn",
        "data_not_needed_for_purpose"
    ])");
    CHECK(illustrative.facts.size() == 5);
    CHECK(illustrative.diagnostics.empty());

    CHECK(parse_fact_file("[]").facts.empty());

    auto dup = parse_fact_file(R"(["a","a"])");
    CHECK(dup.facts == FactBase{"a"});
    REQUIRE(dup.diagnostics.size() == 1);
    CHECK(dup.diagnostics[0].severity == Severity::Warning);
    CHECK(dup.diagnostics[0].code == "DuplicateFact");

    auto code = [](std::string_view t) {
        try {
            parse_fact_file(t);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code(R"(["a", 3])") == ErrorCode::SchemaError);
    CHECK(code(R"({"a":1})") == ErrorCode::SchemaError);
    CHECK(code(R"(["Has Caps"])") == ErrorCode::BadIdentifier);
    CHECK(code("[\"a\"") == ErrorCode::SyntaxError);
}

TEST_CASE("validate") {
    auto contract_rules = parse_rule_file(read_file(support::fixture_path("rules/contract.rules.json")));

    SUBCASE("contract with a leaf fact: nothing above INFO") {
        FactBase facts{"minor"};
        auto v = validate(contract_rules, &facts);
        REQUIRE(v.rule_base.has_value());
        CHECK(*v.rule_base == support::contract());
        for (const auto& d : v.diagnostics) {
            CHECK(d.severity == Severity::Info);
            CHECK(d.code == "DanglingReference");
        }
        CHECK(v.diagnostics.size() == 3);
    }
    SUBCASE("cycle") {
        auto v = validate(parse_rule_file(read_file(support::fixture_path("invalid/cyclic.rules.json"))));
        CHECK_FALSE(v.rule_base.has_value());
        auto* d = find_code(v.diagnostics, "CyclicDependency");
        REQUIRE(d != nullptr);
        CHECK(d->severity == Severity::Error);
        CHECK(d->subject == std::vector<std::string>{"a", "b", "a"});
        CHECK(d->render() == "ERROR CyclicDependency a->b->a: rules depend on each other");
    }
    SUBCASE("fact asserting a rule head") {
        FactBase facts{"contract_voidable"};
        auto v = validate(contract_rules, &facts);
        CHECK(v.rule_base.has_value());
        auto* d = find_code(v.diagnostics, "FactShadowsRule");
        REQUIRE(d != nullptr);
        CHECK(d->severity == Severity::Warning);
        CHECK(d->subject == std::vector<std::string>{"contract_voidable"});
    }
    SUBCASE("duplicate head reported once") {
        std::vector<Rule> rules{make_rule(PropositionId("a"), Operator::All, {}, {}),
                                make_rule(PropositionId("a"), Operator::Any, {}, {}),
                                make_rule(PropositionId("a"), Operator::Any, {}, {})};
        auto v = validate(rules);
        CHECK_FALSE(v.rule_base);
        CHECK(v.diagnostics.size() == 1);
        CHECK(v.diagnostics[0].code == "DuplicateHead");
    }
    SUBCASE("stable order: severity, then subject") {
        std::vector<Rule> rules{
            make_rule(PropositionId("z"), Operator::All, to_propositions({"y", "m"}), {}),
            make_rule(PropositionId("y"), Operator::All, to_propositions({"z"}), {}),
            make_rule(PropositionId("b"), Operator::All, to_propositions({"a"}), {})};
        FactBase facts{"b"};
        auto v = validate(rules, &facts);
        REQUIRE(v.diagnostics.size() == 4);
        CHECK(v.diagnostics[0].severity == Severity::Error);
        CHECK(v.diagnostics[1].code == "FactShadowsRule");
        CHECK(v.diagnostics[2].subject == std::vector<std::string>{"a"});
        CHECK(v.diagnostics[3].subject == std::vector<std::string>{"m"});
        CHECK(validate(rules, &facts).diagnostics == v.diagnostics);
    }
}

TEST_CASE("detect_cycles examples") {
    std::vector<Rule> two{make_rule(PropositionId("a"), Operator::All, to_propositions({"b"}), {}),
                          make_rule(PropositionId("b"), Operator::Any, to_propositions({"a"}), {})};
    auto cycles = detect_cycles(two);
    REQUIRE(cycles.size() == 1);
    CHECK(cycles[0] == to_propositions({"a", "b", "a"}));

    CHECK(detect_cycles(parse_rule_file(read_file(support::fixture_path("rules/contract.rules.json")))).empty());

    std::vector<Rule> chain{make_rule(PropositionId("a"), Operator::All, to_propositions({"b"}), {}),
                            make_rule(PropositionId("b"), Operator::All, to_propositions({"c"}), {})};
    CHECK(detect_cycles(chain).empty());
}

TEST_CASE("detect_cycles agrees with transitive closure on random graphs") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 20);
        const double density = (rng() % 100) / 400.0;
        std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
        std::vector<Rule> rules;
        for (int i = 0; i < n; ++i) {
            PropositionList conds, excs;
            for (int j = 0; j < n; ++j) {
                if (i == j || (rng() % 10000) / 10000.0 >= density)
                    continue;
                adj[i][j] = true;
                (rng() % 2 ? conds : excs).emplace_back("n" + std::to_string(j));
            }
            rules.push_back(make_rule(PropositionId("n" + std::to_string(i)), Operator::All,
                                      std::move(conds), std::move(excs)));
        }
        // Warshall closure: a cycle exists iff some node reaches itself.
        auto reach = adj;
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j])
                        reach[i][j] = true;
        bool cyclic = false;
        for (int i = 0; i < n; ++i)
            cyclic = cyclic || reach[i][i];

        auto cycles = detect_cycles(rules);
        CHECK(cycles.empty() == !cyclic);
        for (const auto& c : cycles) {
            REQUIRE(c.size() >= 3);
            CHECK(c.front() == c.back());
            for (std::size_t k = 0; k + 1 < c.size(); ++k) {
                int from = std::stoi(c[k].str().substr(1));
                int to = std::stoi(c[k + 1].str().substr(1));
                CHECK(adj[from][to]);
            }
        }
    }
}

TEST_CASE("serialize_rule_base") {
    CHECK(serialize_rule_base(RuleBase{}) == "[]\n");

    auto contract = support::contract();
    CHECK(RuleBase::from_rules(parse_rule_file(serialize_rule_base(contract))) == contract);
    auto gdpr = support::gdpr();
    CHECK(RuleBase::from_rules(parse_rule_file(serialize_rule_base(gdpr))) == gdpr);

    // serialize is a fixed point after one pass, for any generated base
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        lab::GenParams p;
        p.seed = seed;
        auto rb = lab::generate_rulebase(p);
        auto text = serialize_rule_base(rb);
        auto back = RuleBase::from_rules(parse_rule_file(text));
        CHECK(back == rb);
        CHECK(serialize_rule_base(back) == text);
    }
}

TEST_CASE("serialized key order matches the rule listing") {
    auto text = serialize_rule_base(support::contract());
    auto p = text.find("\"p\"");
    auto op = text.find("\"op\"");
    auto c = text.find("\"conditions\"");
    auto e = text.find("\"exceptions\"");
    CHECK(p < op);
    CHECK(op < c);
    CHECK(c < e);
}
