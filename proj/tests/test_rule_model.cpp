#include <doctest.h>

#include <random>
#include <regex>

#include "lexrule/rule_model.hpp"
#include "lexrule/strategy_lab.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace lexrule;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an lexrule::Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("identifiers follow the snake_case grammar") {
    CHECK(PropositionId::is_valid("consent_withdrawn"));
    CHECK(PropositionId::is_valid("a"));
    CHECK(PropositionId::is_valid("art17_erasure_applicable"));
    CHECK_FALSE(PropositionId::is_valid(""));
    CHECK_FALSE(PropositionId::is_valid("Minor"));
    CHECK_FALSE(PropositionId::is_valid("_x"));
    CHECK_FALSE(PropositionId::is_valid("9lives"));
    CHECK_FALSE(PropositionId::is_valid("has space"));
    CHECK_FALSE(PropositionId::is_valid("dash-ed"));
    CHECK(code_of([] { PropositionId("Bad"); }) == ErrorCode::BadIdentifier);
}

TEST_CASE("identifier check agrees with a regex on random strings") {
    const std::regex grammar("^[a-z][a-z0-9_]*$");
    const std::string alphabet = "abz09_AZ -.(";
    std::mt19937 rng(42);
    for (int i = 0; i < 5000; ++i) {
        std::string s(rng() % 6, ' ');
        for (auto& c : s)
            c = alphabet[rng() % alphabet.size()];
        INFO("candidate: '" << s << "'");
        const bool expect = std::regex_match(s, grammar);
        CHECK(PropositionId::is_valid(s) == expect);
        if (expect)
            CHECK(PropositionId(s).str() == s);
    }
}

TEST_CASE("operator strings are exact") {
    CHECK(parse_operator("ALL") == Operator::All);
    CHECK(parse_operator("ANY") == Operator::Any);
    CHECK_FALSE(parse_operator("all").has_value());
    CHECK_FALSE(parse_operator("OR").has_value());
    CHECK(to_string(Operator::Any) == "ANY");
}

TEST_CASE("make_rule") {
    SUBCASE("contract rule") {
        auto r = make_rule(PropositionId("contract_voidable"), Operator::Any,
                           to_propositions({"minor", "incapable"}),
                           to_propositions({"for_necessities"}));
        CHECK(r.p.str() == "contract_voidable");
        CHECK(r.op == Operator::Any);
        CHECK(r.conditions == to_propositions({"minor", "incapable"}));
        CHECK(r.exceptions == to_propositions({"for_necessities"}));
    }
    SUBCASE("empty lists are allowed") {
        auto r = make_rule(PropositionId("x"), Operator::All, {}, {});
        CHECK(r.conditions.empty());
        CHECK(r.exceptions.empty());
    }
    SUBCASE("self reference") {
        CHECK(code_of([] {
                  make_rule(PropositionId("x"), Operator::All, to_propositions({"x"}), {});
              }) == ErrorCode::SelfReference);
        CHECK(code_of([] {
                  make_rule(PropositionId("x"), Operator::All, {}, to_propositions({"x"}));
              }) == ErrorCode::SelfReference);
    }
    SUBCASE("duplicates within one list") {
        CHECK(code_of([] {
                  make_rule(PropositionId("x"), Operator::Any, to_propositions({"a", "b", "a"}), {});
              }) == ErrorCode::DuplicateEntry);
        CHECK(code_of([] {
                  make_rule(PropositionId("x"), Operator::Any, {}, to_propositions({"e", "e"}));
              }) == ErrorCode::DuplicateEntry);
    }
    SUBCASE("the same id in both lists is allowed") {
        CHECK_NOTHROW(make_rule(PropositionId("x"), Operator::All, to_propositions({"a"}),
                                to_propositions({"a"})));
    }
}

TEST_CASE("rule_base_from_rules") {
    SUBCASE("contract") {
        auto rb = support::contract();
        CHECK(rb.size() == 1);
        CHECK(rb.dependencies(PropositionId("contract_voidable")) ==
              to_propositions({"minor", "incapable", "for_necessities"}));
        CHECK(rb.dependencies(PropositionId("minor")).empty());
    }
    SUBCASE("empty") {
        auto rb = rule_base_from_rules({});
        CHECK(rb.empty());
        CHECK(leaves(rb).empty());
    }
    SUBCASE("two-cycle") {
        std::vector<Rule> rules{
            make_rule(PropositionId("a"), Operator::All, to_propositions({"b"}), {}),
            make_rule(PropositionId("b"), Operator::All, to_propositions({"a"}), {})};
        try {
            rule_base_from_rules(rules);
            FAIL("expected CyclicDependency");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::CyclicDependency);
            CHECK(e.detail() == std::vector<std::string>{"a", "b", "a"});
        }
    }
    SUBCASE("cycle through an exception") {
        std::vector<Rule> rules{
            make_rule(PropositionId("a"), Operator::All, to_propositions({"b"}), {}),
            make_rule(PropositionId("b"), Operator::All, {}, to_propositions({"c"})),
            make_rule(PropositionId("c"), Operator::Any, to_propositions({"a"}), {})};
        CHECK(code_of([&] { rule_base_from_rules(rules); }) == ErrorCode::CyclicDependency);
    }
    SUBCASE("duplicate head") {
        std::vector<Rule> rules{make_rule(PropositionId("a"), Operator::All, {}, {}),
                                make_rule(PropositionId("a"), Operator::Any, {}, {})};
        CHECK(code_of([&] { rule_base_from_rules(rules); }) == ErrorCode::DuplicateHead);
    }
}

TEST_CASE("leaves") {
    CHECK(leaves(support::contract()) ==
          std::set<PropositionId>{PropositionId("minor"), PropositionId("incapable"),
                                  PropositionId("for_necessities")});

    auto gdpr = support::gdpr();
    auto got = leaves(gdpr);
    auto scan = oracle::leaf_scan(oracle::flatten(gdpr));
    CHECK(got.size() == 9);
    CHECK(scan.size() == 9);
    for (const auto& id : got)
        CHECK(scan.count(id.str()) == 1);
}

TEST_CASE("heads and leaves are disjoint and match a brute-force scan") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        lab::GenParams p;
        p.seed = seed;
        p.n_rules = seed % 25;
        auto rb = lab::generate_rulebase(p);
        auto got = leaves(rb);
        for (const auto& h : rb.heads())
            CHECK(got.count(h) == 0);
        auto scan = oracle::leaf_scan(oracle::flatten(rb));
        std::set<std::string> as_text;
        for (const auto& id : got)
            as_text.insert(id.str());
        CHECK(as_text == scan);
    }
}

TEST_CASE("construction is deterministic") {
    auto rules = parse_rule_file(read_file(support::fixture_path("rules/no_exceptions_deep.rules.json")));
    CHECK(RuleBase::from_rules(rules) == RuleBase::from_rules(rules));
    auto a = RuleBase::from_rules(rules);
    auto b = RuleBase::from_rules(rules);
    for (const auto& h : a.heads())
        CHECK(a.dependencies(h) == b.dependencies(h));
    CHECK(dependency_depth(a) == 3);
}

TEST_CASE("fact base has set semantics") {
    FactBase f;
    CHECK(f.insert(PropositionId("a")));
    CHECK_FALSE(f.insert(PropositionId("a")));
    CHECK(f.size() == 1);
    CHECK(f.contains(PropositionId("a")));
    CHECK_FALSE(f.contains(PropositionId("b")));
    CHECK(FactBase{"x", "y", "x"}.size() == 2);
}
