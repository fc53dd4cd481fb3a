#include "support/nets.hpp"
#include "support/trace_oracle.hpp"

#include "wfrelax/pipeline.hpp"
#include "wfrelax/wfnet.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace wfrelax;
using namespace wfrelax::testing;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no wfrelax::Error thrown";
    return ErrorCode::MalformedDocument;
}

std::string pnml(const std::string& body) {
    return "<pnml><net id=\"n\">" + body + "</net></pnml>";
}

// i -> s -> {p, q};  t1: {p, q} -> o;  t2: p -> o
WorkflowNet non_free_choice_net() {
    return WorkflowNet::create({"i", "p", "q", "o"},
                               {{"s", "s"}, {"t1", "t1"}, {"t2", "t2"}},
                               {{"i", "s"}, {"s", "p"}, {"s", "q"}, {"p", "t1"}, {"q", "t1"}, {"t1", "o"},
                                {"p", "t2"}, {"t2", "o"}});
}

} // namespace

TEST(Pnml, RunningExampleHasNineLabelledTransitions) {
    auto net = parse_pnml(running_example_pnml());
    EXPECT_EQ(net.activities(),
              (std::vector<std::string>{"CPR", "KPR", "CPO", "RG", "PQC", "RI", "SP", "CO", "RR"}));
    EXPECT_EQ(net.places()[net.source_place()], "i");
    EXPECT_EQ(net.places()[net.sink_place()], "o");
}

TEST(Pnml, MinimalNet) {
    auto net = parse_pnml(pnml(R"(<place id="i"/><place id="o"/>
        <transition id="t"><name><text>a</text></name></transition>
        <arc id="1" source="i" target="t"/><arc id="2" source="t" target="o"/>)"));
    EXPECT_EQ(net.transitions().size(), 1u);
    EXPECT_EQ(net.initial_marking().tokens[net.source_place()], 1u);
}

TEST(Pnml, BareNetRootAccepted) {
    auto net = parse_pnml(R"(<net id="n"><place id="i"/><place id="o"/><transition id="t"/>
        <arc id="1" source="i" target="t"/><arc id="2" source="t" target="o"/></net>)");
    EXPECT_TRUE(net.transitions()[0].silent());
    EXPECT_TRUE(net.activities().empty());
}

TEST(Pnml, EmptyNameIsSilent) {
    auto net = parse_pnml(pnml(R"(<place id="i"/><place id="o"/>
        <transition id="t"><name><text>  </text></name></transition>
        <arc id="1" source="i" target="t"/><arc id="2" source="t" target="o"/>)"));
    EXPECT_TRUE(net.transitions()[0].silent());
}

TEST(Pnml, TwoSourcePlacesIsNotAWorkflowNet) {
    auto doc = pnml(R"(<place id="i"/><place id="j"/><place id="o"/>
        <transition id="t"><name><text>a</text></name></transition>
        <arc id="1" source="i" target="t"/><arc id="2" source="j" target="t"/><arc id="3" source="t" target="o"/>)");
    EXPECT_EQ(code_of([&] { parse_pnml(doc); }), ErrorCode::NotAWorkflowNet);
}

TEST(Pnml, DanglingOutputPlaceIsNotAWorkflowNet) {
    // i -> a -> p with p a second sink
    auto doc = pnml(R"(<place id="i"/><place id="p"/><place id="o"/>
        <transition id="a"><name><text>a</text></name></transition>
        <transition id="b"><name><text>b</text></name></transition>
        <arc id="1" source="i" target="a"/><arc id="2" source="a" target="p"/>
        <arc id="3" source="i" target="b"/><arc id="4" source="b" target="o"/>)");
    EXPECT_EQ(code_of([&] { parse_pnml(doc); }), ErrorCode::NotAWorkflowNet);
}

TEST(Pnml, UnreachableTransitionFailsConnectedness) {
    // i -> a -> o plus b fed by a place nobody marks
    EXPECT_EQ(code_of([] {
                  WorkflowNet::create({"i", "o", "q"}, {{"a", "a"}, {"b", "b"}},
                                      {{"i", "a"}, {"a", "o"}, {"q", "b"}, {"b", "o"}});
              }),
              ErrorCode::NotAWorkflowNet);
}

TEST(Pnml, DuplicateLabelRejected) {
    EXPECT_EQ(code_of([] {
                  WorkflowNet::create({"i", "p", "o"}, {{"a", "x"}, {"b", "x"}},
                                      {{"i", "a"}, {"a", "p"}, {"p", "b"}, {"b", "o"}});
              }),
              ErrorCode::DuplicateLabel);
}

TEST(Pnml, StructuralErrorsAreMalformed) {
    EXPECT_EQ(code_of([] { parse_pnml("<pnml><net"); }), ErrorCode::MalformedDocument);
    EXPECT_EQ(code_of([] { parse_pnml("<pnml/>"); }), ErrorCode::MalformedDocument);
    EXPECT_EQ(code_of([] {
                  parse_pnml(pnml(R"(<place id="i"/><place id="o"/><transition id="t"/>
                      <arc id="1" source="i" target="o"/>)"));
              }),
              ErrorCode::MalformedDocument); // place -> place
    EXPECT_EQ(code_of([] {
                  parse_pnml(pnml(R"(<place id="i"/><place id="o"/><transition id="t"/>
                      <arc id="1" source="i" target="t"/><arc id="2" source="t" target="nowhere"/>)"));
              }),
              ErrorCode::MalformedDocument);
    EXPECT_EQ(code_of([] {
                  parse_pnml(pnml(R"(<place id="i"><initialMarking><text>1</text></initialMarking></place>
                      <place id="o"/><transition id="t"/>
                      <arc id="1" source="i" target="t"/><arc id="2" source="t" target="o"/>)"));
              }),
              ErrorCode::MalformedDocument);
}

TEST(Pnml, RoundTrip) {
    auto net = parse_pnml(running_example_pnml());
    auto again = parse_pnml(to_pnml(net));
    EXPECT_EQ(again.places(), net.places());
    EXPECT_EQ(again.activities(), net.activities());
    EXPECT_EQ(again.arcs(), net.arcs());
}

TEST(FreeChoice, Examples) {
    EXPECT_TRUE(check_free_choice(parse_pnml(running_example_pnml())));
    EXPECT_TRUE(check_free_choice(single_transition_net()));
    EXPECT_FALSE(check_free_choice(non_free_choice_net()));
    EXPECT_EQ(code_of([] { derive_model(non_free_choice_net()); }), ErrorCode::NotFreeChoice);
}

TEST(Soundness, RunningExampleIsSound) {
    auto v = check_soundness(parse_pnml(running_example_pnml()));
    EXPECT_TRUE(v.sound) << v.message;
    EXPECT_EQ(v.graph.states.size(), 9u); // one token walking i, p1..p7, o
    ASSERT_TRUE(v.graph.final_state);
    EXPECT_TRUE(v.graph.successors[*v.graph.final_state].empty());
}

TEST(Soundness, MinimalNetIsSound) { EXPECT_TRUE(check_soundness(single_transition_net()).sound); }

TEST(Soundness, AndSplitIntoXorJoinIsUnsound) {
    NetBuilder b;
    auto i = b.place(), p = b.place(), q = b.place(), o = b.place();
    auto t = b.transition("split");
    b.arc(i, t);
    b.arc(t, p);
    b.arc(t, q);
    b.step(p, "x", o);
    b.step(q, "y", o);
    auto net = b.build();
    auto v = check_soundness(net);
    EXPECT_FALSE(v.sound);
    EXPECT_TRUE(v.witness.has_value());
    EXPECT_EQ(code_of([&] { derive_model(net); }), ErrorCode::UnsoundNet);
}

TEST(Soundness, DeadlockIsCannotComplete) {
    // XOR-split into AND-join: the join can never fire.
    NetBuilder b;
    auto i = b.place(), p = b.place(), q = b.place(), o = b.place();
    b.step(i, "x", p);
    b.step(i, "y", q);
    auto j = b.transition("join");
    b.arc(p, j);
    b.arc(q, j);
    b.arc(j, o);
    auto v = check_soundness(b.build());
    EXPECT_FALSE(v.sound);
    EXPECT_EQ(v.violation, SoundnessViolation::CannotComplete);
}

TEST(Soundness, StateLimit) {
    auto net = parse_pnml(running_example_pnml());
    EXPECT_EQ(code_of([&] { check_soundness(net, 5); }), ErrorCode::StateSpaceExceeded);
    EXPECT_NO_THROW(check_soundness(net, 9));
}

TEST(Soundness, RandomBlockNetsAreSoundAndMatchOracleStateCount) {
    RandomNetGenerator gen(7);
    for (int k = 0; k < 100; ++k) {
        auto net = gen.generate();
        auto v = check_soundness(net);
        ASSERT_TRUE(v.sound) << k << ": " << v.message;
        ASSERT_TRUE(check_free_choice(net)) << k;
        EXPECT_EQ(v.graph.states.size(), TraceOracle(net).reachable_markings()) << k;
    }
}

TEST(Soundness, VerdictIndependentOfDeclarationOrder) {
    RandomNetGenerator gen(11);
    for (int k = 0; k < 20; ++k) {
        auto net = gen.generate();
        auto places = net.places();
        auto transitions = net.transitions();
        auto arcs = net.arcs();
        std::reverse(places.begin(), places.end());
        std::reverse(transitions.begin(), transitions.end());
        std::reverse(arcs.begin(), arcs.end());
        auto shuffled = WorkflowNet::create(places, transitions, arcs);
        auto a = check_soundness(net), b = check_soundness(shuffled);
        EXPECT_EQ(a.sound, b.sound);
        EXPECT_EQ(a.graph.states.size(), b.graph.states.size());
    }
}
