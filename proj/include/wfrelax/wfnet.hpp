#pragma once

// Workflow nets: PNML-subset ingestion, structural validation, the
// free-choice test and bounded reachability-based soundness checking.

#include "wfrelax/error.hpp"

#include <boost/functional/hash.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wfrelax {

struct Transition {
    std::string id;
    std::optional<std::string> label; ///< absent for silent transitions

    bool silent() const { return !label.has_value(); }
};

struct Arc {
    std::string source;
    std::string target;

    auto operator<=>(const Arc&) const = default;
};

/// Token counts indexed by place position in the owning net.
struct Marking {
    std::vector<std::uint32_t> tokens;

    auto operator<=>(const Marking&) const = default;
};

struct MarkingHash {
    std::size_t operator()(const Marking& m) const {
        return boost::hash_range(m.tokens.begin(), m.tokens.end());
    }
};

/// W = (P, T, F) with a unique source place i and sink place o. Instances only
/// come out of `WorkflowNet::create` (or `parse_pnml`) and are immutable.
class WorkflowNet {
public:
    static WorkflowNet create(std::vector<std::string> places, std::vector<Transition> transitions,
                              std::vector<Arc> arcs);

    const std::vector<std::string>& places() const { return places_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const std::vector<Arc>& arcs() const { return arcs_; }

    std::size_t source_place() const { return source_; }
    std::size_t sink_place() const { return sink_; }

    /// Input / output places of transition `t` (sorted place indices).
    const std::vector<std::size_t>& preset(std::size_t t) const { return preset_[t]; }
    const std::vector<std::size_t>& postset(std::size_t t) const { return postset_[t]; }

    std::optional<std::size_t> place_index(std::string_view id) const;
    std::optional<std::size_t> transition_index(std::string_view id) const;

    /// Labels of the non-silent transitions in declaration order.
    std::vector<std::string> activities() const;

    Marking initial_marking() const;
    Marking final_marking() const;
    std::string describe(const Marking& m) const;

private:
    WorkflowNet() = default;

    std::vector<std::string> places_;
    std::vector<Transition> transitions_;
    std::vector<Arc> arcs_;
    std::vector<std::vector<std::size_t>> preset_;
    std::vector<std::vector<std::size_t>> postset_;
    std::size_t source_ = 0;
    std::size_t sink_ = 0;
};

inline std::optional<std::size_t> WorkflowNet::place_index(std::string_view id) const {
    auto it = std::find(places_.begin(), places_.end(), id);
    if (it == places_.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - places_.begin());
}

inline std::optional<std::size_t> WorkflowNet::transition_index(std::string_view id) const {
    auto it = std::find_if(transitions_.begin(), transitions_.end(),
                           [&](const Transition& t) { return t.id == id; });
    if (it == transitions_.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - transitions_.begin());
}

inline std::vector<std::string> WorkflowNet::activities() const {
    std::vector<std::string> out;
    for (const auto& t : transitions_)
        if (t.label)
            out.push_back(*t.label);
    return out;
}

inline Marking WorkflowNet::initial_marking() const {
    Marking m{std::vector<std::uint32_t>(places_.size(), 0)};
    m.tokens[source_] = 1;
    return m;
}

inline Marking WorkflowNet::final_marking() const {
    Marking m{std::vector<std::uint32_t>(places_.size(), 0)};
    m.tokens[sink_] = 1;
    return m;
}

inline std::string WorkflowNet::describe(const Marking& m) const {
    std::string out = "{";
    bool first = true;
    for (std::size_t p = 0; p < m.tokens.size(); ++p) {
        if (m.tokens[p] == 0)
            continue;
        if (!first)
            out += ", ";
        first = false;
        out += places_[p] + ":" + std::to_string(m.tokens[p]);
    }
    return out + "}";
}

inline WorkflowNet WorkflowNet::create(std::vector<std::string> places, std::vector<Transition> transitions,
                                       std::vector<Arc> arcs) {
    WorkflowNet net;

    // Node ids: places occupy [0, |P|), transitions [|P|, |P|+|T|).
    std::unordered_map<std::string, std::size_t> node;
    for (const auto& p : places) {
        if (p.empty())
            fail(ErrorCode::MalformedDocument, "place with empty id");
        if (!node.emplace(p, node.size()).second)
            fail(ErrorCode::MalformedDocument, "duplicate node id '" + p + "'", p);
    }
    for (const auto& t : transitions) {
        if (t.id.empty())
            fail(ErrorCode::MalformedDocument, "transition with empty id");
        if (t.label && t.label->empty())
            fail(ErrorCode::MalformedDocument, "transition '" + t.id + "' has an empty label", t.id);
        if (!node.emplace(t.id, node.size()).second)
            fail(ErrorCode::MalformedDocument, "duplicate node id '" + t.id + "'", t.id);
    }

    const std::size_t np = places.size();
    const std::size_t nt = transitions.size();
    const std::size_t n = np + nt;
    std::vector<std::vector<std::size_t>> out_edges(n), in_edges(n);
    net.preset_.assign(nt, {});
    net.postset_.assign(nt, {});

    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& a : arcs) {
        auto s = node.find(a.source);
        auto d = node.find(a.target);
        if (s == node.end() || d == node.end())
            fail(ErrorCode::MalformedDocument, "arc " + a.source + " -> " + a.target + " references an unknown node",
                 s == node.end() ? a.source : a.target);
        const bool s_place = s->second < np;
        const bool d_place = d->second < np;
        if (s_place == d_place)
            fail(ErrorCode::MalformedDocument,
                 "arc " + a.source + " -> " + a.target + " does not connect a place and a transition", a.source);
        if (!seen.emplace(s->second, d->second).second)
            fail(ErrorCode::MalformedDocument, "duplicate arc " + a.source + " -> " + a.target, a.source);
        out_edges[s->second].push_back(d->second);
        in_edges[d->second].push_back(s->second);
        if (s_place)
            net.preset_[d->second - np].push_back(s->second);
        else
            net.postset_[s->second - np].push_back(d->second);
    }
    for (auto& v : net.preset_)
        std::sort(v.begin(), v.end());
    for (auto& v : net.postset_)
        std::sort(v.begin(), v.end());

    std::vector<std::size_t> sources, sinks;
    for (std::size_t p = 0; p < np; ++p) {
        if (in_edges[p].empty())
            sources.push_back(p);
        if (out_edges[p].empty())
            sinks.push_back(p);
    }
    auto names = [&](const std::vector<std::size_t>& ps) {
        std::string s;
        for (auto p : ps)
            s += (s.empty() ? "" : ", ") + places[p];
        return s;
    };
    if (sources.size() != 1)
        fail(ErrorCode::NotAWorkflowNet,
             "expected exactly one source place, found " + std::to_string(sources.size()), names(sources));
    if (sinks.size() != 1)
        fail(ErrorCode::NotAWorkflowNet, "expected exactly one sink place, found " + std::to_string(sinks.size()),
             names(sinks));

    auto reach = [n](std::size_t start, const std::vector<std::vector<std::size_t>>& edges) {
        std::vector<bool> seen_(n, false);
        std::vector<std::size_t> stack{start};
        seen_[start] = true;
        while (!stack.empty()) {
            auto v = stack.back();
            stack.pop_back();
            for (auto w : edges[v])
                if (!seen_[w]) {
                    seen_[w] = true;
                    stack.push_back(w);
                }
        }
        return seen_;
    };
    auto from_source = reach(sources[0], out_edges);
    auto to_sink = reach(sinks[0], in_edges);
    for (std::size_t v = 0; v < n; ++v) {
        if (from_source[v] && to_sink[v])
            continue;
        const std::string& id = v < np ? places[v] : transitions[v - np].id;
        fail(ErrorCode::NotAWorkflowNet, "node '" + id + "' is not on a path from the source to the sink place", id);
    }

    std::set<std::string> labels;
    for (const auto& t : transitions)
        if (t.label && !labels.insert(*t.label).second)
            fail(ErrorCode::DuplicateLabel, "activity label '" + *t.label + "' is used by more than one transition",
                 *t.label);

    net.places_ = std::move(places);
    net.transitions_ = std::move(transitions);
    net.arcs_ = std::move(arcs);
    net.source_ = sources[0];
    net.sink_ = sinks[0];
    return net;
}

// ---------------------------------------------------------------------------
// PNML subset

namespace detail {

namespace pt = boost::property_tree;

inline std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

inline std::string required_attr(const pt::ptree& node, const char* element, const char* attr) {
    auto v = node.get_optional<std::string>(std::string("<xmlattr>.") + attr);
    if (!v || v->empty())
        fail(ErrorCode::MalformedDocument, std::string(element) + " element without '" + attr + "' attribute");
    return *v;
}

struct PnmlContents {
    std::vector<std::string> places;
    std::vector<Transition> transitions;
    std::vector<Arc> arcs;
};

inline void collect_pnml(const pt::ptree& container, PnmlContents& out) {
    for (const auto& [tag, child] : container) {
        if (tag == "place") {
            auto id = required_attr(child, "place", "id");
            if (child.get_child_optional("initialMarking"))
                fail(ErrorCode::MalformedDocument,
                     "place '" + id + "' declares an initialMarking; the initial marking is implicit", id);
            out.places.push_back(std::move(id));
        } else if (tag == "transition") {
            Transition t{required_attr(child, "transition", "id"), std::nullopt};
            if (auto text = child.get_optional<std::string>("name.text")) {
                auto label = trim(*text);
                if (!label.empty())
                    t.label = std::move(label);
            }
            out.transitions.push_back(std::move(t));
        } else if (tag == "arc") {
            Arc a{required_attr(child, "arc", "source"), required_attr(child, "arc", "target")};
            if (auto w = child.get_optional<std::string>("inscription.text"); w && trim(*w) != "1")
                fail(ErrorCode::MalformedDocument, "weighted arc " + a.source + " -> " + a.target + " is not supported",
                     a.source);
            out.arcs.push_back(std::move(a));
        } else if (tag == "page") {
            collect_pnml(child, out);
        }
    }
}

} // namespace detail

/// Parses the PNML subset (net / page / place / transition / arc). Transitions
/// without a name are silent.
inline WorkflowNet parse_pnml(std::string_view document) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in{std::string(document)};
        pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& e) {
        fail(ErrorCode::MalformedDocument, "line " + std::to_string(e.line()) + ": " + e.message());
    }

    std::vector<const pt::ptree*> nets;
    for (const auto& [tag, child] : tree) {
        if (tag == "net")
            nets.push_back(&child);
        else if (tag == "pnml")
            for (const auto& [inner, grandchild] : child)
                if (inner == "net")
                    nets.push_back(&grandchild);
    }
    if (nets.size() != 1)
        fail(ErrorCode::MalformedDocument, "expected exactly one net element, found " + std::to_string(nets.size()));

    detail::PnmlContents contents;
    detail::collect_pnml(*nets.front(), contents);
    return WorkflowNet::create(std::move(contents.places), std::move(contents.transitions),
                               std::move(contents.arcs));
}

inline std::string to_pnml(const WorkflowNet& net) {
    namespace pt = boost::property_tree;
    pt::ptree net_node;
    net_node.put("<xmlattr>.id", "net");
    net_node.put("<xmlattr>.type", "http://www.pnml.org/version-2009/grammar/ptnet");
    for (const auto& p : net.places()) {
        pt::ptree place;
        place.put("<xmlattr>.id", p);
        net_node.add_child("place", place);
    }
    for (const auto& t : net.transitions()) {
        pt::ptree tr;
        tr.put("<xmlattr>.id", t.id);
        if (t.label)
            tr.put("name.text", *t.label);
        net_node.add_child("transition", tr);
    }
    std::size_t k = 0;
    for (const auto& a : net.arcs()) {
        pt::ptree arc;
        arc.put("<xmlattr>.id", "a" + std::to_string(k++));
        arc.put("<xmlattr>.source", a.source);
        arc.put("<xmlattr>.target", a.target);
        net_node.add_child("arc", arc);
    }
    pt::ptree root;
    root.add_child("pnml.net", net_node);
    std::ostringstream out;
    pt::write_xml(out, root, pt::xml_writer_make_settings<std::string>(' ', 2));
    return out.str();
}

// ---------------------------------------------------------------------------
// Behavioural checks

/// Extended free-choice: any two transitions whose presets intersect have
/// equal presets.
inline bool check_free_choice(const WorkflowNet& net) {
    const auto nt = net.transitions().size();
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t u = t + 1; u < nt; ++u) {
            const auto& a = net.preset(t);
            const auto& b = net.preset(u);
            if (a == b)
                continue;
            std::vector<std::size_t> common;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
            if (!common.empty())
                return false;
        }
    return true;
}

struct ReachabilityEdge {
    std::size_t transition;
    std::size_t target;
};

/// Explicit state space; state 0 is the initial marking.
struct ReachabilityGraph {
    std::vector<Marking> states;
    std::vector<std::vector<ReachabilityEdge>> successors;
    std::optional<std::size_t> final_state;
};

enum class SoundnessViolation {
    None,
    Unsafe,
    UncleanCompletion,
    CannotComplete,
    DeadTransition,
};

inline std::string_view to_string(SoundnessViolation v) {
    switch (v) {
    case SoundnessViolation::None: return "none";
    case SoundnessViolation::Unsafe: return "unsafe";
    case SoundnessViolation::UncleanCompletion: return "unclean_completion";
    case SoundnessViolation::CannotComplete: return "cannot_complete";
    case SoundnessViolation::DeadTransition: return "dead_transition";
    }
    return "unknown";
}

struct SoundnessVerdict {
    bool sound = false;
    SoundnessViolation violation = SoundnessViolation::None;
    std::string message;
    std::optional<Marking> witness;
    ReachabilityGraph graph;
};

inline constexpr std::size_t default_state_limit = 100'000;

/// Explores every reachable marking (at most `state_limit` of them). A firing
/// that would put a second token on a place makes the net unsafe and hence
/// unsound; such markings are not added to the graph.
inline SoundnessVerdict check_soundness(const WorkflowNet& net, std::size_t state_limit = default_state_limit) {
    SoundnessVerdict verdict;
    auto& g = verdict.graph;
    const auto nt = net.transitions().size();
    const auto sink = net.sink_place();

    std::unordered_map<Marking, std::size_t, MarkingHash> index;
    auto intern = [&](Marking m) -> std::size_t {
        auto [it, inserted] = index.emplace(m, g.states.size());
        if (inserted) {
            if (g.states.size() >= state_limit)
                fail(ErrorCode::StateSpaceExceeded,
                     "more than " + std::to_string(state_limit) + " reachable markings",
                     std::to_string(state_limit));
            g.states.push_back(std::move(m));
            g.successors.emplace_back();
        }
        return it->second;
    };

    std::optional<Marking> unsafe_witness;
    std::vector<bool> fired(nt, false);
    intern(net.initial_marking());
    for (std::size_t s = 0; s < g.states.size(); ++s) {
        for (std::size_t t = 0; t < nt; ++t) {
            const Marking& m = g.states[s];
            const auto& pre = net.preset(t);
            bool enabled = std::all_of(pre.begin(), pre.end(), [&](std::size_t p) { return m.tokens[p] > 0; });
            if (!enabled)
                continue;
            Marking next = m;
            for (auto p : pre)
                --next.tokens[p];
            bool safe = true;
            for (auto p : net.postset(t))
                if (++next.tokens[p] > 1)
                    safe = false;
            fired[t] = true;
            if (!safe) {
                if (!unsafe_witness)
                    unsafe_witness = g.states[s];
                continue;
            }
            auto target = intern(std::move(next));
            g.successors[s].push_back({t, target});
        }
    }

    if (auto it = index.find(net.final_marking()); it != index.end())
        g.final_state = it->second;

    auto reject = [&](SoundnessViolation v, std::string msg, std::optional<Marking> witness) {
        verdict.sound = false;
        verdict.violation = v;
        verdict.message = std::move(msg);
        verdict.witness = std::move(witness);
        return verdict;
    };

    if (unsafe_witness)
        return reject(SoundnessViolation::Unsafe,
                      "a transition enabled at " + net.describe(*unsafe_witness) + " puts a second token on a place",
                      unsafe_witness);

    for (const auto& m : g.states) {
        if (m.tokens[sink] == 0)
            continue;
        std::uint32_t total = 0;
        for (auto c : m.tokens)
            total += c;
        if (total > 1)
            return reject(SoundnessViolation::UncleanCompletion,
                          "the sink place is marked while other tokens remain at " + net.describe(m), m);
    }

    std::vector<bool> can_complete(g.states.size(), false);
    if (g.final_state) {
        std::vector<std::vector<std::size_t>> preds(g.states.size());
        for (std::size_t s = 0; s < g.states.size(); ++s)
            for (const auto& e : g.successors[s])
                preds[e.target].push_back(s);
        std::vector<std::size_t> stack{*g.final_state};
        can_complete[*g.final_state] = true;
        while (!stack.empty()) {
            auto s = stack.back();
            stack.pop_back();
            for (auto p : preds[s])
                if (!can_complete[p]) {
                    can_complete[p] = true;
                    stack.push_back(p);
                }
        }
    }
    for (std::size_t s = 0; s < g.states.size(); ++s)
        if (!can_complete[s])
            return reject(SoundnessViolation::CannotComplete,
                          "the final marking is unreachable from " + net.describe(g.states[s]), g.states[s]);

    for (std::size_t t = 0; t < nt; ++t)
        if (!fired[t])
            return reject(SoundnessViolation::DeadTransition,
                          "transition '" + net.transitions()[t].id + "' can never fire", std::nullopt);

    verdict.sound = true;
    return verdict;
}

} // namespace wfrelax
