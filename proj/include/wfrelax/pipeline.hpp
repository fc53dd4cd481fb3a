#pragma once

#include "wfrelax/error.hpp"
#include "wfrelax/relations.hpp"
#include "wfrelax/wfnet.hpp"

#include <string>
#include <string_view>

namespace wfrelax {

struct DerivedModel {
    WorkflowNet net;
    PairSet directly_follows;
    RelationMatrix matrix;
};

/// Step 1 end to end: validates that the net is free-choice and sound, then
/// derives D and the relation matrix (activities in declaration order).
inline DerivedModel derive_model(const WorkflowNet& net, std::size_t state_limit = default_state_limit) {
    if (!check_free_choice(net))
        fail(ErrorCode::NotFreeChoice, "the net is not (extended) free-choice");
    auto verdict = check_soundness(net, state_limit);
    if (!verdict.sound)
        fail(ErrorCode::UnsoundNet, "the net is not sound: " + verdict.message,
             verdict.witness ? net.describe(*verdict.witness) : std::string(to_string(verdict.violation)));
    auto d = derive_directly_follows(net, verdict.graph);
    auto m = build_matrix(d, net.activities());
    return {net, std::move(d), std::move(m)};
}

inline DerivedModel derive_model(std::string_view pnml, std::size_t state_limit = default_state_limit) {
    return derive_model(parse_pnml(pnml), state_limit);
}

} // namespace wfrelax
