#pragma once

#include <memory>
#include <string>
#include <vector>

#include "declab/probmodel.hpp"

namespace testing {

// Paley-Walsh model d_n = eps_n * labels[n-1][u], one label per depth-(n-1) node.
inline declab::SequenceSpec pw_table(const std::string& space, std::vector<std::vector<declab::Vec>> labels) {
  declab::SequenceSpec spec;
  spec.space = space;
  spec.levels = declab::FiltrationTree::paley_walsh(static_cast<int>(labels.size())).levels();
  spec.increment = declab::IncrementRule::scalar;
  spec.predictable = declab::PredictableRule::table;
  spec.labels = std::move(labels);
  spec.conditionally_symmetric = true;
  return spec;
}

// Same, with one label shared by every node of a level.
inline declab::SequenceSpec pw_constant(const std::string& space, std::vector<declab::Vec> labels) {
  declab::SequenceSpec spec;
  spec.space = space;
  spec.levels = declab::FiltrationTree::paley_walsh(static_cast<int>(labels.size())).levels();
  spec.increment = declab::IncrementRule::scalar;
  spec.predictable = declab::PredictableRule::constant;
  for (auto& v : labels) spec.labels.push_back({std::move(v)});
  spec.conditionally_symmetric = true;
  return spec;
}

inline std::shared_ptr<const declab::AdaptedSequence> build(const declab::SequenceSpec& spec) {
  return std::make_shared<const declab::AdaptedSequence>(declab::AdaptedSequence::build(spec));
}

inline declab::TangentPair pair_of(const declab::SequenceSpec& spec) { return declab::TangentPair(build(spec)); }

// Scalar Rademacher walk of the given depth.
inline declab::SequenceSpec rademacher_walk(int depth) {
  return pw_constant("l2:1", std::vector<declab::Vec>(static_cast<std::size_t>(depth), declab::Vec{1.0}));
}

}  // namespace testing
