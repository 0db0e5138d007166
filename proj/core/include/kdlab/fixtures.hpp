#pragma once

#include <string>

#include "kdlab/qvalue.hpp"
#include "kdlab/task.hpp"

namespace kdlab {

/**
Built-in tasks.

FIXTURE-A: one input, two tokens {a, b}, horizon 1. The teacher picks
token a with probability 0.9; token a pays 1, token b pays 0. Small
enough to check every number by hand.

FIXTURE-B: two equally likely inputs, four tokens, horizon 3. Teacher
logits are drawn once from uniform(-2, 2) with a fixed seed and frozen;
each step pays 1 when the emitted token matches the teacher's argmax at
that state (ties break toward the lowest index). 42 decision states.

Throws UnknownFixtureError for any other name.
*/
Task make_fixture_task(const std::string& name);

/**
The starting student for a fixture: for FIXTURE-A the hand-specified
policy with P(a) = 0.6, otherwise uniform (zero tabular logits).
*/
Policy default_student(const Task& task);

/// Fresh student of the requested kind (uniform-output for tabular and
/// linear; small random weights for mlp, seeded deterministically).
Policy make_student(const Task& task, PolicyKind kind, std::uint64_t seed);

/// Fresh critic over the task's state space. A positive bound wraps the
/// output in tanh at that level; zero or negative leaves it unbounded.
/// Tabular critics start at zero, the rest at small random weights.
QFunction make_critic(const Task& task, QKind kind, double bound,
                      std::size_t hidden, std::uint64_t seed);

}  // namespace kdlab
