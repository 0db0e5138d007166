#pragma once

#include <string>

#include "kdlab/qvalue.hpp"
#include "kdlab/task.hpp"

namespace kdlab {

/**
Structured-text round trips. Objects carry a schema tag; keys are
emitted in sorted order and numbers in shortest round-trip form, so
serializing the same value twice yields identical bytes. The reward
table is keyed by the canonical prefix encoding with one array of |V|
entries per decision state.
*/
std::string task_to_json(const Task& task);
Task task_from_json(const std::string& text);

std::string policy_to_json(const Policy& pol);
/// Rebuilds a checkpoint against the task's state index / feature map.
Policy policy_from_json(const std::string& text, const Task& task);

std::string critic_to_json(const QFunction& f);
QFunction critic_from_json(const std::string& text, const Task& task);

/// Bundle written when a certification check fails: the task and the
/// student policy that produced the violation.
std::string certification_instance_json(const Task& task,
                                        const Policy& student);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace kdlab
