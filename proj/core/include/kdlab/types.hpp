#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kdlab/common.hpp"

namespace kdlab {

/**
Token and input-symbol alphabets. Input symbols name the possible initial
conditioning states and are disjoint from tokens; tokens are what the
policies emit.
*/
struct Vocabulary {
    std::vector<std::string> tokens;
    std::vector<std::string> input_symbols;

    std::size_t size() const { return tokens.size(); }
    std::size_t input_count() const { return input_symbols.size(); }

    /// Throws std::invalid_argument on empty/duplicate/overlapping symbols.
    void validate() const;
};

enum class SourceTag { teacher, student, dataset };

std::string to_string(SourceTag tag);
SourceTag source_tag_from_string(const std::string& s);

/**
A generation state: the input symbol plus the tokens emitted so far.
The canonical text encoding is the input index followed by the token
indices, joined by '/' ("2/0/3" = input 2, then tokens 0, 3).
*/
struct Prefix {
    std::size_t input = 0;       // index into Vocabulary::input_symbols
    std::vector<int> generated;  // token indices, oldest first

    std::size_t length() const { return generated.size(); }
    bool operator==(const Prefix&) const = default;

    std::string encode() const;
    static Prefix decode(const std::string& text);
};

/// A complete length-T generation with optional per-step rewards.
struct Trajectory {
    std::size_t input = 0;
    std::vector<int> actions;  // exactly T entries
    numvec rewards;            // empty, or one entry per action
    SourceTag source = SourceTag::dataset;

    /// State observed before action t (the input plus actions[0..t)).
    Prefix prefix_at(std::size_t t) const;
};

/// Sum of per-step rewards. Throws RewardsMissingError if none are attached.
double trajectory_return(const Trajectory& tr);

struct Dataset {
    enum class Provenance { teacher_sampled, ground_truth };
    Provenance provenance = Provenance::teacher_sampled;
    std::vector<Trajectory> trajectories;

    std::size_t size() const { return trajectories.size(); }
};

}  // namespace kdlab
