#include "kdlab/types.hpp"

#include <set>
#include <sstream>

namespace kdlab {

void Vocabulary::validate() const {
    if (tokens.empty()) throw std::invalid_argument("vocabulary has no tokens");
    if (input_symbols.empty())
        throw std::invalid_argument("vocabulary has no input symbols");
    std::set<std::string> seen;
    for (const auto& t : tokens)
        if (!seen.insert(t).second)
            throw std::invalid_argument("duplicate token: " + t);
    for (const auto& s : input_symbols)
        if (!seen.insert(s).second)
            throw std::invalid_argument(
                "input symbol duplicates or collides with a token: " + s);
}

std::string to_string(SourceTag tag) {
    switch (tag) {
        case SourceTag::teacher: return "teacher";
        case SourceTag::student: return "student";
        case SourceTag::dataset: return "dataset";
    }
    throw std::invalid_argument("bad SourceTag");
}

SourceTag source_tag_from_string(const std::string& s) {
    if (s == "teacher") return SourceTag::teacher;
    if (s == "student") return SourceTag::student;
    if (s == "dataset") return SourceTag::dataset;
    throw std::invalid_argument("bad source tag: " + s);
}

std::string Prefix::encode() const {
    std::ostringstream out;
    out << input;
    for (int t : generated) out << '/' << t;
    return out.str();
}

Prefix Prefix::decode(const std::string& text) {
    Prefix p;
    std::istringstream in(text);
    std::string field;
    if (!std::getline(in, field, '/') || field.empty())
        throw std::invalid_argument("bad prefix encoding: " + text);
    p.input = static_cast<std::size_t>(std::stoul(field));
    while (std::getline(in, field, '/')) {
        if (field.empty())
            throw std::invalid_argument("bad prefix encoding: " + text);
        p.generated.push_back(std::stoi(field));
    }
    return p;
}

Prefix Trajectory::prefix_at(std::size_t t) const {
    if (t > actions.size())
        throw HorizonExceededError("prefix_at: step past end of trajectory");
    Prefix p;
    p.input = input;
    p.generated.assign(actions.begin(), actions.begin() + static_cast<long>(t));
    return p;
}

double trajectory_return(const Trajectory& tr) {
    if (tr.rewards.empty())
        throw RewardsMissingError("trajectory has no rewards attached");
    if (tr.rewards.size() != tr.actions.size())
        throw RewardsMissingError("trajectory rewards/actions length mismatch");
    return pairwise_sum(tr.rewards);
}

}  // namespace kdlab
