#ifndef PINSTREAM_SKILL_HPP
#define PINSTREAM_SKILL_HPP

#include <string>
#include <vector>

#include "pinstream/error.hpp"

namespace pinstream {

/// Skill levels; the numeric values are the class indices used by the
/// classifier.
enum class Skill { Novice = 0, Intermediate = 1, Expert = 2 };

inline const std::vector<std::string>& skill_labels()
{
    static const std::vector<std::string> labels = {"novice", "intermediate", "expert"};
    return labels;
}

inline std::string to_string(Skill s) { return skill_labels().at(static_cast<std::size_t>(s)); }

inline Skill parse_skill(const std::string& s)
{
    const auto& l = skill_labels();
    for (std::size_t i = 0; i < l.size(); ++i)
        if (l[i] == s)
            return static_cast<Skill>(i);
    throw Error(ErrorCode::SchemaError, "unknown skill label '" + s + "'");
}

} // namespace pinstream

#endif
