#pragma once

// Grammar-based caption enhancement. A base caption gains the discovered
// instance count ("A group of X" -> "<count-word> similar X", otherwise the
// count is inserted after the first "of" preceding a noun), and, when the
// geometric analyses fired, a trailing sentence reporting the potential 3D
// translation symmetry and the vanishing-point position. Enhancement is
// idempotent: a caption already carrying "<count-word> similar" is returned
// unchanged.

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <unordered_set>
#include <vector>

#include "rescu/error.hpp"
#include "rescu/geom.hpp"
#include "rescu/types.hpp"

namespace rescu {

enum class VpStatus { none, inside, outside };

struct CaptionContext {
    int count = 2;
    bool ts_detected = false;
    VpStatus vp_status = VpStatus::none;
};

// English number word for 2..99; composites are hyphenated ("twenty-one").
inline std::string number_to_word(int n) {
    if (n < 2 || n > 99) fail(ErrorCode::validation, "count word defined for 2..99 only");
    static const char* small[] = {"zero",    "one",     "two",       "three",    "four",
                                  "five",    "six",     "seven",     "eight",    "nine",
                                  "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
                                  "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
    static const char* tens[] = {"",      "",      "twenty", "thirty", "forty",
                                 "fifty", "sixty", "seventy", "eighty", "ninety"};
    if (n < 20) return small[n];
    std::string w = tens[n / 10];
    if (n % 10) w += std::string("-") + small[n % 10];
    return w;
}

namespace detail {

struct Token {
    std::size_t begin = 0;  // byte offset in the original string
    std::size_t end = 0;    // one past the last byte
    std::string text;       // raw token
    std::string norm;       // lowercased, stripped of trailing punctuation
};

inline std::string normalize_token(const std::string& t) {
    std::size_t e = t.size();
    while (e > 0 && (std::ispunct(static_cast<unsigned char>(t[e - 1])) != 0)) --e;
    std::size_t b = 0;
    while (b < e && (std::ispunct(static_cast<unsigned char>(t[b])) != 0)) ++b;
    std::string out = t.substr(b, e - b);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

inline std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i >= s.size()) break;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        Token t;
        t.begin = i;
        t.end = j;
        t.text = s.substr(i, j - i);
        t.norm = normalize_token(t.text);
        tokens.push_back(std::move(t));
        i = j;
    }
    return tokens;
}

inline const std::unordered_set<std::string>& collective_nouns() {
    static const std::unordered_set<std::string> lex{"group", "herd",  "heard", "row",
                                                     "series", "bunch", "flock", "pack",
                                                     "set",    "collection"};
    return lex;
}

// Small closed-class plural heuristic: trailing 's' (but not "ss") or a
// known irregular plural.
inline bool looks_plural(const std::string& norm) {
    static const std::unordered_set<std::string> irregular{"men",     "women", "children",
                                                           "people",  "geese", "mice",
                                                           "feet",    "teeth"};
    if (irregular.count(norm)) return true;
    if (norm.size() >= 3 && norm.back() == 's' && norm[norm.size() - 2] != 's') return true;
    return false;
}

inline bool token_starts_sentence(const std::string& s, const Token& t) {
    std::size_t i = t.begin;
    while (i > 0) {
        char c = s[i - 1];
        if (std::isspace(static_cast<unsigned char>(c))) {
            --i;
            continue;
        }
        return c == '.' || c == '!' || c == '?';
    }
    return true;
}

inline std::string capitalize(std::string w) {
    if (!w.empty()) w[0] = char(std::toupper(static_cast<unsigned char>(w[0])));
    return w;
}

}  // namespace detail

// Enhances `base` for the given context. Errors: `validation` for an
// unusable count, `validation` ("no insertion point") when the caption has
// neither a collective phrase nor an "of" preceding a noun.
inline std::string enhance_caption(const std::string& base, const CaptionContext& ctx) {
    std::string count_word = number_to_word(ctx.count);
    auto tokens = detail::tokenize(base);

    // Idempotence: an already-enhanced caption carries "<count-word> similar".
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        if (tokens[i].norm == count_word && tokens[i + 1].norm == "similar") return base;

    std::string enhanced;
    int noun_token = -1;  // index (in `tokens`) of the subject noun
    bool replaced = false;
    for (std::size_t i = 0; i + 2 < tokens.size() && !replaced; ++i) {
        if ((tokens[i].norm == "a" || tokens[i].norm == "an") &&
            detail::collective_nouns().count(tokens[i + 1].norm) && tokens[i + 2].norm == "of") {
            bool at_start = detail::token_starts_sentence(base, tokens[i]);
            std::string phrase = (at_start ? detail::capitalize(count_word) : count_word) +
                                 " similar";
            enhanced = base.substr(0, tokens[i].begin) + phrase + base.substr(tokens[i + 2].end);
            noun_token = int(i) + 3;
            replaced = true;
        }
    }
    if (!replaced) {
        for (std::size_t i = 0; i < tokens.size() && !replaced; ++i) {
            if (tokens[i].norm != "of") continue;
            for (std::size_t j = i + 1; j < std::min(tokens.size(), i + 4); ++j) {
                if (detail::looks_plural(tokens[j].norm)) {
                    enhanced = base.substr(0, tokens[i].end) + " " + count_word + " similar" +
                               base.substr(tokens[i].end);
                    noun_token = int(j);
                    replaced = true;
                    break;
                }
            }
        }
    }
    if (!replaced) fail(ErrorCode::validation, "no insertion point for the count word");

    if (!ctx.ts_detected && ctx.vp_status == VpStatus::none) return enhanced;

    std::string noun = noun_token >= 0 && noun_token < int(tokens.size())
                           ? detail::normalize_token(tokens[noun_token].text)
                           : "instances";
    std::string sentence = "The " + noun + " ";
    if (ctx.ts_detected) sentence += "have a potential translation symmetry in 3D";
    if (ctx.vp_status != VpStatus::none) {
        if (ctx.ts_detected) sentence += " and";
        sentence += std::string(ctx.ts_detected ? " form" : "form") + " a vanishing point " +
                    (ctx.vp_status == VpStatus::inside ? "inside" : "outside") + " of the image";
    }
    sentence += ".";
    return enhanced + " " + sentence;
}

// Fraction of the pattern's instance-box union covered by `region`.
inline double rp_region_overlap(const RecurringPattern& rp, Box region) {
    std::vector<Box> boxes;
    boxes.reserve(rp.instances.size());
    for (const auto& inst : rp.instances) boxes.push_back(inst.bbox);
    double total = boxes_union_area(boxes);
    if (total <= 0) fail(ErrorCode::degenerate, "pattern covers no area");
    return boxes_union_intersection_area(boxes, region) / total;
}

// Indices of the candidate regions that cover at least `min_overlap` of the
// pattern (0.90 by default, inclusive).
inline std::vector<int> assign_rp_to_regions(const RecurringPattern& rp,
                                             const std::vector<Box>& regions,
                                             double min_overlap = 0.90) {
    std::vector<int> out;
    for (std::size_t i = 0; i < regions.size(); ++i)
        if (rp_region_overlap(rp, regions[i]) >= min_overlap) out.push_back(int(i));
    return out;
}

}  // namespace rescu
