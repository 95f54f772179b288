#pragma once
// Ordered landmark-phrase extraction from navigation instructions.
//
// Two implementations share the LandmarkParser interface: the deterministic
// grammar parser below, which understands the phrase patterns produced by the
// path verbalizer plus common prepositional forms ("on X", "at the X",
// "follow X until the Y"), and an LLM-backed parser (see agent.hpp) that
// delegates to a text-completion backend.

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "lookaside/common.hpp"

namespace lookaside::slkb {

class LandmarkParser {
public:
    virtual ~LandmarkParser() = default;
    // Ordered landmark phrases; empty when nothing recognizable is present.
    virtual std::vector<std::string> parse(std::string_view instruction) const = 0;
};

namespace detail {

struct Token {
    std::string text;      // original spelling, punctuation stripped
    std::string lower;     // lowercase of text
    bool clause_end = false;  // original token ended with , . ; ! ? :
};

inline std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) {
            std::string raw(s.substr(i, j - i));
            Token t;
            while (!raw.empty()) {
                const char c = raw.back();
                if (c == ',' || c == '.' || c == ';' || c == '!' || c == '?' || c == ':') {
                    t.clause_end = true;
                    raw.pop_back();
                } else {
                    break;
                }
            }
            // Leading quotes and parens.
            size_t b = 0;
            while (b < raw.size() && (raw[b] == '"' || raw[b] == '\'' || raw[b] == '(')) ++b;
            while (raw.size() > b && (raw.back() == '"' || raw.back() == '\'' || raw.back() == ')')) raw.pop_back();
            t.text = raw.substr(b);
            t.lower = lowercase(t.text);
            if (!t.text.empty()) out.push_back(std::move(t));
            else if (t.clause_end && !out.empty()) out.back().clause_end = true;
        }
        i = j;
    }
    return out;
}

inline bool is_trigger(const std::string& w) {
    static const std::array<const char*, 11> kTriggers = {
        "reach", "toward", "towards", "to", "follow", "following",
        "until", "past", "on", "at", "along"};
    for (const char* t : kTriggers)
        if (w == t) return true;
    return false;
}

inline bool is_boundary(const std::string& w) {
    return w == "then" || w == "and" || w == "until";
}

inline bool is_article(const std::string& w) { return w == "the" || w == "a" || w == "an"; }

inline bool is_ordinal(const std::string& w) {
    static const std::array<const char*, 15> kOrdinals = {
        "first", "second", "third", "fourth", "fifth", "sixth", "seventh",
        "eighth", "ninth", "tenth", "next", "last", "nearest", "closest", "another"};
    for (const char* o : kOrdinals)
        if (w == o) return true;
    return false;
}

inline bool is_number(const std::string& w) {
    if (w.empty()) return false;
    for (char c : w)
        if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.' && c != '-') return false;
    return true;
}

// Words that cannot stand alone as a landmark phrase.
inline bool is_stopword(const std::string& w) {
    static const std::array<const char*, 30> kStop = {
        "left", "right", "straight", "ahead", "back", "backward", "backwards",
        "forward", "up", "down", "upward", "downward", "your", "you", "yourself",
        "ground", "sky", "north", "south", "east", "west", "there", "here", "it",
        "degrees", "degree", "meters", "meter", "side", "direction"};
    for (const char* s : kStop)
        if (w == s) return true;
    return false;
}

}  // namespace detail

class GrammarLandmarkParser final : public LandmarkParser {
public:
    std::vector<std::string> parse(std::string_view instruction) const override {
        if (trim(instruction).empty()) throw Error("empty instruction");
        const auto tokens = detail::tokenize(instruction);
        std::vector<std::string> out;
        size_t i = 0;
        while (i < tokens.size()) {
            if (!detail::is_trigger(tokens[i].lower) || tokens[i].clause_end) {
                ++i;
                continue;
            }
            // Capture the span after the trigger up to the next trigger,
            // boundary word, or clause-ending punctuation.
            size_t j = i + 1;
            std::vector<size_t> span;
            while (j < tokens.size() && !detail::is_trigger(tokens[j].lower) &&
                   !detail::is_boundary(tokens[j].lower)) {
                span.push_back(j);
                const bool ended = tokens[j].clause_end;
                ++j;
                if (ended) break;
            }
            std::string phrase = clean_phrase(tokens, span);
            if (!phrase.empty()) out.push_back(std::move(phrase));
            i = j;
        }
        return out;
    }

private:
    static std::string clean_phrase(const std::vector<detail::Token>& tokens,
                                    std::vector<size_t> span) {
        // Strip leading articles and ordinals.
        size_t b = 0;
        while (b < span.size() && (detail::is_article(tokens[span[b]].lower) ||
                                   detail::is_ordinal(tokens[span[b]].lower))) {
            ++b;
        }
        span.erase(span.begin(), span.begin() + static_cast<long>(b));
        if (span.empty()) return {};
        // Reject spans made only of direction words and numbers.
        bool informative = false;
        for (size_t idx : span) {
            const auto& w = tokens[idx].lower;
            if (!detail::is_stopword(w) && !detail::is_number(w) && !detail::is_article(w)) {
                informative = true;
                break;
            }
        }
        if (!informative) return {};
        std::string phrase;
        for (size_t k = 0; k < span.size(); ++k) {
            if (k > 0) phrase += ' ';
            phrase += tokens[span[k]].text;
        }
        return phrase;
    }
};

inline std::vector<std::string> parse_landmarks(std::string_view instruction) {
    static const GrammarLandmarkParser parser;
    return parser.parse(instruction);
}

}  // namespace lookaside::slkb
