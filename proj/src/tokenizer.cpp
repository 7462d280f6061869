#include "trialmeta/tokenizer.hpp"

#include <cctype>

namespace trialmeta {

std::vector<std::pair<size_t, size_t>> HeuristicTokenizer::spans(std::string_view text) const {
    std::vector<std::pair<size_t, size_t>> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (std::isalnum(c)) {
            size_t j = i;
            while (j < n && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
            for (size_t k = i; k < j; k += 8) out.emplace_back(k, std::min(k + 8, j));
            i = j;
        } else {
            out.emplace_back(i, i + 1);
            ++i;
        }
    }
    return out;
}

const Tokenizer& default_tokenizer() {
    static HeuristicTokenizer tok;
    return tok;
}

int count_tokens(std::string_view text, const Tokenizer& tok) { return tok.count(text); }

}  // namespace trialmeta
