#ifndef TRIALMETA_TOKENIZER_HPP
#define TRIALMETA_TOKENIZER_HPP

#include <memory>
#include <string_view>
#include <utility>
#include <vector>

namespace trialmeta {

/// Pluggable token counter. The default is a deterministic heuristic; an
/// adapter for a vendor tokenizer can be dropped in behind this interface.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;

    /// Byte spans [begin, end) of each token, in order.
    virtual std::vector<std::pair<size_t, size_t>> spans(std::string_view text) const = 0;

    int count(std::string_view text) const { return static_cast<int>(spans(text).size()); }
};

/// Heuristic word-piece tokenizer: a token is a maximal run of alphanumeric
/// bytes (long runs are split every 8 bytes, roughly mirroring subword
/// tokenizers on long identifiers/numbers) or a single non-space symbol byte.
/// Whitespace produces no tokens, so counting is additive across
/// whitespace-joined segments.
class HeuristicTokenizer final : public Tokenizer {
public:
    std::vector<std::pair<size_t, size_t>> spans(std::string_view text) const override;
};

const Tokenizer& default_tokenizer();

int count_tokens(std::string_view text, const Tokenizer& tok = default_tokenizer());

}  // namespace trialmeta

#endif
